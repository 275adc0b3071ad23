#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <stdexcept>
#include <vector>

#include "nsv/field.hpp"
#include "nsv/spectral_ops.hpp"
#include "nsv/wave_grid.hpp"

namespace nsv {

/// Deterministic Gaussian source.  std::normal_distribution is not pinned
/// by the standard, so reports generated on different standard libraries
/// would disagree; Box-Muller over mt19937_64 is bit-stable everywhere.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    double uniform() {
        // 53-bit mantissa in [0, 1)
        return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
    }

    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

    std::uint64_t raw() { return gen_(); }

private:
    std::mt19937_64 gen_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

struct RandomFieldSpec {
    std::uint64_t seed = 1;
    double spectral_decay = 2.0;  // coefficient amplitude ~ |m|^{-decay}
    int mode_limit = 0;           // keep |m|^2 <= mode_limit^2 only; 0 = whole dealias cube
    double target_h1dot = 1.0;    // rescale so ||grad u|| equals this; 0 = leave unscaled
};

/// Seeded random divergence-free zero-mean field.  Coefficients are drawn
/// on the canonical half of the retained lattice in site order (so the
/// field is a pure function of grid and spec), mirrored by conjugation, and
/// projected.
inline SpectralVectorField random_solenoidal_field(const GridPtr& grid, const RandomFieldSpec& spec) {
    const WaveGrid& g = *grid;
    SpectralVectorField u(grid);
    Rng rng(spec.seed);
    const int limit_sq = spec.mode_limit > 0 ? spec.mode_limit * spec.mode_limit : 0;
    for (std::size_t s = 1; s < g.size(); ++s) {
        if (!g.keep(s) || !g.is_canonical(s)) continue;
        if (limit_sq > 0 && g.mode_sq(s) > limit_sq) continue;
        const double amp = std::pow(static_cast<double>(g.mode_sq(s)), -0.5 * spec.spectral_decay);
        const std::size_t cs = g.conjugate_site(s);
        for (int c = 0; c < 4; ++c) {
            const Complex z(rng.normal(), rng.normal());
            u.at(c, s) = amp * z;
            u.at(c, cs) = amp * std::conj(z);
        }
    }
    leray_project_inplace(u);
    if (spec.target_h1dot > 0.0) {
        const double h = h1dot_norm(u);
        if (h == 0.0) throw std::invalid_argument("random_solenoidal_field: empty mode set");
        u *= spec.target_h1dot / h;
    }
    return u;
}

/// Fixed low-mode forcing with a prescribed homogeneous H^-1 norm.
inline SpectralVectorField low_mode_forcing(const GridPtr& grid, std::uint64_t seed,
                                            double hminus1_target, int mode_limit = 2) {
    RandomFieldSpec spec;
    spec.seed = seed;
    spec.spectral_decay = 0.0;
    spec.mode_limit = mode_limit;
    spec.target_h1dot = 0.0;
    SpectralVectorField f = random_solenoidal_field(grid, spec);
    const double h = hminus1_norm(f);
    if (h == 0.0) throw std::invalid_argument("low_mode_forcing: empty mode set");
    f *= hminus1_target / h;
    return f;
}

/// n independent seeded fields (frame raw material).
inline std::vector<SpectralVectorField> random_fields(const GridPtr& grid, std::size_t n,
                                                      std::uint64_t seed, double decay = 1.0) {
    std::vector<SpectralVectorField> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        RandomFieldSpec spec;
        spec.seed = seed + 0x9e3779b97f4a7c15ull * (i + 1);
        spec.spectral_decay = decay;
        spec.target_h1dot = 1.0;
        out.push_back(random_solenoidal_field(grid, spec));
    }
    return out;
}

}  // namespace nsv
