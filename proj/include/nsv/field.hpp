#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <stdexcept>
#include <utility>
#include <vector>

#include "nsv/errors.hpp"
#include "nsv/wave_grid.hpp"

namespace nsv {

using Complex = std::complex<double>;

/// Zero-mean vector field on the 4-torus, stored as Fourier coefficients of
/// the series u(x) = sum_k uhat(k) exp(i k.x), one coefficient array per
/// component in the grid's site order.
///
/// The `solenoidal` flag is bookkeeping, not a measurement: projection sets
/// it, generators that construct divergence-free data set it, and linear
/// operations preserve it when every operand carries it.  Routines that
/// require divergence-free input check the flag and refuse otherwise, so a
/// field of unknown provenance has to go through leray_project first.
class SpectralVectorField {
public:
    SpectralVectorField() = default;

    explicit SpectralVectorField(GridPtr grid) : grid_(std::move(grid)) {
        for (auto& c : comp_) c.assign(grid_->size(), Complex(0.0, 0.0));
    }

    bool empty() const noexcept { return !grid_; }
    const WaveGrid& grid() const { return *grid_; }
    const GridPtr& grid_ptr() const { return grid_; }

    std::vector<Complex>& component(int c) { return comp_[static_cast<std::size_t>(c)]; }
    const std::vector<Complex>& component(int c) const { return comp_[static_cast<std::size_t>(c)]; }

    Complex& at(int c, std::size_t site) { return comp_[static_cast<std::size_t>(c)][site]; }
    const Complex& at(int c, std::size_t site) const { return comp_[static_cast<std::size_t>(c)][site]; }

    bool solenoidal() const noexcept { return solenoidal_; }
    void set_solenoidal(bool v) noexcept { solenoidal_ = v; }

    void fill_zero() {
        for (auto& c : comp_) c.assign(c.size(), Complex(0.0, 0.0));
    }

    /// Remove the spatial mean (the k = 0 coefficient).
    void zero_mean() {
        for (auto& c : comp_) c[0] = Complex(0.0, 0.0);
    }

    double mean_magnitude() const {
        double s = 0.0;
        for (const auto& c : comp_) s += std::norm(c[0]);
        return std::sqrt(s);
    }

    /// Zero every coefficient outside the dealias cube.
    void apply_dealias_mask() {
        for (auto& c : comp_)
            for (std::size_t s = 0; s < c.size(); ++s)
                if (!grid_->keep(s)) c[s] = Complex(0.0, 0.0);
    }

    double max_abs() const {
        double m = 0.0;
        for (const auto& c : comp_)
            for (const auto& z : c) m = std::max(m, std::abs(z));
        return m;
    }

    /// Largest violation of uhat(-k) = conj(uhat(k)), absolute.
    double hermitian_asymmetry() const {
        double worst = 0.0;
        for (std::size_t s = 0; s < grid_->size(); ++s) {
            const std::size_t cs = grid_->conjugate_site(s);
            for (int c = 0; c < 4; ++c)
                worst = std::max(worst, std::abs(at(c, s) - std::conj(at(c, cs))));
        }
        return worst;
    }

    /// max over modes of |m . uhat| / (|m| |uhat|); 0 for a divergence-free
    /// field up to roundoff.
    double max_divergence_ratio() const {
        double worst = 0.0;
        for (std::size_t s = 1; s < grid_->size(); ++s) {
            const auto& m = grid_->modes(s);
            Complex dot(0.0, 0.0);
            double mag2 = 0.0;
            for (int c = 0; c < 4; ++c) {
                dot += static_cast<double>(m[c]) * at(c, s);
                mag2 += std::norm(at(c, s));
            }
            if (mag2 == 0.0) continue;
            const double mlen = std::sqrt(static_cast<double>(grid_->mode_sq(s)));
            worst = std::max(worst, std::abs(dot) / (mlen * std::sqrt(mag2)));
        }
        return worst;
    }

    SpectralVectorField& operator+=(const SpectralVectorField& o) {
        require_same_grid(o);
        for (int c = 0; c < 4; ++c)
            for (std::size_t s = 0; s < comp_[0].size(); ++s) comp_[c][s] += o.comp_[c][s];
        solenoidal_ = solenoidal_ && o.solenoidal_;
        return *this;
    }

    SpectralVectorField& operator-=(const SpectralVectorField& o) {
        require_same_grid(o);
        for (int c = 0; c < 4; ++c)
            for (std::size_t s = 0; s < comp_[0].size(); ++s) comp_[c][s] -= o.comp_[c][s];
        solenoidal_ = solenoidal_ && o.solenoidal_;
        return *this;
    }

    SpectralVectorField& operator*=(double a) {
        for (auto& c : comp_)
            for (auto& z : c) z *= a;
        return *this;
    }

    void require_same_grid(const SpectralVectorField& o) const {
        if (empty() || o.empty() || !grid_->same_layout(o.grid()))
            throw std::invalid_argument("SpectralVectorField: grid layout mismatch");
    }

private:
    GridPtr grid_;
    std::array<std::vector<Complex>, 4> comp_;
    bool solenoidal_ = false;
};

/// y += a * x
inline void add_scaled(SpectralVectorField& y, double a, const SpectralVectorField& x) {
    y.require_same_grid(x);
    for (int c = 0; c < 4; ++c) {
        auto& yc = y.component(c);
        const auto& xc = x.component(c);
        for (std::size_t s = 0; s < yc.size(); ++s) yc[s] += a * xc[s];
    }
    y.set_solenoidal(y.solenoidal() && x.solenoidal());
}

inline SpectralVectorField operator+(SpectralVectorField a, const SpectralVectorField& b) {
    a += b;
    return a;
}

inline SpectralVectorField operator-(SpectralVectorField a, const SpectralVectorField& b) {
    a -= b;
    return a;
}

inline SpectralVectorField operator*(double s, SpectralVectorField a) {
    a *= s;
    return a;
}

}  // namespace nsv
