#include <catch2/catch_amalgamated.hpp>

#include <array>
#include <cmath>
#include <complex>
#include <map>
#include <vector>

#include "nsv/random_fields.hpp"
#include "nsv/spectral_ops.hpp"

using namespace nsv;

namespace {

SpectralVectorField make_random(const GridPtr& g, std::uint64_t seed, double decay = 1.0,
                                double h1 = 1.0, int limit = 0) {
    RandomFieldSpec spec;
    spec.seed = seed;
    spec.spectral_decay = decay;
    spec.target_h1dot = h1;
    spec.mode_limit = limit;
    return random_solenoidal_field(g, spec);
}

/// Brute-force dealiased advective term: for every retained output mode k,
///     Nhat_i(k) = i k_j sum_{p + q = k} uhat_i(p) uhat_j(q),
/// summing directly over retained mode pairs.  No FFT anywhere; this is the
/// independent oracle for the transform-based kernel.
SpectralVectorField convolution_oracle(const SpectralVectorField& u) {
    const GridPtr& grid = u.grid_ptr();
    const WaveGrid& g = *grid;
    std::vector<std::size_t> support;
    for (std::size_t s = 1; s < g.size(); ++s)
        if (g.keep(s)) support.push_back(s);

    // convolution of every component pair, accumulated straight into the
    // divergence so we only store the output field
    SpectralVectorField out(grid);
    for (std::size_t sp : support) {
        const auto& mp = g.modes(sp);
        for (std::size_t sq : support) {
            const auto& mq = g.modes(sq);
            const std::array<int, 4> mk = {mp[0] + mq[0], mp[1] + mq[1], mp[2] + mq[2],
                                           mp[3] + mq[3]};
            if (std::abs(mk[0]) > g.max_retained_mode() || std::abs(mk[1]) > g.max_retained_mode() ||
                std::abs(mk[2]) > g.max_retained_mode() || std::abs(mk[3]) > g.max_retained_mode())
                continue;
            const std::size_t sk = g.site_of(mk);
            if (sk == 0) continue;
            for (int i = 0; i < 4; ++i) {
                Complex acc(0.0, 0.0);
                for (int j = 0; j < 4; ++j) {
                    const double kj = g.k_scale() * mk[j];
                    acc += Complex(0.0, kj) * u.at(i, sp) * u.at(j, sq);
                }
                out.at(i, sk) += acc;
            }
        }
    }
    return out;
}

}  // namespace

TEST_CASE("transform round trip") {
    const auto g = make_grid(8);
    const SpectralVectorField u = make_random(g, 10, 0.5);
    const auto& eng = FftEngine::get(8);
    std::vector<Complex> phys(g->size()), back(g->size());
    for (int c = 0; c < 4; ++c) {
        eng.to_physical(u.component(c).data(), phys.data());
        eng.to_coefficients(phys.data(), back.data());
        double worst = 0.0;
        for (std::size_t s = 0; s < g->size(); ++s) worst = std::max(worst, std::abs(back[s] - u.component(c)[s]));
        CHECK(worst <= 1e-14);
    }
}

TEST_CASE("Parseval: spectral norms equal physical quadrature") {
    const auto g = make_grid(8);
    SpectralWorkspace ws(*g);
    for (std::uint64_t seed : {11u, 12u, 13u}) {
        const SpectralVectorField u = make_random(g, seed, 1.0, 2.0);
        physical_components(u, ws.phys_a, ws.scratch);
        double s = 0.0;
        for (std::size_t x = 0; x < g->size(); ++x)
            for (int c = 0; c < 4; ++c) s += ws.phys_a[c][x] * ws.phys_a[c][x];
        const double quad = std::sqrt(g->volume() / static_cast<double>(g->size()) * s);
        CHECK(quad == Catch::Approx(l2_norm(u)).epsilon(1e-12));
    }
}

TEST_CASE("gradient norm against high-order finite differences") {
    // low-mode field on a fine grid: the 8th-order centered stencil resolves
    // |m| <= 1 modes to ~3e-7 relative, an independent check of both the
    // spectral derivative and the h1dot quadrature
    const auto g = make_grid(16);
    const SpectralVectorField u = make_random(g, 21, 0.0, 1.0, /*limit=*/1);
    SpectralWorkspace ws(*g);
    physical_components(u, ws.phys_a, ws.scratch);

    const int n = g->n();
    const double h = g->box_length() / n;
    const double c1 = 4.0 / 5.0, c2 = -1.0 / 5.0, c3 = 4.0 / 105.0, c4 = -1.0 / 280.0;
    auto at = [&](int c, int i0, int i1, int i2, int i3) {
        auto w = [n](int i) { return ((i % n) + n) % n; };
        const std::size_t site =
            ((static_cast<std::size_t>(w(i0)) * n + w(i1)) * n + w(i2)) * n + w(i3);
        return ws.phys_a[static_cast<std::size_t>(c)][site];
    };
    double fd_sq = 0.0;
    for (int i0 = 0; i0 < n; ++i0)
        for (int i1 = 0; i1 < n; ++i1)
            for (int i2 = 0; i2 < n; ++i2)
                for (int i3 = 0; i3 < n; ++i3)
                    for (int c = 0; c < 4; ++c) {
                        const std::array<int, 4> i = {i0, i1, i2, i3};
                        for (int j = 0; j < 4; ++j) {
                            auto shift = [&](int d) {
                                std::array<int, 4> s = i;
                                s[static_cast<std::size_t>(j)] += d;
                                return at(c, s[0], s[1], s[2], s[3]);
                            };
                            const double d = (c1 * (shift(1) - shift(-1)) + c2 * (shift(2) - shift(-2)) +
                                              c3 * (shift(3) - shift(-3)) + c4 * (shift(4) - shift(-4))) /
                                             h;
                            fd_sq += d * d;
                        }
                    }
    const double fd_norm = std::sqrt(g->volume() / static_cast<double>(g->size()) * fd_sq);
    CHECK(fd_norm == Catch::Approx(h1dot_norm(u)).epsilon(1e-6));
}

TEST_CASE("gradient_physical matches an analytic single-mode field") {
    const auto g = make_grid(8);
    // u = sin(x0) e2
    SpectralVectorField u(g);
    u.at(2, g->site_of({1, 0, 0, 0})) = Complex(0.0, -0.5);
    u.at(2, g->site_of({-1, 0, 0, 0})) = Complex(0.0, 0.5);
    SpectralWorkspace ws(*g);
    std::array<std::array<std::vector<double>, 4>, 4> grad;
    gradient_physical(u, grad, ws);
    const int n = g->n();
    const double h = g->box_length() / n;
    double worst = 0.0;
    for (int i0 = 0; i0 < n; ++i0) {
        const double x0 = h * i0;
        // only d_0 u_2 = cos(x0) is nonzero
        for (int c = 0; c < 4; ++c)
            for (int j = 0; j < 4; ++j) {
                const double expect = (c == 2 && j == 0) ? std::cos(x0) : 0.0;
                const std::size_t site = static_cast<std::size_t>(i0) * n * n * n;
                worst = std::max(worst, std::abs(grad[c][j][site] - expect));
            }
    }
    CHECK(worst <= 1e-13);
}

TEST_CASE("projection is idempotent and annihilates gradients") {
    const auto g = make_grid(8);
    for (std::uint64_t seed = 30; seed < 40; ++seed) {
        SpectralVectorField raw(g);
        Rng rng(seed);
        for (std::size_t s = 1; s < g->size(); ++s) {
            if (!g->keep(s) || !g->is_canonical(s)) continue;
            for (int c = 0; c < 4; ++c) {
                const Complex z(rng.normal(), rng.normal());
                raw.at(c, s) = z;
                raw.at(c, g->conjugate_site(s)) = std::conj(z);
            }
        }
        SpectralVectorField p = leray_project(raw);
        CHECK(p.max_divergence_ratio() <= 1e-12);
        CHECK(p.mean_magnitude() == 0.0);
        SpectralVectorField pp = leray_project(p);
        pp -= p;
        CHECK(h1dot_norm(pp) <= 1e-12 * std::max(1.0, h1dot_norm(p)));

        // gradient field from a random scalar potential
        SpectralVectorField gphi(g);
        for (std::size_t s = 1; s < g->size(); ++s) {
            if (!g->keep(s) || !g->is_canonical(s)) continue;
            const Complex phi(rng.normal(), rng.normal());
            for (int c = 0; c < 4; ++c) {
                gphi.at(c, s) = Complex(0.0, g->k_scale() * g->modes(s)[c]) * phi;
                gphi.at(c, g->conjugate_site(s)) = std::conj(gphi.at(c, s));
            }
        }
        const double before = h1dot_norm(gphi);
        CHECK(h1dot_norm(leray_project(gphi)) <= 1e-12 * before);
    }
}

TEST_CASE("projection plus complement reconstructs the field") {
    const auto g = make_grid(8);
    SpectralVectorField raw = make_random(g, 55, 1.0, 1.0);
    // perturb away from the divergence-free subspace
    raw.at(0, g->site_of({1, 1, 0, 0})) += Complex(0.3, -0.2);
    raw.at(0, g->site_of({-1, -1, 0, 0})) += Complex(0.3, 0.2);
    raw.zero_mean();
    SpectralVectorField p = raw;
    leray_project_inplace(p);
    // complement is a pure gradient per mode: m x (m . uhat)/|m|^2
    double worst = 0.0;
    for (std::size_t s = 1; s < g->size(); ++s) {
        const auto& m = g->modes(s);
        Complex dot(0.0, 0.0);
        for (int c = 0; c < 4; ++c) dot += static_cast<double>(m[c]) * raw.at(c, s);
        dot /= static_cast<double>(g->mode_sq(s));
        for (int c = 0; c < 4; ++c) {
            const Complex rebuilt = p.at(c, s) + static_cast<double>(m[c]) * dot;
            worst = std::max(worst, std::abs(rebuilt - raw.at(c, s)));
        }
    }
    CHECK(worst <= 1e-13);
}

TEST_CASE("h1dot and hminus1 are dual through the L2 pairing") {
    const auto g = make_grid(8);
    for (std::uint64_t seed = 60; seed < 80; ++seed) {
        const SpectralVectorField a = make_random(g, seed, 1.5, 0.7);
        const SpectralVectorField b = make_random(g, seed + 1000, 0.5, 2.0);
        CHECK(std::abs(l2_inner(a, b)) <= hminus1_norm(a) * h1dot_norm(b) * (1.0 + 1e-12));
    }
}

TEST_CASE("hminus1 norm of a hand-built two-mode field") {
    const auto g = make_grid(8);
    SpectralVectorField f(g);
    // amplitude 2 on |m|^2 = 1 pair and amplitude 1 on |m|^2 = 4 pair
    f.at(1, g->site_of({1, 0, 0, 0})) = Complex(2.0, 0.0);
    f.at(1, g->site_of({-1, 0, 0, 0})) = Complex(2.0, 0.0);
    f.at(2, g->site_of({0, 0, 2, 0})) = Complex(0.0, 1.0);
    f.at(2, g->site_of({0, 0, -2, 0})) = Complex(0.0, -1.0);
    const double expected = std::sqrt(g->volume() * (2.0 * 4.0 / 1.0 + 2.0 * 1.0 / 4.0));
    CHECK(hminus1_norm(f) == Catch::Approx(expected).epsilon(1e-13));
    f.at(0, 0) = Complex(1.0, 0.0);  // mean mode has no H^-1 pairing
    CHECK_THROWS_AS(hminus1_norm(f), std::invalid_argument);
}

TEST_CASE("inverse laplacian inverts the gradient pairing") {
    const auto g = make_grid(8);
    const SpectralVectorField w = make_random(g, 91, 1.0, 1.0);
    const SpectralVectorField v = make_random(g, 92, 2.0, 0.5);
    SpectralVectorField lw = w;
    apply_inverse_laplacian(lw);
    CHECK(h1dot_inner(lw, v) == Catch::Approx(l2_inner(w, v)).epsilon(1e-12));
}

TEST_CASE("advective kernel against the direct convolution oracle") {
    const auto g = make_grid(8);
    SpectralWorkspace ws(*g);
    for (std::uint64_t seed : {101u, 102u}) {
        const SpectralVectorField u = make_random(g, seed, 1.0, 1.5);
        const SpectralVectorField fast = nonlinear_term(u, ws);
        const SpectralVectorField slow = convolution_oracle(u);
        double scale = 0.0, worst = 0.0;
        for (int c = 0; c < 4; ++c)
            for (std::size_t s = 0; s < g->size(); ++s) {
                scale = std::max(scale, std::abs(slow.at(c, s)));
                worst = std::max(worst, std::abs(slow.at(c, s) - fast.at(c, s)));
            }
        REQUIRE(scale > 0.0);
        CHECK(worst <= 1e-12 * scale);
    }
}

TEST_CASE("advective term is energy neutral, mean free, masked, Hermitian") {
    const auto g = make_grid(8);
    SpectralWorkspace ws(*g);
    for (std::uint64_t seed = 120; seed < 140; ++seed) {
        const SpectralVectorField u = make_random(g, seed, 1.0, 1.0);
        const SpectralVectorField nl = nonlinear_term(u, ws);
        const double cubic_scale = std::max(1.0, h1dot_norm_sq(u) * l2_norm(u));
        CHECK(std::abs(l2_inner(nl, u)) <= 1e-10 * cubic_scale);
        CHECK(nl.mean_magnitude() == 0.0);
        CHECK(nl.hermitian_asymmetry() <= 1e-12);
        for (std::size_t s = 0; s < g->size(); ++s)
            if (!g->keep(s))
                for (int c = 0; c < 4; ++c) REQUIRE(nl.at(c, s) == Complex(0.0, 0.0));
    }
}

TEST_CASE("advective term rejects unprojected input") {
    const auto g = make_grid(8);
    SpectralVectorField u(g);
    u.at(0, g->site_of({1, 0, 0, 0})) = Complex(1.0, 0.0);  // not marked divergence-free
    CHECK_THROWS_AS(nonlinear_term(u), std::invalid_argument);
}

TEST_CASE("symmetric tensor divergence: polarization and symmetry") {
    const auto g = make_grid(8);
    SpectralWorkspace ws(*g);
    const SpectralVectorField a = make_random(g, 150, 1.0, 1.0);
    const SpectralVectorField b = make_random(g, 151, 1.0, 1.0);

    std::array<std::vector<double>, 4> ap, bp;
    physical_components(a, ap, ws.scratch);
    physical_components(b, bp, ws.scratch);

    const SpectralVectorField dab = div_symmetric_tensor(g, ap, bp, ws);
    const SpectralVectorField dba = div_symmetric_tensor(g, bp, ap, ws);
    const SpectralVectorField daa = div_self_tensor(g, ap, ws);

    // symmetry in the two arguments
    double worst = 0.0;
    for (int c = 0; c < 4; ++c)
        for (std::size_t s = 0; s < g->size(); ++s)
            worst = std::max(worst, std::abs(dab.at(c, s) - dba.at(c, s)));
    CHECK(worst <= 1e-13);

    // div(a x a + a x a) = 2 div(a x a)
    worst = 0.0;
    double scale = 0.0;
    SpectralWorkspace ws2(*g);
    const SpectralVectorField daa2 = div_symmetric_tensor(g, ap, ap, ws2);
    for (int c = 0; c < 4; ++c)
        for (std::size_t s = 0; s < g->size(); ++s) {
            scale = std::max(scale, std::abs(daa.at(c, s)));
            worst = std::max(worst, std::abs(daa2.at(c, s) - 2.0 * daa.at(c, s)));
        }
    CHECK(worst <= 1e-12 * scale);
}

TEST_CASE("l2 pairing equals physical quadrature for masked fields") {
    const auto g = make_grid(8);
    SpectralWorkspace ws(*g);
    const SpectralVectorField a = make_random(g, 160, 1.0, 1.0);
    const SpectralVectorField b = make_random(g, 161, 2.0, 3.0);
    std::array<std::vector<double>, 4> ap, bp;
    physical_components(a, ap, ws.scratch);
    physical_components(b, bp, ws.scratch);
    double s = 0.0;
    for (std::size_t x = 0; x < g->size(); ++x)
        for (int c = 0; c < 4; ++c) s += ap[c][x] * bp[c][x];
    const double quad = g->volume() / static_cast<double>(g->size()) * s;
    CHECK(quad == Catch::Approx(l2_inner(a, b)).epsilon(1e-12));
}

TEST_CASE("grid quadrature integrates constants exactly") {
    const auto g = make_grid(8);
    std::vector<double> ones(g->size(), 1.0);
    CHECK(integrate(*g, ones) == Catch::Approx(g->volume()).epsilon(1e-15));
}
