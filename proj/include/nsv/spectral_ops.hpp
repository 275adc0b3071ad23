#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "nsv/errors.hpp"
#include "nsv/fft.hpp"
#include "nsv/field.hpp"
#include "nsv/wave_grid.hpp"

namespace nsv {

/// Reusable buffers for the pseudo-spectral kernels.  One workspace per
/// grid; passing one avoids re-allocating ~10 grid-sized arrays per call.
struct SpectralWorkspace {
    explicit SpectralWorkspace(const WaveGrid& g) {
        for (auto& v : phys_a) v.assign(g.size(), 0.0);
        for (auto& v : phys_b) v.assign(g.size(), 0.0);
        prod.assign(g.size(), 0.0);
        spec.assign(g.size(), Complex(0.0, 0.0));
        scratch.assign(g.size(), Complex(0.0, 0.0));
    }

    std::array<std::vector<double>, 4> phys_a;  // physical samples, field one
    std::array<std::vector<double>, 4> phys_b;  // physical samples, field two
    std::vector<double> prod;                   // pointwise products
    std::vector<Complex> spec;                  // transform output
    std::vector<Complex> scratch;               // transform input staging
};

/// Orthogonal projection onto divergence-free fields, mode by mode:
/// uhat(k) -> uhat(k) - m (m . uhat(k)) / |m|^2, with the k = 0 coefficient
/// set to zero (the phase space is mean-free).  The integer mode vector is
/// used directly; the 2*pi/L scale cancels.
inline void leray_project_inplace(SpectralVectorField& u) {
    const WaveGrid& g = u.grid();
    for (std::size_t s = 1; s < g.size(); ++s) {
        const auto& m = g.modes(s);
        const double msq = static_cast<double>(g.mode_sq(s));
        Complex dot(0.0, 0.0);
        for (int c = 0; c < 4; ++c) dot += static_cast<double>(m[c]) * u.at(c, s);
        dot /= msq;
        for (int c = 0; c < 4; ++c) u.at(c, s) -= static_cast<double>(m[c]) * dot;
    }
    u.zero_mean();
    u.set_solenoidal(true);
}

inline SpectralVectorField leray_project(SpectralVectorField u) {
    leray_project_inplace(u);
    return u;
}

/// L2 inner product (u, v) = vol * sum_k Re(uhat . conj(vhat)).
inline double l2_inner(const SpectralVectorField& u, const SpectralVectorField& v) {
    u.require_same_grid(v);
    const WaveGrid& g = u.grid();
    double s = 0.0;
    for (int c = 0; c < 4; ++c) {
        const auto& uc = u.component(c);
        const auto& vc = v.component(c);
        for (std::size_t i = 0; i < uc.size(); ++i)
            s += uc[i].real() * vc[i].real() + uc[i].imag() * vc[i].imag();
    }
    return g.volume() * s;
}

inline double l2_norm(const SpectralVectorField& u) { return std::sqrt(l2_inner(u, u)); }

/// Homogeneous H1 inner product (grad u, grad v) = vol * sum_k |k|^2 Re(uhat . conj(vhat)).
inline double h1dot_inner(const SpectralVectorField& u, const SpectralVectorField& v) {
    u.require_same_grid(v);
    const WaveGrid& g = u.grid();
    double s = 0.0;
    for (int c = 0; c < 4; ++c) {
        const auto& uc = u.component(c);
        const auto& vc = v.component(c);
        for (std::size_t i = 0; i < uc.size(); ++i)
            s += g.mode_sq(i) * (uc[i].real() * vc[i].real() + uc[i].imag() * vc[i].imag());
    }
    return g.volume() * g.k_scale() * g.k_scale() * s;
}

inline double h1dot_norm_sq(const SpectralVectorField& u) { return h1dot_inner(u, u); }
inline double h1dot_norm(const SpectralVectorField& u) { return std::sqrt(h1dot_norm_sq(u)); }

/// Homogeneous H^-1 norm, ||g||^2 = vol * sum_{k != 0} |ghat|^2 / |k|^2.
/// Requires a zero-mean field: the k = 0 coefficient has no H^-1 pairing.
inline double hminus1_norm(const SpectralVectorField& u) {
    const WaveGrid& g = u.grid();
    if (u.mean_magnitude() > 0.0)
        throw std::invalid_argument("hminus1_norm: field has a nonzero mean mode");
    double s = 0.0;
    for (int c = 0; c < 4; ++c) {
        const auto& uc = u.component(c);
        for (std::size_t i = 1; i < uc.size(); ++i) s += std::norm(uc[i]) / g.mode_sq(i);
    }
    return std::sqrt(g.volume() * s / (g.k_scale() * g.k_scale()));
}

/// (-Laplacian)^{-1} on zero-mean fields: uhat(k) /= |k|^2 for k != 0.
inline void apply_inverse_laplacian(SpectralVectorField& u) {
    const WaveGrid& g = u.grid();
    const double ks = g.k_scale() * g.k_scale();
    for (int c = 0; c < 4; ++c) {
        auto& uc = u.component(c);
        uc[0] = Complex(0.0, 0.0);
        for (std::size_t s = 1; s < uc.size(); ++s) uc[s] /= ks * g.mode_sq(s);
    }
}

/// Real physical samples of all four components.
inline void physical_components(const SpectralVectorField& u,
                                std::array<std::vector<double>, 4>& out,
                                std::vector<Complex>& scratch) {
    const WaveGrid& g = u.grid();
    for (int c = 0; c < 4; ++c) coeffs_to_real(g, u.component(c), out[static_cast<std::size_t>(c)], scratch);
}

/// Physical samples of the full gradient tensor; grad[c][j] holds the
/// samples of d_j u_c.  Sixteen inverse transforms.
inline void gradient_physical(const SpectralVectorField& u,
                              std::array<std::array<std::vector<double>, 4>, 4>& grad,
                              SpectralWorkspace& ws) {
    const WaveGrid& g = u.grid();
    for (int c = 0; c < 4; ++c) {
        const auto& uc = u.component(c);
        for (int j = 0; j < 4; ++j) {
            ws.spec.resize(g.size());
            for (std::size_t s = 0; s < g.size(); ++s) {
                const double kj = g.k_scale() * g.modes(s)[j];
                ws.spec[s] = Complex(0.0, kj) * uc[s];
            }
            coeffs_to_real(g, ws.spec, grad[static_cast<std::size_t>(c)][static_cast<std::size_t>(j)],
                           ws.scratch);
        }
    }
}

/// Grid quadrature of physical samples: vol / n^4 * sum.
inline double integrate(const WaveGrid& g, const std::vector<double>& f) {
    double s = 0.0;
    for (double x : f) s += x;
    return g.volume() / static_cast<double>(g.size()) * s;
}

/// div(a (x) b + b (x) a) assembled spectrally from physical samples of two
/// fields: component i gets i k_j (a_i b_j + a_j b_i)^.  Ten products and
/// transforms; the result is dealiased and mean-free, not projected.
inline SpectralVectorField div_symmetric_tensor(const GridPtr& grid,
                                                const std::array<std::vector<double>, 4>& a,
                                                const std::array<std::vector<double>, 4>& b,
                                                SpectralWorkspace& ws) {
    const WaveGrid& g = *grid;
    SpectralVectorField out(grid);
    for (int i = 0; i < 4; ++i) {
        for (int j = i; j < 4; ++j) {
            const auto& ai = a[static_cast<std::size_t>(i)];
            const auto& aj = a[static_cast<std::size_t>(j)];
            const auto& bi = b[static_cast<std::size_t>(i)];
            const auto& bj = b[static_cast<std::size_t>(j)];
            for (std::size_t s = 0; s < g.size(); ++s) ws.prod[s] = ai[s] * bj[s] + aj[s] * bi[s];
            real_to_coeffs(g, ws.prod, ws.spec, ws.scratch);
            auto& oi = out.component(i);
            for (std::size_t s = 0; s < g.size(); ++s) {
                const double kj = g.k_scale() * g.modes(s)[j];
                oi[s] += Complex(0.0, kj) * ws.spec[s];
            }
            if (i != j) {
                auto& oj = out.component(j);
                for (std::size_t s = 0; s < g.size(); ++s) {
                    const double ki = g.k_scale() * g.modes(s)[i];
                    oj[s] += Complex(0.0, ki) * ws.spec[s];
                }
            }
        }
    }
    out.apply_dealias_mask();
    out.zero_mean();
    return out;
}

/// div(a (x) a) from physical samples of a single field.
inline SpectralVectorField div_self_tensor(const GridPtr& grid,
                                           const std::array<std::vector<double>, 4>& a,
                                           SpectralWorkspace& ws) {
    const WaveGrid& g = *grid;
    SpectralVectorField out(grid);
    for (int i = 0; i < 4; ++i) {
        for (int j = i; j < 4; ++j) {
            const auto& ai = a[static_cast<std::size_t>(i)];
            const auto& aj = a[static_cast<std::size_t>(j)];
            for (std::size_t s = 0; s < g.size(); ++s) ws.prod[s] = ai[s] * aj[s];
            real_to_coeffs(g, ws.prod, ws.spec, ws.scratch);
            auto& oi = out.component(i);
            for (std::size_t s = 0; s < g.size(); ++s) {
                const double kj = g.k_scale() * g.modes(s)[j];
                oi[s] += Complex(0.0, kj) * ws.spec[s];
            }
            if (i != j) {
                auto& oj = out.component(j);
                for (std::size_t s = 0; s < g.size(); ++s) {
                    const double ki = g.k_scale() * g.modes(s)[i];
                    oj[s] += Complex(0.0, ki) * ws.spec[s];
                }
            }
        }
    }
    out.apply_dealias_mask();
    out.zero_mean();
    return out;
}

/// Dealiased advective term N(u) = div(u (x) u) of a divergence-free field.
/// For such u this equals (u . grad) u, and because the 2/3-style mask makes
/// the quadratic products alias-free, (N(u), u)_{L2} vanishes to roundoff in
/// the truncated system, exactly as in the continuous energy identity.
inline SpectralVectorField nonlinear_term(const SpectralVectorField& u, SpectralWorkspace& ws) {
    if (!u.solenoidal())
        throw std::invalid_argument("nonlinear_term: input field is not marked divergence-free");
    physical_components(u, ws.phys_a, ws.scratch);
    return div_self_tensor(u.grid_ptr(), ws.phys_a, ws);
}

inline SpectralVectorField nonlinear_term(const SpectralVectorField& u) {
    SpectralWorkspace ws(u.grid());
    return nonlinear_term(u, ws);
}

/// L4 norm of the pointwise Euclidean magnitude, by grid quadrature.
inline double l4_norm(const SpectralVectorField& u, SpectralWorkspace& ws) {
    const WaveGrid& g = u.grid();
    physical_components(u, ws.phys_a, ws.scratch);
    double s = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
        double m2 = 0.0;
        for (int c = 0; c < 4; ++c) {
            const double x = ws.phys_a[static_cast<std::size_t>(c)][i];
            m2 += x * x;
        }
        s += m2 * m2;
    }
    return std::pow(g.volume() / static_cast<double>(g.size()) * s, 0.25);
}

}  // namespace nsv
