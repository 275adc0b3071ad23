#pragma once

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "nsv/field.hpp"
#include "nsv/solver.hpp"
#include "nsv/spectral_ops.hpp"
#include "nsv/tangent.hpp"
#include "nsv/wave_grid.hpp"

namespace nsv {

/// Explicit orthonormal basis (in the gradient inner product) of the real
/// divergence-free zero-mean subspace of the dealiased lattice.
///
/// Every retained mode pair {k, -k} is visited once through its canonical
/// representative; three orthonormal directions span the plane
/// perpendicular to k in R^4, and each direction carries a cosine and a
/// sine field.  With gamma = sqrt(2 / (vol |k|^2)) the fields
///     cos: vhat(k) =  gamma/2 a,  vhat(-k) = gamma/2 a
///     sin: vhat(k) = -i gamma/2 a, vhat(-k) = i gamma/2 a
/// have unit gradient norm, so coordinates are plain h1dot pairings and can
/// be read off a single coefficient.
class ModalBasis {
public:
    explicit ModalBasis(GridPtr grid) : grid_(std::move(grid)) {
        const WaveGrid& g = *grid_;
        if (g.n() > 8)
            throw std::invalid_argument(
                "ModalBasis: dense enumeration is limited to n_per_dim <= 8");
        for (std::size_t s = 1; s < g.size(); ++s) {
            if (!g.keep(s) || !g.is_canonical(s)) continue;
            const auto tangents = tangent_triad(g.modes(s));
            const double gamma = std::sqrt(2.0 / (g.volume() * g.k_sq(s)));
            for (const auto& dir : tangents) {
                entries_.push_back({s, g.conjugate_site(s), dir, false, gamma, g.k_sq(s)});
                entries_.push_back({s, g.conjugate_site(s), dir, true, gamma, g.k_sq(s)});
            }
        }
    }

    std::size_t dim() const noexcept { return entries_.size(); }
    const GridPtr& grid_ptr() const noexcept { return grid_; }

    SpectralVectorField field(std::size_t p) const {
        const Entry& e = entries_.at(p);
        SpectralVectorField v(grid_);
        const double half = 0.5 * e.gamma;
        for (int c = 0; c < 4; ++c) {
            const double a = e.dir[static_cast<std::size_t>(c)];
            if (e.is_sin) {
                v.at(c, e.site) = Complex(0.0, -half * a);
                v.at(c, e.csite) = Complex(0.0, half * a);
            } else {
                v.at(c, e.site) = Complex(half * a, 0.0);
                v.at(c, e.csite) = Complex(half * a, 0.0);
            }
        }
        v.set_solenoidal(true);
        return v;
    }

    /// h1dot coordinates of a Hermitian divergence-free field.
    Eigen::VectorXd coordinates(const SpectralVectorField& v) const {
        Eigen::VectorXd x(static_cast<Eigen::Index>(entries_.size()));
        const double vol = grid_->volume();
        for (std::size_t p = 0; p < entries_.size(); ++p) {
            const Entry& e = entries_[p];
            double acc = 0.0;
            for (int c = 0; c < 4; ++c) {
                const Complex z = v.at(c, e.site);
                const double a = e.dir[static_cast<std::size_t>(c)];
                acc += a * (e.is_sin ? -z.imag() : z.real());
            }
            x[static_cast<Eigen::Index>(p)] = vol * e.ksq * e.gamma * acc;
        }
        return x;
    }

private:
    struct Entry {
        std::size_t site;
        std::size_t csite;
        std::array<double, 4> dir;
        bool is_sin;
        double gamma;
        double ksq;
    };

    /// Deterministic orthonormal triad perpendicular to an integer mode.
    static std::array<std::array<double, 4>, 3> tangent_triad(const std::array<int, 4>& m) {
        std::array<double, 4> k;
        double norm = 0.0;
        for (int j = 0; j < 4; ++j) {
            k[static_cast<std::size_t>(j)] = static_cast<double>(m[j]);
            norm += k[static_cast<std::size_t>(j)] * k[static_cast<std::size_t>(j)];
        }
        norm = std::sqrt(norm);
        for (auto& x : k) x /= norm;
        // drop the axis most aligned with k, orthogonalize the rest
        int drop = 0;
        for (int j = 1; j < 4; ++j)
            if (std::abs(k[static_cast<std::size_t>(j)]) > std::abs(k[static_cast<std::size_t>(drop)]))
                drop = j;
        std::array<std::array<double, 4>, 3> t{};
        int out = 0;
        for (int axis = 0; axis < 4; ++axis) {
            if (axis == drop) continue;
            std::array<double, 4> v{};
            v[static_cast<std::size_t>(axis)] = 1.0;
            double dk = 0.0;
            for (int j = 0; j < 4; ++j) dk += v[static_cast<std::size_t>(j)] * k[static_cast<std::size_t>(j)];
            for (int j = 0; j < 4; ++j) v[static_cast<std::size_t>(j)] -= dk * k[static_cast<std::size_t>(j)];
            for (int p = 0; p < out; ++p) {
                double dv = 0.0;
                for (int j = 0; j < 4; ++j)
                    dv += v[static_cast<std::size_t>(j)] * t[static_cast<std::size_t>(p)][static_cast<std::size_t>(j)];
                for (int j = 0; j < 4; ++j)
                    v[static_cast<std::size_t>(j)] -= dv * t[static_cast<std::size_t>(p)][static_cast<std::size_t>(j)];
            }
            double vn = 0.0;
            for (int j = 0; j < 4; ++j) vn += v[static_cast<std::size_t>(j)] * v[static_cast<std::size_t>(j)];
            vn = std::sqrt(vn);
            for (int j = 0; j < 4; ++j) t[static_cast<std::size_t>(out)][static_cast<std::size_t>(j)] =
                v[static_cast<std::size_t>(j)] / vn;
            ++out;
        }
        return t;
    }

    GridPtr grid_;
    std::vector<Entry> entries_;
};

/// Dense Jacobian of the right-hand side in the modal basis, by central
/// differences.  The vector field is quadratic in u, so the central
/// difference is exact up to roundoff for any step; eps only balances the
/// roundoff amplification.
inline Eigen::MatrixXd dense_jacobian(const SpectralVectorField& u, double nu,
                                      const ModalBasis& basis, double eps = 1e-3) {
    const GridPtr& grid = basis.grid_ptr();
    if (!u.grid().same_layout(*grid))
        throw std::invalid_argument("dense_jacobian: state grid does not match basis grid");
    SpectralVectorField g0(grid);  // forcing cancels in the difference; use zero
    g0.set_solenoidal(true);
    SpectralWorkspace ws(*grid);
    const Eigen::Index n = static_cast<Eigen::Index>(basis.dim());
    Eigen::MatrixXd jac(n, n);
    const double h = eps * std::max(1.0, h1dot_norm(u));
    for (Eigen::Index col = 0; col < n; ++col) {
        const SpectralVectorField w = basis.field(static_cast<std::size_t>(col));
        SpectralVectorField up = u;
        add_scaled(up, h, w);
        SpectralVectorField um = u;
        add_scaled(um, -h, w);
        SpectralVectorField diff = rhs(up, g0, nu, ws);
        diff -= rhs(um, g0, nu, ws);
        diff *= 1.0 / (2.0 * h);
        jac.col(col) = basis.coordinates(diff);
    }
    return jac;
}

/// Trace of the variational operator compressed to a frame, computed from
/// the dense Jacobian: sum_i c_i^T J c_i with c_i the frame coordinates.
/// Independent of the spectral assembly in trace_n; used to validate it.
inline double trace_oracle(const SpectralVectorField& u, const TangentFrame& frame, double nu) {
    if (frame.empty()) return 0.0;
    const ModalBasis basis(frame[0].grid_ptr());
    const Eigen::MatrixXd jac = dense_jacobian(u, nu, basis);
    double s = 0.0;
    for (std::size_t i = 0; i < frame.size(); ++i) {
        const Eigen::VectorXd c = basis.coordinates(frame[i]);
        s += c.dot(jac * c);
    }
    return s;
}

}  // namespace nsv
