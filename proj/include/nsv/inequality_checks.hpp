#pragma once

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "nsv/constants.hpp"
#include "nsv/errors.hpp"
#include "nsv/spectral_ops.hpp"
#include "nsv/tangent.hpp"

namespace nsv::lab {

/// Physical samples of rho(x) = sum_i |v_i(x)|^2 for a tangent frame.
inline std::vector<double> rho_field(const TangentFrame& frame, SpectralWorkspace& ws) {
    if (frame.empty()) throw std::invalid_argument("rho_field: empty frame");
    const WaveGrid& g = frame[0].grid();
    std::vector<double> rho(g.size(), 0.0);
    for (std::size_t i = 0; i < frame.size(); ++i) {
        physical_components(frame[i], ws.phys_a, ws.scratch);
        for (std::size_t x = 0; x < g.size(); ++x) {
            double m2 = 0.0;
            for (int c = 0; c < 4; ++c) {
                const double v = ws.phys_a[static_cast<std::size_t>(c)][x];
                m2 += v * v;
            }
            rho[x] += m2;
        }
    }
    return rho;
}

inline double l2_grid_norm(const WaveGrid& g, const std::vector<double>& f) {
    double s = 0.0;
    for (double x : f) s += x * x;
    return std::sqrt(g.volume() / static_cast<double>(g.size()) * s);
}

struct RhoBoundReport {
    int n = 0;
    double rho_l2 = 0.0;
    double bound = 0.0;  // (d L)^{2/d} * d/(d-2) * n^{(d-2)/d}, evaluated at d = 4
    double ratio = 0.0;
    bool respected = false;
};

/// Collective Sobolev bound on the density of an orthonormal frame:
///     ||rho||_{L^{d/(d-2)}} <= (d L)^{2/d} (d/(d-2)) n^{(d-2)/d},
/// which at d = 4 reads ||rho||_{L2} <= 2 sqrt(4 L) sqrt(n) ~ 0.553 sqrt(n).
inline RhoBoundReport rho_bound_check(const TangentFrame& frame, const ConstantTable& table,
                                      SpectralWorkspace& ws) {
    const double gram = max_gram_deviation(frame);
    if (gram > 1e-8)
        throw std::invalid_argument("rho_bound_check: frame is not orthonormal (Gram deviation " +
                                    std::to_string(gram) + ")");
    if (table.L_upper <= 0.0)
        throw std::invalid_argument("rho_bound_check: constant table has no pinned L");
    const WaveGrid& g = frame[0].grid();
    RhoBoundReport r;
    r.n = static_cast<int>(frame.size());
    const std::vector<double> rho = rho_field(frame, ws);
    r.rho_l2 = l2_grid_norm(g, rho);
    const double d = static_cast<double>(table.d);
    r.bound = std::pow(d * table.L_upper, 2.0 / d) * d / (d - 2.0) *
              std::pow(static_cast<double>(r.n), (d - 2.0) / d);
    r.ratio = r.rho_l2 / r.bound;
    r.respected = r.rho_l2 <= r.bound;
    return r;
}

/// (A v, v) / (|A|_F |v|^2) for a trace-free matrix.  The sharp supremum of
/// this ratio is c_d = sqrt((d-1)/d); with the operator norm in place of
/// Frobenius the same ratio can reach 1 (take A = diag(1,-1,0,0) and v the
/// first axis), which is why the aggregate check below never uses the
/// pointwise operator-norm form as a proof step.
inline double trace_free_form_ratio(const Eigen::Matrix4d& a, const Eigen::Vector4d& v) {
    const double fro = a.norm();
    if (fro == 0.0 || v.squaredNorm() == 0.0)
        throw std::invalid_argument("trace_free_form_ratio: zero matrix or vector");
    if (std::abs(a.trace()) > 1e-12 * fro)
        throw std::invalid_argument("trace_free_form_ratio: matrix is not trace-free");
    return v.dot(a * v) / (fro * v.squaredNorm());
}

struct AggregateC4Report {
    double lhs = 0.0;            // |sum_i ((v_i, grad) u, v_i)|
    double mid_frobenius = 0.0;  // c_4 int rho |grad u|_F
    double mid_spectral = 0.0;   // c_4 int rho |grad u|_op (diagnostic only)
    double rhs = 0.0;            // c_4 ||grad u||_{L2} ||rho||_{L2}
    bool chain_frobenius_ok = false;
    bool chain_spectral_ok = false;  // may legitimately fail; reported, not asserted
};

/// The aggregate advective bound behind the trace estimate:
///     |sum_i ((v_i, grad) u, v_i)| <= c_4 int rho |grad u|_F
///                                  <= c_4 ||grad u||_{L2} ||rho||_{L2}.
/// Pointwise, (A w, w) <= c_4 |A|_F |w|^2 holds for every trace-free A (the
/// gradient of a divergence-free field is trace-free at each point), so the
/// first inequality is a true pointwise majorization and the second is
/// Cauchy-Schwarz.  The same chain with the operator norm in the middle is
/// evaluated for comparison because the extremal-direction counterexample
/// above makes it unprovable pointwise; both outcomes are reported.
inline AggregateC4Report aggregate_c4_check(const SpectralVectorField& u, const TangentFrame& frame,
                                            const ConstantTable& table, SpectralWorkspace& ws) {
    if (frame.empty()) throw std::invalid_argument("aggregate_c4_check: empty frame");
    u.require_same_grid(frame[0]);
    const WaveGrid& g = u.grid();
    const std::size_t npts = g.size();

    std::array<std::array<std::vector<double>, 4>, 4> grad_u;
    gradient_physical(u, grad_u, ws);

    // lhs: quadrature of sum_i v_i . (grad u) v_i, accumulated per frame member
    double lhs_sum = 0.0;
    for (std::size_t i = 0; i < frame.size(); ++i) {
        physical_components(frame[i], ws.phys_a, ws.scratch);
        for (std::size_t x = 0; x < npts; ++x) {
            double acc = 0.0;
            for (int c = 0; c < 4; ++c) {
                double adv = 0.0;
                for (int j = 0; j < 4; ++j)
                    adv += ws.phys_a[static_cast<std::size_t>(j)][x] *
                           grad_u[static_cast<std::size_t>(c)][static_cast<std::size_t>(j)][x];
                acc += adv * ws.phys_a[static_cast<std::size_t>(c)][x];
            }
            lhs_sum += acc;
        }
    }
    const double quad = g.volume() / static_cast<double>(npts);

    const std::vector<double> rho = rho_field(frame, ws);

    // pointwise Frobenius and operator norms of grad u
    double mid_f = 0.0, mid_s = 0.0, grad_l2_sq = 0.0;
    Eigen::Matrix4d a;
    for (std::size_t x = 0; x < npts; ++x) {
        double fro_sq = 0.0;
        for (int c = 0; c < 4; ++c)
            for (int j = 0; j < 4; ++j) {
                const double e = grad_u[static_cast<std::size_t>(c)][static_cast<std::size_t>(j)][x];
                a(c, j) = e;
                fro_sq += e * e;
            }
        grad_l2_sq += fro_sq;
        const double op = std::sqrt(
            Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d>(a.transpose() * a, Eigen::EigenvaluesOnly)
                .eigenvalues()
                .maxCoeff());
        mid_f += rho[x] * std::sqrt(fro_sq);
        mid_s += rho[x] * op;
    }

    AggregateC4Report r;
    r.lhs = std::abs(quad * lhs_sum);
    r.mid_frobenius = table.c_d * quad * mid_f;
    r.mid_spectral = table.c_d * quad * mid_s;
    r.rhs = table.c_d * std::sqrt(quad * grad_l2_sq) * l2_grid_norm(g, rho);
    const double slack = 1e-10 * std::max(1.0, r.rhs);
    r.chain_frobenius_ok = r.lhs <= r.mid_frobenius + slack && r.mid_frobenius <= r.rhs + slack;
    r.chain_spectral_ok = r.lhs <= r.mid_spectral + slack;
    return r;
}

}  // namespace nsv::lab
