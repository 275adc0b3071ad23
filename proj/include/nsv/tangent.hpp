#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "nsv/constants.hpp"
#include "nsv/errors.hpp"
#include "nsv/field.hpp"
#include "nsv/random_fields.hpp"
#include "nsv/solver.hpp"
#include "nsv/spectral_ops.hpp"

namespace nsv {

/// An ordered set of tangent fields on a common grid.  Orthonormality (in
/// the gradient inner product) is a state some routines require, not an
/// invariant the container enforces; use orthonormalize and
/// max_gram_deviation.
class TangentFrame {
public:
    TangentFrame() = default;
    explicit TangentFrame(std::vector<SpectralVectorField> fields) : fields_(std::move(fields)) {
        for (std::size_t i = 1; i < fields_.size(); ++i)
            if (!fields_[i].grid().same_layout(fields_[0].grid()))
                throw std::invalid_argument("TangentFrame: members live on different grids");
    }

    std::size_t size() const noexcept { return fields_.size(); }
    bool empty() const noexcept { return fields_.empty(); }
    SpectralVectorField& operator[](std::size_t i) { return fields_[i]; }
    const SpectralVectorField& operator[](std::size_t i) const { return fields_[i]; }
    auto begin() { return fields_.begin(); }
    auto end() { return fields_.end(); }
    auto begin() const { return fields_.begin(); }
    auto end() const { return fields_.end(); }

private:
    std::vector<SpectralVectorField> fields_;
};

namespace detail {

/// Equation-of-variations right-hand side about u, with the physical
/// samples of u precomputed:
///     L_u v = -nu v - (-Lap)^{-1} P div(u (x) v + v (x) u).
inline SpectralVectorField variational_from_physical(const GridPtr& grid,
                                                     const std::array<std::vector<double>, 4>& u_phys,
                                                     const SpectralVectorField& v, double nu,
                                                     SpectralWorkspace& ws) {
    physical_components(v, ws.phys_b, ws.scratch);
    SpectralVectorField d = div_symmetric_tensor(grid, u_phys, ws.phys_b, ws);
    const WaveGrid& gr = *grid;
    const double ks = gr.k_scale() * gr.k_scale();
    SpectralVectorField out(grid);
    for (std::size_t s = 1; s < gr.size(); ++s) {
        if (!gr.keep(s)) continue;
        const auto& m = gr.modes(s);
        const double msq = static_cast<double>(gr.mode_sq(s));
        Complex w[4];
        Complex dot(0.0, 0.0);
        for (int c = 0; c < 4; ++c) {
            w[c] = -d.at(c, s);
            dot += static_cast<double>(m[c]) * w[c];
        }
        dot /= msq;
        const double inv_ksq = 1.0 / (ks * msq);
        for (int c = 0; c < 4; ++c) {
            w[c] -= static_cast<double>(m[c]) * dot;
            out.at(c, s) = -nu * v.at(c, s) + inv_ksq * w[c];
        }
    }
    out.set_solenoidal(true);
    return out;
}

}  // namespace detail

/// L_u v for divergence-free u and v.
inline SpectralVectorField variational_rhs(const SpectralVectorField& u,
                                           const SpectralVectorField& v, double nu,
                                           SpectralWorkspace& ws) {
    u.require_same_grid(v);
    if (!u.solenoidal() || !v.solenoidal())
        throw std::invalid_argument("variational_rhs: fields must be divergence-free");
    std::array<std::vector<double>, 4> u_phys;
    physical_components(u, u_phys, ws.scratch);
    return detail::variational_from_physical(u.grid_ptr(), u_phys, v, nu, ws);
}

inline SpectralVectorField variational_rhs(const SpectralVectorField& u,
                                           const SpectralVectorField& v, double nu) {
    SpectralWorkspace ws(u.grid());
    return variational_rhs(u, v, nu, ws);
}

/// Modified Gram-Schmidt in the gradient inner product, run twice for
/// orthogonality at roundoff level.  A member whose residual norm collapses
/// below the rank floor triggers rank_deficiency_error naming its index.
inline TangentFrame orthonormalize(TangentFrame frame) {
    const std::size_t n = frame.size();
    for (int pass = 0; pass < 2; ++pass) {
        for (std::size_t i = 0; i < n; ++i) {
            const double before = h1dot_norm_sq(frame[i]);
            for (std::size_t j = 0; j < i; ++j) {
                const double c = h1dot_inner(frame[i], frame[j]);
                add_scaled(frame[i], -c, frame[j]);
            }
            const double after = h1dot_norm_sq(frame[i]);
            if (after <= 1e-28 * std::max(1.0, before))
                throw rank_deficiency_error(
                    i, "orthonormalize: frame member " + std::to_string(i) +
                           " is numerically dependent on its predecessors");
            frame[i] *= 1.0 / std::sqrt(after);
        }
    }
    return frame;
}

/// max_{i,j} |(grad v_i, grad v_j) - delta_ij|
inline double max_gram_deviation(const TangentFrame& frame) {
    double worst = 0.0;
    for (std::size_t i = 0; i < frame.size(); ++i)
        for (std::size_t j = 0; j <= i; ++j) {
            const double g = h1dot_inner(frame[i], frame[j]);
            worst = std::max(worst, std::abs(g - (i == j ? 1.0 : 0.0)));
        }
    return worst;
}

/// Per-member contributions (grad L_u v_i, grad v_i) to the trace, each
/// computed along two independent routes that are identities of the
/// dealiased truncation:
///   route A: assemble L_u v_i spectrally and pair with v_i;
///   route B: -nu - ((v_i, grad) u, v_i)_{L2} by grid quadrature, which is
///            exact for the cubic integrand under the strict mask.
/// Disagreement beyond 1e-10 (relative) means the truncation lost one of
/// the structural identities and is reported as numerical_error.
inline std::vector<double> trace_contributions(const SpectralVectorField& u,
                                               const TangentFrame& frame, double nu,
                                               SpectralWorkspace& ws) {
    if (frame.empty()) return {};
    u.require_same_grid(frame[0]);
    if (!u.solenoidal()) throw std::invalid_argument("trace_contributions: u must be divergence-free");
    const double gram = max_gram_deviation(frame);
    if (gram > 1e-8)
        throw std::invalid_argument("trace_contributions: frame is not orthonormal (Gram deviation " +
                                    std::to_string(gram) + ")");
    const GridPtr& grid = u.grid_ptr();
    const WaveGrid& gr = *grid;

    std::array<std::vector<double>, 4> u_phys;
    physical_components(u, u_phys, ws.scratch);
    std::array<std::array<std::vector<double>, 4>, 4> grad_u;  // grad_u[c][j] = d_j u_c
    gradient_physical(u, grad_u, ws);

    std::vector<double> tau(frame.size());
    for (std::size_t i = 0; i < frame.size(); ++i) {
        const SpectralVectorField& v = frame[i];
        SpectralVectorField lv = detail::variational_from_physical(grid, u_phys, v, nu, ws);
        const double route_a = h1dot_inner(lv, v);

        // ws.phys_b still holds the samples of v from the variational call
        double s = 0.0;
        for (std::size_t x = 0; x < gr.size(); ++x) {
            double acc = 0.0;
            for (int c = 0; c < 4; ++c) {
                double adv = 0.0;
                for (int j = 0; j < 4; ++j)
                    adv += ws.phys_b[static_cast<std::size_t>(j)][x] *
                           grad_u[static_cast<std::size_t>(c)][static_cast<std::size_t>(j)][x];
                acc += adv * ws.phys_b[static_cast<std::size_t>(c)][x];
            }
            s += acc;
        }
        const double route_b = -nu - gr.volume() / static_cast<double>(gr.size()) * s;

        const double scale = std::max({1.0, std::abs(route_a), std::abs(route_b)});
        if (std::abs(route_a - route_b) > 1e-10 * scale)
            throw numerical_error("trace_contributions: spectral and quadrature routes disagree (" +
                                  std::to_string(route_a) + " vs " + std::to_string(route_b) + ")");
        tau[i] = route_a;
    }
    return tau;
}

/// Tr(L_u restricted to the frame) = sum_i (grad L_u v_i, grad v_i).
inline double trace_n(const SpectralVectorField& u, const TangentFrame& frame, double nu,
                      SpectralWorkspace& ws) {
    double s = 0.0;
    for (double t : trace_contributions(u, frame, nu, ws)) s += t;
    return s;
}

inline double trace_n(const SpectralVectorField& u, const TangentFrame& frame, double nu) {
    SpectralWorkspace ws(u.grid());
    return trace_n(u, frame, nu, ws);
}

struct TraceRunConfig {
    SolverConfig solver;
    int n = 1;                    // frame size for q_estimate
    int reortho_every = 1;        // steps between re-orthonormalizations (also sample cadence)
    double spin_up = 0.0;         // samples before this time stay out of the average
    std::uint64_t frame_seed = 99;
};

struct TraceReport {
    int n = 0;
    double nu = 0.0;
    double g_hminus1 = 0.0;
    double spin_up = 0.0;
    double t_final = 0.0;
    int reortho_every = 1;
    std::uint64_t frame_seed = 0;
    std::vector<double> sample_t;
    std::vector<double> sample_trace;   // Tr_n at the sample times
    std::vector<double> running_mean;   // time average over [spin_up, t]; 0 before the window
    double q = 0.0;                     // final window average
    double bound = 0.0;                 // trace_quadratic_bound at this n
    bool bound_respected = false;
    std::string config_hash;
};

/// Evolve a base trajectory together with an n_max-member tangent frame and
/// return, for every n <= n_max, the time-averaged trace of the variational
/// operator compressed to the leading n frame members.
///
/// One co-evolution serves all n at once: Gram-Schmidt processes members in
/// order, so the leading n members of the orthonormalized n_max-frame are
/// exactly the orthonormalized evolution of the leading n members.  The
/// frame is advanced with the same RK4 stages as the base flow (stage
/// slopes of the frame use the stage states of u), re-orthonormalized every
/// reortho_every steps, and sampled right after each re-orthonormalization.
inline std::vector<TraceReport> q_sweep(const SpectralVectorField& u0_in,
                                        const TraceRunConfig& cfg, int n_max) {
    if (n_max < 1) throw std::invalid_argument("q_sweep: n_max must be >= 1");
    if (cfg.reortho_every < 1) throw std::invalid_argument("q_sweep: reortho_every must be >= 1");
    const SolverConfig& sc = cfg.solver;
    if (!(sc.dt > 0.0) || !(sc.t_final > 0.0))
        throw std::invalid_argument("q_sweep: dt and t_final must be positive");
    if (cfg.spin_up < 0.0 || cfg.spin_up >= sc.t_final)
        throw std::invalid_argument("q_sweep: spin_up must lie in [0, t_final)");
    const long long nsteps = std::llround(sc.t_final / sc.dt);
    if (nsteps < 1 || std::abs(static_cast<double>(nsteps) * sc.dt - sc.t_final) >
                          1e-8 * std::max(1.0, sc.t_final))
        throw std::invalid_argument("q_sweep: t_final must be an integer number of steps");

    SpectralVectorField u = u0_in;
    u.apply_dealias_mask();
    leray_project_inplace(u);
    const GridPtr grid = u.grid_ptr();
    const SpectralVectorField g = realize(sc.forcing, grid, sc.nu);
    const double g_h = hminus1_norm(g);

    TangentFrame frame(random_fields(grid, static_cast<std::size_t>(n_max), cfg.frame_seed));
    frame = orthonormalize(std::move(frame));

    SpectralWorkspace ws(*grid);
    std::array<std::vector<double>, 4> u_phys;

    std::vector<double> sample_t;
    std::vector<std::vector<double>> partial;  // partial[j] = series of Tr_{j+1}
    partial.resize(static_cast<std::size_t>(n_max));

    auto take_sample = [&](long long i) {
        frame = orthonormalize(std::move(frame));
        const std::vector<double> tau = trace_contributions(u, frame, sc.nu, ws);
        sample_t.push_back(static_cast<double>(i) * sc.dt);
        double acc = 0.0;
        for (int j = 0; j < n_max; ++j) {
            acc += tau[static_cast<std::size_t>(j)];
            partial[static_cast<std::size_t>(j)].push_back(acc);
        }
    };

    take_sample(0);
    const double wts[4] = {1.0 / 6.0, 1.0 / 3.0, 1.0 / 3.0, 1.0 / 6.0};
    for (long long i = 1; i <= nsteps; ++i) {
        // coupled classical RK4: frame slopes evaluated at the u stage states
        SpectralVectorField su = u;
        std::vector<SpectralVectorField> sv;
        sv.reserve(frame.size());
        for (const auto& v : frame) sv.push_back(v);
        SpectralVectorField unew = u;
        std::vector<SpectralVectorField> vnew;
        vnew.reserve(frame.size());
        for (const auto& v : frame) vnew.push_back(v);

        for (int stage = 0; stage < 4; ++stage) {
            physical_components(su, u_phys, ws.scratch);
            SpectralVectorField ku = detail::rhs_from_physical(su, u_phys, g, sc.nu, ws);
            std::vector<SpectralVectorField> kv;
            kv.reserve(frame.size());
            for (const auto& svi : sv)
                kv.push_back(detail::variational_from_physical(grid, u_phys, svi, sc.nu, ws));
            add_scaled(unew, sc.dt * wts[stage], ku);
            for (std::size_t j = 0; j < frame.size(); ++j)
                add_scaled(vnew[j], sc.dt * wts[stage], kv[j]);
            if (stage < 3) {
                const double a = stage == 2 ? sc.dt : 0.5 * sc.dt;
                su = u;
                add_scaled(su, a, ku);
                for (std::size_t j = 0; j < frame.size(); ++j) {
                    sv[j] = frame[j];
                    add_scaled(sv[j], a, kv[j]);
                }
            }
        }
        u = std::move(unew);
        for (std::size_t j = 0; j < frame.size(); ++j) frame[j] = std::move(vnew[j]);
        const double e = h1dot_norm_sq(u);
        if (!std::isfinite(e) || e > 1e14 * std::max(1.0, g_h * g_h / (sc.nu * sc.nu)))
            throw numerical_error("q_sweep: base trajectory blew up near t = " +
                                  std::to_string(static_cast<double>(i) * sc.dt));
        if (i % cfg.reortho_every == 0 || i == nsteps) take_sample(i);
    }

    // window averages: trapezoid over samples with t >= spin_up
    std::vector<TraceReport> reports(static_cast<std::size_t>(n_max));
    const lab::ConstantTable table = lab::constants(4);
    for (int j = 0; j < n_max; ++j) {
        TraceReport& r = reports[static_cast<std::size_t>(j)];
        r.n = j + 1;
        r.nu = sc.nu;
        r.g_hminus1 = g_h;
        r.spin_up = cfg.spin_up;
        r.t_final = sc.t_final;
        r.reortho_every = cfg.reortho_every;
        r.frame_seed = cfg.frame_seed;
        r.sample_t = sample_t;
        r.sample_trace = partial[static_cast<std::size_t>(j)];
        r.running_mean.assign(sample_t.size(), 0.0);
        r.config_hash = sc.config_hash;

        std::size_t first = sample_t.size();
        for (std::size_t i = 0; i < sample_t.size(); ++i)
            if (sample_t[i] >= cfg.spin_up - 1e-12) {
                first = i;
                break;
            }
        if (first == sample_t.size())
            throw std::invalid_argument("q_sweep: no samples fall after the spin-up window");
        double integral = 0.0;
        r.running_mean[first] = r.sample_trace[first];
        for (std::size_t i = first + 1; i < sample_t.size(); ++i) {
            integral += 0.5 * (sample_t[i] - sample_t[i - 1]) *
                        (r.sample_trace[i] + r.sample_trace[i - 1]);
            r.running_mean[i] = integral / (sample_t[i] - sample_t[first]);
        }
        r.q = r.running_mean.back();
        r.bound = lab::trace_quadratic_bound(r.n, sc.nu, g_h, table.L_upper);
        r.bound_respected = r.q <= r.bound + 1e-9 * std::max(1.0, std::abs(r.bound));
    }
    return reports;
}

/// Window-averaged trace for a single frame size.
inline TraceReport q_estimate(const SpectralVectorField& u0, const TraceRunConfig& cfg) {
    if (cfg.n < 1) throw std::invalid_argument("q_estimate: n must be >= 1");
    return q_sweep(u0, cfg, cfg.n).back();
}

/// Smallest n with strictly negative window-averaged trace; q equal to zero
/// within tolerance does not count as crossed.
inline std::optional<int> dimension_crossing(const std::vector<TraceReport>& reports) {
    for (const auto& r : reports)
        if (r.q < -1e-9 * std::max(1.0, r.nu * static_cast<double>(r.n))) return r.n;
    return std::nullopt;
}

}  // namespace nsv
