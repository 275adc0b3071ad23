#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace nsv::lab {

/// The constants backing the attractor-dimension estimate, each with a
/// provenance note.  Everything except the d = 4 eigenvalue-bound
/// multiplier is computed, not quoted.
struct ConstantTable {
    int d = 0;
    double c_d = 0.0;        // sharp factor in (A v, v) <= c_d |A|_F |v|^2, A trace-free
    double omega_d = 0.0;    // volume of the unit d-ball
    double L_cl = 0.0;       // semiclassical constant omega_d / (2 pi)^d
    double lieb_multiplier = 0.0;  // rigorous multiplier on L_cl; pinned for d = 4 only
    double L_upper = 0.0;    // lieb_multiplier * L_cl (0 when no multiplier is pinned)
    std::string c_d_provenance;
    std::string L_cl_provenance;
    std::string L_upper_provenance;
};

inline double unit_ball_volume(int d) {
    if (d < 1) throw std::invalid_argument("unit_ball_volume: dimension must be positive");
    return std::pow(std::numbers::pi, 0.5 * d) / std::tgamma(0.5 * d + 1.0);
}

inline ConstantTable constants(int d) {
    if (d < 3) throw std::invalid_argument("constants: defined for dimension >= 3");
    ConstantTable t;
    t.d = d;
    t.c_d = std::sqrt(static_cast<double>(d - 1) / static_cast<double>(d));
    t.omega_d = unit_ball_volume(d);
    t.L_cl = t.omega_d / std::pow(2.0 * std::numbers::pi, static_cast<double>(d));
    t.c_d_provenance =
        "sqrt((d-1)/d); sharp over trace-free symmetric matrices in Frobenius norm, "
        "extremal spectrum (l, -l/(d-1), ..., -l/(d-1))";
    t.L_cl_provenance =
        "omega_d / (2 pi)^d with omega_d = pi^{d/2} / Gamma(d/2 + 1); for d = 4 this is "
        "1 / (32 pi^2) = 3.1663e-3 (a figure sometimes quoted alone where the product "
        "with the multiplier below is meant)";
    if (d == 4) {
        t.lieb_multiplier = 6.034;  // rigorous eigenvalue-counting multiplier, d = 4
        t.L_upper = t.lieb_multiplier * t.L_cl;
        t.L_upper_provenance =
            "6.034 * L_cl = 1.9105e-2, Lieb's bound on the negative-eigenvalue counting "
            "constant in four dimensions";
    } else {
        t.L_upper_provenance = "no multiplier pinned for this dimension";
    }
    return t;
}

/// Majorant of the n-dimensional trace average:
///     q(n) <= sqrt(n) (-nu sqrt(n) + 2 sqrt(3) L^{1/2} ||g||_{H^-1} / nu).
inline double trace_quadratic_bound(int n, double nu, double g_hminus1, double L) {
    if (n < 1) throw std::invalid_argument("trace_quadratic_bound: n must be >= 1");
    if (!(nu > 0.0)) throw std::invalid_argument("trace_quadratic_bound: nu must be positive");
    const double rn = std::sqrt(static_cast<double>(n));
    return rn * (-nu * rn + 2.0 * std::sqrt(3.0) * std::sqrt(L) * g_hminus1 / nu);
}

struct BoundReport {
    double nu = 0.0;
    double g_hminus1 = 0.0;
    double L_used = 0.0;
    double bound_exact = 0.0;    // 12 L ||g||^2 / nu^4, the root of the majorant
    double bound_rounded = 0.0;  // 0.23 ||g||^2 / nu^4
    std::string provenance;
};

/// Closed-form fractal-dimension bound for the global attractor.  The
/// majorant above crosses zero at n = 12 L ||g||^2 / nu^4; with the d = 4
/// constant 12 L = 0.22926, rounded up to 0.23.
inline BoundReport dimension_bound(double g_hminus1, double nu, double L) {
    if (!(nu > 0.0)) throw std::invalid_argument("dimension_bound: nu must be positive");
    if (g_hminus1 < 0.0) throw std::invalid_argument("dimension_bound: ||g|| must be >= 0");
    if (!(L > 0.0)) throw std::invalid_argument("dimension_bound: L must be positive");
    BoundReport r;
    r.nu = nu;
    r.g_hminus1 = g_hminus1;
    r.L_used = L;
    const double nu4 = nu * nu * nu * nu;
    r.bound_exact = 12.0 * L * g_hminus1 * g_hminus1 / nu4;
    r.bound_rounded = 0.23 * g_hminus1 * g_hminus1 / nu4;
    r.provenance =
        "root of sqrt(n)(-nu sqrt(n) + 2 sqrt(3) L^{1/2} ||g|| / nu); prefactor "
        "12 L = 0.229 for the four-dimensional counting constant, rounded to 0.23";
    return r;
}

inline BoundReport dimension_bound(double g_hminus1, double nu) {
    return dimension_bound(g_hminus1, nu, constants(4).L_upper);
}

}  // namespace nsv::lab
