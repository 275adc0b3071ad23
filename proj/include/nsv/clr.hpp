#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "nsv/constants.hpp"
#include "nsv/errors.hpp"

namespace nsv::lab {

/// Separable square-well family for the eigenvalue-counting cross-check.
///
/// The Schroedinger operator -Laplacian - V is discretized with Dirichlet
/// walls on a box large against the well, emulating the whole-space setting
/// the counting bound addresses.  (A periodic box would be useless here:
/// its constant mode gives every nonnegative nonzero V at least one
/// negative eigenvalue, so the weak-coupling regime could never count
/// zero.)  V(x) = sum over the first well_dims coordinates of a depth-D
/// square well of half-width `radius` centered in the box; the 4d operator
/// is then a Kronecker sum of 1d operators and its spectrum is the set of
/// sums of 1d eigenvalues, which makes an exact count affordable.
struct PotentialSpec {
    double depth = 20.0;
    double radius = 0.8;
    double box = 12.8;
    int resolution = 64;  // interior grid points per dimension
    int well_dims = 4;    // coordinates carrying a well
};

struct ClrReport {
    int negative_count = 0;
    double int_v2 = 0.0;     // grid quadrature of V^2 over the box
    double bound = 0.0;      // L * int_v2
    double ratio = 0.0;      // count / bound (0 when the bound is 0)
    double lambda_min = 0.0; // ground-state eigenvalue
    PotentialSpec spec;
};

namespace detail {

/// Eigenvalues of the 1d Dirichlet operator -d^2/dx^2 - w(x) on (0, box),
/// second-order central differences on `res` interior points.
inline std::vector<double> dirichlet_well_spectrum(double box, int res, double depth,
                                                   double radius, std::vector<double>* well_values) {
    const double h = box / static_cast<double>(res + 1);
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(res, res);
    const double diag = 2.0 / (h * h);
    const double off = -1.0 / (h * h);
    if (well_values) well_values->assign(static_cast<std::size_t>(res), 0.0);
    for (int i = 0; i < res; ++i) {
        const double x = h * static_cast<double>(i + 1);
        const double w = std::abs(x - 0.5 * box) <= radius ? depth : 0.0;
        if (well_values) (*well_values)[static_cast<std::size_t>(i)] = w;
        a(i, i) = diag - w;
        if (i + 1 < res) {
            a(i, i + 1) = off;
            a(i + 1, i) = off;
        }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(a, Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success)
        throw numerical_error("dirichlet_well_spectrum: eigensolver failed to converge");
    std::vector<double> ev(solver.eigenvalues().data(), solver.eigenvalues().data() + res);
    std::sort(ev.begin(), ev.end());
    return ev;
}

}  // namespace detail

/// Exact count of negative eigenvalues of the separable discrete operator,
/// compared against L * int V^2.  int V^2 uses the same grid quadrature the
/// operator lives on, so the reported bound refers to the discretized
/// potential, not an idealized one.
inline ClrReport clr_cross_check(const PotentialSpec& spec, const ConstantTable& table) {
    if (table.d != 4 || table.L_upper <= 0.0)
        throw std::invalid_argument("clr_cross_check: needs the d = 4 constant table");
    if (spec.well_dims < 1 || spec.well_dims > 4)
        throw std::invalid_argument("clr_cross_check: well_dims must be in 1..4");
    if (!(spec.depth >= 0.0)) throw std::invalid_argument("clr_cross_check: depth must be >= 0");
    if (!(spec.radius > 0.0) || !(spec.box > 0.0))
        throw std::invalid_argument("clr_cross_check: radius and box must be positive");
    if (spec.box < 8.0 * (2.0 * spec.radius))
        throw std::invalid_argument("clr_cross_check: box must be at least 8 well diameters");
    if (spec.resolution < 8)
        throw std::invalid_argument("clr_cross_check: resolution must be >= 8");
    const double h = spec.box / static_cast<double>(spec.resolution + 1);
    if (h > 0.5 * spec.radius)
        throw std::invalid_argument(
            "clr_cross_check: grid spacing exceeds half the well radius; raise resolution");

    std::vector<double> well;  // well samples, shared by all well-bearing dimensions
    const std::vector<double> ev_well =
        detail::dirichlet_well_spectrum(spec.box, spec.resolution, spec.depth, spec.radius, &well);
    const std::vector<double> ev_free =
        detail::dirichlet_well_spectrum(spec.box, spec.resolution, 0.0, spec.radius, nullptr);

    std::array<const std::vector<double>*, 4> dims{};
    for (int j = 0; j < 4; ++j) dims[static_cast<std::size_t>(j)] = j < spec.well_dims ? &ev_well : &ev_free;

    // count quadruples with a strictly negative sum; lists are sorted, so
    // prune each loop once the partial sum cannot go negative and finish
    // with a binary search over the last dimension
    const double tol = -1e-8;
    long long count = 0;
    const auto& e0 = *dims[0];
    const auto& e1 = *dims[1];
    const auto& e2 = *dims[2];
    const auto& e3 = *dims[3];
    for (double a : e0) {
        if (a + e1.front() + e2.front() + e3.front() >= tol) break;
        for (double b : e1) {
            const double ab = a + b;
            if (ab + e2.front() + e3.front() >= tol) break;
            for (double c : e2) {
                const double abc = ab + c;
                if (abc + e3.front() >= tol) break;
                const auto it = std::lower_bound(e3.begin(), e3.end(), tol - abc);
                count += it - e3.begin();
            }
        }
    }

    ClrReport r;
    r.spec = spec;
    r.negative_count = static_cast<int>(count);
    r.lambda_min = e0.front() + e1.front() + e2.front() + e3.front();

    // int V^2 with V = sum_j w_j: expand the square; off-diagonal terms are
    // products of 1d sums because the wells are separable
    const double n1 = static_cast<double>(spec.resolution);
    double s1 = 0.0, s2 = 0.0;
    for (double w : well) {
        s1 += w;
        s2 += w * w;
    }
    const double wd = static_cast<double>(spec.well_dims);
    const double h4 = h * h * h * h;
    r.int_v2 = h4 * (wd * s2 * n1 * n1 * n1 + wd * (wd - 1.0) * s1 * s1 * n1 * n1);
    r.bound = table.L_upper * r.int_v2;
    r.ratio = r.bound > 0.0 ? static_cast<double>(count) / r.bound : 0.0;
    return r;
}

}  // namespace nsv::lab
