#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <random>

#include "nsv/constants.hpp"
#include "nsv/inequality_checks.hpp"
#include "nsv/random_fields.hpp"
#include "nsv/tangent.hpp"

using namespace nsv;

namespace {

TangentFrame seeded_frame(const GridPtr& g, std::size_t n, std::uint64_t seed) {
    return orthonormalize(TangentFrame(random_fields(g, n, seed)));
}

Eigen::Matrix4d random_trace_free(std::mt19937_64& gen) {
    std::normal_distribution<double> normal;
    Eigen::Matrix4d a;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) a(i, j) = normal(gen);
    const double shift = a.trace() / 4.0;
    for (int i = 0; i < 4; ++i) a(i, i) -= shift;
    return a;
}

}  // namespace

TEST_CASE("constant table carries the exact closed forms") {
    const lab::ConstantTable t = lab::constants(4);
    CHECK(t.c_d == std::sqrt(0.75));
    CHECK(t.omega_d == Catch::Approx(std::numbers::pi * std::numbers::pi / 2.0).epsilon(1e-15));
    CHECK(t.L_cl == Catch::Approx(1.0 / (32.0 * std::numbers::pi * std::numbers::pi)).epsilon(1e-15));
    CHECK(t.lieb_multiplier == 6.034);
    CHECK(t.L_upper == Catch::Approx(6.034 / (32.0 * std::numbers::pi * std::numbers::pi)).epsilon(1e-15));

    // the decisive product sits inside its quoted window, under the rounded
    // value with real margin to spare
    const double twelve_l = 12.0 * t.L_upper;
    CHECK(twelve_l >= 0.2290);
    CHECK(twelve_l <= 0.2295);
    CHECK(twelve_l <= 0.23);
    CHECK(0.23 - twelve_l >= 5e-4);

    const lab::ConstantTable t3 = lab::constants(3);
    CHECK(t3.c_d == std::sqrt(2.0 / 3.0));
    CHECK(t3.L_upper == 0.0);

    CHECK(lab::unit_ball_volume(1) == Catch::Approx(2.0).epsilon(1e-15));
    CHECK(lab::unit_ball_volume(2) == Catch::Approx(std::numbers::pi).epsilon(1e-15));
    CHECK(lab::unit_ball_volume(3) == Catch::Approx(4.0 * std::numbers::pi / 3.0).epsilon(1e-15));
    CHECK(lab::unit_ball_volume(4) == Catch::Approx(std::numbers::pi * std::numbers::pi / 2.0).epsilon(1e-15));

    CHECK_THROWS_AS(lab::constants(2), std::invalid_argument);
}

TEST_CASE("closed-form dimension bound and its quadratic majorant") {
    const lab::BoundReport r = lab::dimension_bound(1.0, 1.0);
    CHECK(r.bound_exact == Catch::Approx(0.2292645).margin(5e-7));
    CHECK(r.bound_rounded == 0.23);
    CHECK(r.bound_exact <= r.bound_rounded);

    // the majorant vanishes at the root, is negative beyond it
    const double L = lab::constants(4).L_upper;
    const double at_root = lab::trace_quadratic_bound(1, 1.0, 1.0 / (2.0 * std::sqrt(3.0 * L)), L);
    CHECK(std::abs(at_root) <= 1e-12);
    CHECK(lab::trace_quadratic_bound(4, 1.0, 1.0, L) < lab::trace_quadratic_bound(1, 1.0, 1.0, L));

    // scaling in g and nu: bound ~ g^2 / nu^4
    const lab::BoundReport r2 = lab::dimension_bound(3.0, 2.0);
    CHECK(r2.bound_exact == Catch::Approx(r.bound_exact * 9.0 / 16.0).epsilon(1e-13));

    CHECK_THROWS_AS(lab::dimension_bound(1.0, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(lab::dimension_bound(-1.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(lab::trace_quadratic_bound(0, 1.0, 1.0, L), std::invalid_argument);
}

TEST_CASE("extremal trace-free matrix attains the sharp form constant") {
    // spectrum (l, -l/3, -l/3, -l/3) evaluated on its leading eigenvector
    Eigen::Matrix4d a = Eigen::Matrix4d::Zero();
    a(0, 0) = 1.0;
    a(1, 1) = a(2, 2) = a(3, 3) = -1.0 / 3.0;
    const Eigen::Vector4d e1(1.0, 0.0, 0.0, 0.0);
    const double ratio = lab::trace_free_form_ratio(a, e1);
    CHECK(ratio == Catch::Approx(std::sqrt(0.75)).epsilon(1e-14));
}

TEST_CASE("random trace-free matrices never exceed the Frobenius constant") {
    std::mt19937_64 gen(99);
    std::normal_distribution<double> normal;
    const double c4 = std::sqrt(0.75);
    double best = 0.0;
    for (int trial = 0; trial < 1000; ++trial) {
        const Eigen::Matrix4d a = random_trace_free(gen);
        Eigen::Vector4d v;
        for (int i = 0; i < 4; ++i) v[i] = normal(gen);
        const double ratio = lab::trace_free_form_ratio(a, v);
        REQUIRE(ratio <= c4 + 1e-12);
        best = std::max(best, ratio);
    }
    CHECK(best > 0.3);  // the sample should come reasonably close to the constant
}

TEST_CASE("the operator-norm variant of the form bound is genuinely false") {
    // diag(1,-1,0,0) on the first axis: (A v, v) = 1 = |A|_op |v|^2, while
    // the Frobenius ratio is 1/sqrt(2) < c_4.  This is the counterexample
    // that forces the aggregate chain to run through the Frobenius norm.
    Eigen::Matrix4d a = Eigen::Matrix4d::Zero();
    a(0, 0) = 1.0;
    a(1, 1) = -1.0;
    const Eigen::Vector4d e1(1.0, 0.0, 0.0, 0.0);
    const double form = e1.dot(a * e1);
    const double op_norm = 1.0;  // eigenvalues are {1, -1, 0, 0}
    CHECK(form == 1.0);
    CHECK(form > std::sqrt(0.75) * op_norm);
    CHECK(lab::trace_free_form_ratio(a, e1) == Catch::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-14));
}

TEST_CASE("form ratio rejects matrices with trace") {
    const Eigen::Matrix4d a = Eigen::Matrix4d::Identity();
    const Eigen::Vector4d v(1.0, 2.0, 0.0, 0.0);
    CHECK_THROWS_AS(lab::trace_free_form_ratio(a, v), std::invalid_argument);
}

TEST_CASE("frame density integrates to the L2 mass of the frame") {
    const auto g = make_grid(8);
    SpectralWorkspace ws(*g);
    const TangentFrame f = seeded_frame(g, 3, 400);
    const std::vector<double> rho = lab::rho_field(f, ws);
    double mass = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) {
        const double nrm = l2_norm(f[i]);
        mass += nrm * nrm;
    }
    CHECK(integrate(*g, rho) == Catch::Approx(mass).epsilon(1e-12));
    for (double x : rho) REQUIRE(x >= 0.0);
}

TEST_CASE("density norm of a single-mode frame matches the closed form") {
    // v = gamma sin(k.x) a with |k| = 1: rho = gamma^2 sin^2 a.a and
    // ||rho||_{L2} = (2/|k|^2) sqrt(3 / (8 vol)) after the unit-gradient
    // normalization gamma^2 = 2 / (vol |k|^2)
    const auto g = make_grid(8);
    SpectralWorkspace ws(*g);
    const double vol = g->volume();
    const double gamma = std::sqrt(2.0 / vol);
    SpectralVectorField v(g);
    // a = e2, k = e0: sin field with unit gradient norm
    v.at(2, g->site_of({1, 0, 0, 0})) = Complex(0.0, -0.5 * gamma);
    v.at(2, g->site_of({-1, 0, 0, 0})) = Complex(0.0, 0.5 * gamma);
    v.set_solenoidal(true);
    REQUIRE(h1dot_norm(v) == Catch::Approx(1.0).epsilon(1e-13));

    const TangentFrame f(std::vector<SpectralVectorField>{v});
    const std::vector<double> rho = lab::rho_field(f, ws);
    const double closed_form = 2.0 * std::sqrt(3.0 / (8.0 * vol));
    CHECK(lab::l2_grid_norm(*g, rho) == Catch::Approx(closed_form).epsilon(1e-12));
    CHECK(closed_form == Catch::Approx(0.0310231).margin(1e-6));
}

TEST_CASE("collective density bound holds across random frames") {
    const auto g = make_grid(8);
    SpectralWorkspace ws(*g);
    const lab::ConstantTable table = lab::constants(4);
    for (std::uint64_t trial = 0; trial < 12; ++trial) {
        const std::size_t n = trial % 6 + 1;
        const TangentFrame f = seeded_frame(g, n, 500 + trial);
        const lab::RhoBoundReport r = lab::rho_bound_check(f, table, ws);
        REQUIRE(r.respected);
        CHECK(r.n == static_cast<int>(n));
        CHECK(r.bound == Catch::Approx(2.0 * std::sqrt(4.0 * table.L_upper) *
                                       std::sqrt(static_cast<double>(n)))
                             .epsilon(1e-13));
        CHECK(r.ratio <= 1.0);
        CHECK(r.ratio > 0.0);
    }
}

TEST_CASE("density bound refuses frames that are not orthonormal") {
    const auto g = make_grid(8);
    SpectralWorkspace ws(*g);
    const lab::ConstantTable table = lab::constants(4);
    TangentFrame raw(random_fields(g, 2, 510));
    CHECK_THROWS_AS(lab::rho_bound_check(raw, table, ws), std::invalid_argument);
}

TEST_CASE("aggregate advective chain is ordered as proved") {
    const auto g = make_grid(8);
    SpectralWorkspace ws(*g);
    const lab::ConstantTable table = lab::constants(4);
    RandomFieldSpec spec;
    for (std::uint64_t trial = 0; trial < 8; ++trial) {
        spec.seed = 600 + trial;
        spec.target_h1dot = 1.0 + 0.5 * static_cast<double>(trial % 3);
        const SpectralVectorField u = random_solenoidal_field(g, spec);
        const TangentFrame f = seeded_frame(g, trial % 4 + 1, 700 + trial);
        const lab::AggregateC4Report r = lab::aggregate_c4_check(u, f, table, ws);
        REQUIRE(r.chain_frobenius_ok);
        REQUIRE(r.lhs <= r.mid_frobenius + 1e-10 * std::max(1.0, r.rhs));
        REQUIRE(r.mid_frobenius <= r.rhs + 1e-10 * std::max(1.0, r.rhs));
        // the operator norm never exceeds the Frobenius norm, so the
        // diagnostic middle term is the smaller of the two
        CHECK(r.mid_spectral <= r.mid_frobenius + 1e-12);
        // rhs is exactly c_4 ||grad u|| ||rho||
        const std::vector<double> rho = lab::rho_field(f, ws);
        const double expect = table.c_d * h1dot_norm(u) * lab::l2_grid_norm(*g, rho);
        CHECK(r.rhs == Catch::Approx(expect).epsilon(1e-10));
    }
}
