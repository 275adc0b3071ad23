#pragma once

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "nsv/clr.hpp"
#include "nsv/constants.hpp"
#include "nsv/errors.hpp"
#include "nsv/field_io.hpp"
#include "nsv/inequality_checks.hpp"
#include "nsv/random_fields.hpp"
#include "nsv/reports.hpp"
#include "nsv/solver.hpp"
#include "nsv/spectral_ops.hpp"
#include "nsv/tangent.hpp"
#include "nsv/trace_oracle.hpp"

namespace nsv::cli {

/// Canonical key=value list of every option that affects the result.  Its
/// hash names the run directory and is stamped into reports and checkpoint
/// sidecars; output locations and report format are deliberately excluded,
/// so re-running the same physics elsewhere reproduces the same bytes.
class Canonical {
public:
    explicit Canonical(std::string subcommand) : text_(std::move(subcommand)) {}

    Canonical& add(const std::string& key, const std::string& value) {
        text_ += '|';
        text_ += key;
        text_ += '=';
        text_ += value;
        return *this;
    }
    Canonical& add(const std::string& key, double v) { return add(key, format_double(v)); }
    Canonical& add(const std::string& key, int v) { return add(key, std::to_string(v)); }
    Canonical& add(const std::string& key, std::uint64_t v) { return add(key, std::to_string(v)); }

    const std::string& text() const noexcept { return text_; }
    std::string hash8() const { return hash_hex(fnv1a64(text_), 8); }

private:
    std::string text_;
};

struct RunDir {
    std::filesystem::path path;
    std::string hash;
};

inline RunDir make_run_dir(const std::string& out_root, const std::string& name,
                           const Canonical& canon, const std::vector<std::string>& argv) {
    RunDir rd;
    rd.hash = canon.hash8();
    rd.path = std::filesystem::path(out_root) / (name + "-" + rd.hash);
    std::filesystem::create_directories(rd.path);
    // the sidecar is the only file allowed to differ between reruns
    nlohmann::json side;
    side["argv"] = argv;
    side["canonical_config"] = canon.text();
    side["config_hash"] = rd.hash;
    const auto now = std::chrono::system_clock::now();
    side["written_unix_ms"] =
        std::chrono::duration_cast<std::chrono::milliseconds>(now.time_since_epoch()).count();
    write_text_file(rd.path / "sidecar.json", side.dump(2) + "\n");
    return rd;
}

inline std::string key_value_csv(const nlohmann::json& j) {
    std::string s = "key,value\n";
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (it.value().is_array() || it.value().is_object()) continue;
        s += it.key();
        s += ',';
        s += it.value().is_string() ? it.value().get<std::string>() : it.value().dump();
        s += '\n';
    }
    return s;
}

inline void emit_report(const RunDir& rd, const std::string& stem, const nlohmann::json& j,
                        const std::string& format) {
    if (format == "json") {
        write_text_file(rd.path / (stem + ".json"), j.dump(2) + "\n");
    } else {
        write_text_file(rd.path / (stem + ".csv"), key_value_csv(j));
    }
}

struct CommonOpts {
    std::string out_root = "runs";
    std::string format = "json";
    int grid_n = 8;
    double box = 2.0 * std::numbers::pi;
    std::uint64_t seed = 1;
};

inline void attach_common(CLI::App* sub, CommonOpts& c, bool with_grid = true) {
    sub->add_option("--out-dir", c.out_root, "root directory for run outputs")
        ->capture_default_str();
    sub->add_option("--report-format", c.format, "report format")
        ->check(CLI::IsMember({"json", "csv"}))
        ->capture_default_str();
    sub->add_option("--seed", c.seed, "seed for every random draw in this run")
        ->capture_default_str();
    if (with_grid) {
        sub->add_option("--grid-n", c.grid_n, "lattice points per dimension (even, >= 8)")
            ->capture_default_str();
        sub->add_option("--box", c.box, "box side length")->capture_default_str();
    }
}

// ---------------------------------------------------------------------------
// subcommand bodies.  Each returns a process exit code; failed acceptance of
// an advertised property raises invariant_violation, which the driver maps
// to exit code 4.

struct BoundArgs {
    CommonOpts common;
    double g_norm = 1.0;
    double nu = 1.0;
    double L = 0.0;  // 0: use the pinned four-dimensional constant
};

inline int cmd_bound(const BoundArgs& a, const std::vector<std::string>& argv) {
    const lab::ConstantTable table = lab::constants(4);
    const double L = a.L > 0.0 ? a.L : table.L_upper;
    const lab::BoundReport r = lab::dimension_bound(a.g_norm, a.nu, L);

    Canonical canon("bound");
    canon.add("g_norm", a.g_norm).add("nu", a.nu).add("L", L);
    const RunDir rd = make_run_dir(a.common.out_root, "bound", canon, argv);

    nlohmann::json j = to_json(r);
    j["constants"] = to_json(table);
    j["config_hash"] = rd.hash;
    emit_report(rd, "bound", j, a.common.format);

    std::cout << "bound: n <= " << format_double(r.bound_exact) << " (exact), "
              << format_double(r.bound_rounded) << " (rounded coefficient 0.23)\n"
              << "report: " << (rd.path / ("bound." + a.common.format)).string() << "\n";
    return 0;
}

struct SimulateArgs {
    CommonOpts common;
    double nu = 1.0;
    double dt = 1e-2;
    double t_final = 1.0;
    int save_every = 1;
    std::string u0 = "random";  // random | zero | path to a field file
    double u0_h1dot = 1.0;
    double u0_decay = 2.0;
    std::string forcing = "none";  // none | low-mode | shear | path to a field file
    double g_norm = 1.0;
    int g_mode_limit = 2;
    double amplitude = 1.0;
    int checkpoint_every = 0;
    std::string resume;  // checkpoint path; continues to t_final
    bool series = true;
};

inline ForcingSpec parse_forcing(const SimulateArgs& a) {
    ForcingSpec f;
    if (a.forcing == "none") {
        f.kind = ForcingSpec::Kind::none;
    } else if (a.forcing == "low-mode") {
        f.kind = ForcingSpec::Kind::low_mode;
        f.seed = a.common.seed + 1;
        f.hminus1 = a.g_norm;
        f.mode_limit = a.g_mode_limit;
    } else if (a.forcing == "shear") {
        f.kind = ForcingSpec::Kind::shear;
        f.amplitude = a.amplitude;
    } else {
        f.kind = ForcingSpec::Kind::file;
        f.path = a.forcing;
    }
    return f;
}

inline Canonical simulate_canonical(const char* name, const SimulateArgs& a) {
    Canonical canon(name);
    canon.add("grid_n", a.common.grid_n)
        .add("box", a.common.box)
        .add("nu", a.nu)
        .add("dt", a.dt)
        .add("t_final", a.t_final)
        .add("save_every", a.save_every)
        .add("u0", a.u0)
        .add("u0_h1dot", a.u0_h1dot)
        .add("u0_decay", a.u0_decay)
        .add("forcing", a.forcing)
        .add("g_norm", a.g_norm)
        .add("g_mode_limit", a.g_mode_limit)
        .add("amplitude", a.amplitude)
        .add("seed", a.common.seed)
        .add("checkpoint_every", a.checkpoint_every);
    return canon;
}

inline SpectralVectorField make_initial_state(const SimulateArgs& a, const GridPtr& grid) {
    if (a.u0 == "zero") {
        SpectralVectorField u(grid);
        u.set_solenoidal(true);
        return u;
    }
    if (a.u0 == "random") {
        RandomFieldSpec spec;
        spec.seed = a.common.seed;
        spec.spectral_decay = a.u0_decay;
        spec.target_h1dot = a.u0_h1dot;
        return random_solenoidal_field(grid, spec);
    }
    SpectralVectorField u = load_field(a.u0);
    if (!u.grid().same_layout(*grid))
        throw std::invalid_argument("simulate: initial-state file grid does not match --grid-n/--box");
    return u;
}

inline int cmd_simulate(const SimulateArgs& a, const std::vector<std::string>& argv) {
    const Canonical canon = simulate_canonical("simulate", a);
    const RunDir rd = make_run_dir(a.common.out_root, "simulate", canon, argv);

    SolverConfig cfg;
    cfg.nu = a.nu;
    cfg.dt = a.dt;
    cfg.t_final = a.t_final;
    cfg.save_every = a.save_every;
    cfg.forcing = parse_forcing(a);
    cfg.checkpoint_every = a.checkpoint_every;
    cfg.checkpoint_dir = rd.path;
    cfg.config_hash = rd.hash;
    cfg.seed = a.common.seed;

    TrajectoryLog log;
    if (!a.resume.empty()) {
        log = resume(a.resume, cfg);
    } else {
        const GridPtr grid = make_grid(a.common.grid_n, a.common.box);
        log = simulate(make_initial_state(a, grid), cfg);
    }

    write_text_file(rd.path / "trajectory.csv", trajectory_csv(log));
    nlohmann::json j = to_json(log, a.series);
    j["config_hash"] = rd.hash;
    emit_report(rd, "report", j, a.common.format);
    save_field(log.final_state, rd.path / "final_state.nsv4");

    std::cout << "simulate: " << log.t.size() << " samples, final enstrophy "
              << format_double(log.enstrophy.back()) << "\n"
              << "report: " << (rd.path / "trajectory.csv").string() << "\n";
    return 0;
}

struct DecayArgs {
    CommonOpts common{.grid_n = 16};
    double nu = 0.5;
    double dt = 1e-2;
    double t_final = 10.0;
    double tol = 1e-6;
};

inline int cmd_decay_test(const DecayArgs& a, const std::vector<std::string>& argv) {
    Canonical canon("decay-test");
    canon.add("grid_n", a.common.grid_n)
        .add("box", a.common.box)
        .add("nu", a.nu)
        .add("dt", a.dt)
        .add("t_final", a.t_final)
        .add("seed", a.common.seed)
        .add("tol", a.tol);
    const RunDir rd = make_run_dir(a.common.out_root, "decay-test", canon, argv);

    const GridPtr grid = make_grid(a.common.grid_n, a.common.box);
    RandomFieldSpec spec;
    spec.seed = a.common.seed;
    spec.spectral_decay = 2.0;
    spec.target_h1dot = 1.0;
    SpectralVectorField u0 = random_solenoidal_field(grid, spec);

    SolverConfig cfg;
    cfg.nu = a.nu;
    cfg.dt = a.dt;
    cfg.t_final = a.t_final;
    cfg.save_every = 5;
    cfg.config_hash = rd.hash;
    cfg.seed = a.common.seed;
    const TrajectoryLog log = simulate(std::move(u0), cfg);

    // with g = 0 the dealiased semidiscrete flow decays exactly at rate 2 nu
    const double e0 = log.enstrophy.front();
    double worst = 0.0;
    for (std::size_t i = 0; i < log.t.size(); ++i) {
        const double exact = e0 * std::exp(-2.0 * a.nu * log.t[i]);
        worst = std::max(worst, std::abs(log.enstrophy[i] - exact) / exact);
    }

    write_text_file(rd.path / "trajectory.csv", trajectory_csv(log));
    nlohmann::json j;
    j["max_rel_error"] = worst;
    j["tol"] = a.tol;
    j["pass"] = worst <= a.tol;
    j["config_hash"] = rd.hash;
    emit_report(rd, "decay", j, a.common.format);

    std::cout << "decay-test: max relative energy error " << format_double(worst) << " (tol "
              << format_double(a.tol) << ") " << (worst <= a.tol ? "PASS" : "FAIL") << "\n"
              << "report: " << (rd.path / ("decay." + a.common.format)).string() << "\n";
    if (worst > a.tol)
        throw invariant_violation("decay-test: free decay deviates from exp(-2 nu t) beyond tolerance");
    return 0;
}

struct SteadyArgs {
    CommonOpts common{.grid_n = 8};
    double nu = 0.5;
    double amplitude = 1.0;
    double dt = 1e-2;
    double t_final = 0.0;  // 0: 50 / nu
    double tol = 1e-8;
    double rhs_tol = 1e-12;
};

inline int cmd_steady_test(const SteadyArgs& a, const std::vector<std::string>& argv) {
    const double t_final = a.t_final > 0.0 ? a.t_final : 50.0 / a.nu;
    Canonical canon("steady-test");
    canon.add("grid_n", a.common.grid_n)
        .add("box", a.common.box)
        .add("nu", a.nu)
        .add("amplitude", a.amplitude)
        .add("dt", a.dt)
        .add("t_final", t_final)
        .add("tol", a.tol)
        .add("rhs_tol", a.rhs_tol);
    const RunDir rd = make_run_dir(a.common.out_root, "steady-test", canon, argv);

    const GridPtr grid = make_grid(a.common.grid_n, a.common.box);
    SolverConfig cfg;
    cfg.nu = a.nu;
    cfg.dt = a.dt;
    cfg.t_final = t_final;
    cfg.save_every = 100;
    cfg.forcing.kind = ForcingSpec::Kind::shear;
    cfg.forcing.amplitude = a.amplitude;
    cfg.config_hash = rd.hash;

    SpectralVectorField u0(grid);
    u0.set_solenoidal(true);
    const TrajectoryLog log = simulate(std::move(u0), cfg);

    // analytic steady state u* = A sin(x2) e1
    SpectralVectorField ustar(grid);
    ustar.at(0, grid->site_of({0, 1, 0, 0})) = Complex(0.0, -0.5 * a.amplitude);
    ustar.at(0, grid->site_of({0, -1, 0, 0})) = Complex(0.0, 0.5 * a.amplitude);
    ustar.set_solenoidal(true);

    SpectralVectorField diff = log.final_state;
    diff -= ustar;
    const double err = h1dot_norm(diff);
    const double ustar_scale = h1dot_norm(ustar);
    const SpectralVectorField g = realize(cfg.forcing, grid, a.nu);
    const double rhs_norm = h1dot_norm(rhs(ustar, g, a.nu));
    const bool pass = err <= a.tol && rhs_norm <= a.rhs_tol * std::max(1.0, ustar_scale);

    write_text_file(rd.path / "trajectory.csv", trajectory_csv(log));
    nlohmann::json j;
    j["h1dot_error"] = err;
    j["tol"] = a.tol;
    j["rhs_at_steady"] = rhs_norm;
    j["rhs_tol"] = a.rhs_tol;
    j["pass"] = pass;
    j["config_hash"] = rd.hash;
    emit_report(rd, "steady", j, a.common.format);

    std::cout << "steady-test: |u(T) - u*|_H1 = " << format_double(err) << " (tol "
              << format_double(a.tol) << "), |rhs(u*)| = " << format_double(rhs_norm) << " "
              << (pass ? "PASS" : "FAIL") << "\n"
              << "report: " << (rd.path / ("steady." + a.common.format)).string() << "\n";
    if (!pass) throw invariant_violation("steady-test: shear equilibrium not reproduced");
    return 0;
}

struct ContractionArgs {
    CommonOpts common{.grid_n = 8};
    double nu = 0.5;
    double g_norm = 1.0;
    double delta = 1e-4;
    double dt = 1e-2;
    double t_final = 10.0;
    int n_seeds = 10;
    double tol = 1e-6;
};

inline int cmd_contraction_test(const ContractionArgs& a, const std::vector<std::string>& argv) {
    Canonical canon("contraction-test");
    canon.add("grid_n", a.common.grid_n)
        .add("box", a.common.box)
        .add("nu", a.nu)
        .add("g_norm", a.g_norm)
        .add("delta", a.delta)
        .add("dt", a.dt)
        .add("t_final", a.t_final)
        .add("n_seeds", a.n_seeds)
        .add("seed", a.common.seed)
        .add("tol", a.tol);
    const RunDir rd = make_run_dir(a.common.out_root, "contraction-test", canon, argv);

    const GridPtr grid = make_grid(a.common.grid_n, a.common.box);
    const double c_emb = measure_embedding_constant(grid, a.common.seed + 424242);

    SolverConfig cfg;
    cfg.nu = a.nu;
    cfg.dt = a.dt;
    cfg.t_final = a.t_final;
    if (a.g_norm > 0.0) {
        cfg.forcing.kind = ForcingSpec::Kind::low_mode;
        cfg.forcing.seed = a.common.seed + 1;
        cfg.forcing.hminus1 = a.g_norm;
    }
    cfg.config_hash = rd.hash;
    cfg.seed = a.common.seed;

    nlohmann::json rows = nlohmann::json::array();
    double worst = 0.0;
    for (int s = 0; s < a.n_seeds; ++s) {
        RandomFieldSpec base;
        base.seed = a.common.seed + 100 + static_cast<std::uint64_t>(s);
        base.target_h1dot = 1.0;
        SpectralVectorField u2 = random_solenoidal_field(grid, base);
        RandomFieldSpec pert;
        pert.seed = a.common.seed + 500000 + static_cast<std::uint64_t>(s);
        pert.target_h1dot = a.delta;
        SpectralVectorField u1 = u2;
        u1 += random_solenoidal_field(grid, pert);

        const ContractionReport rep = contraction_check(std::move(u1), std::move(u2), cfg, c_emb);
        worst = std::max(worst, rep.max_ratio);
        rows.push_back({{"seed", base.seed},
                        {"max_ratio", rep.max_ratio},
                        {"final_delta", rep.delta.back()}});
    }

    const bool pass = worst <= 1.0 + a.tol;
    nlohmann::json j;
    j["c_emb"] = c_emb;
    j["worst_ratio"] = worst;
    j["tol"] = a.tol;
    j["pass"] = pass;
    j["runs"] = rows;
    j["config_hash"] = rd.hash;
    emit_report(rd, "contraction", j, a.common.format);

    std::cout << "contraction-test: worst Gronwall ratio " << format_double(worst)
              << " (allowed 1 + " << format_double(a.tol) << "), C_emp = " << format_double(c_emb)
              << " " << (pass ? "PASS" : "FAIL") << "\n"
              << "report: " << (rd.path / ("contraction." + a.common.format)).string() << "\n";
    if (!pass)
        throw invariant_violation("contraction-test: difference growth exceeds the Gronwall envelope");
    return 0;
}

struct TraceArgs {
    CommonOpts common{.grid_n = 8};
    double nu = 1.0;
    double g_norm = 1.0;
    double dt = 2e-2;
    double t_final = 120.0;
    double spin_up = 20.0;
    int n_max = 8;
    int reortho_every = 1;
    std::string u0 = "random";
    double u0_h1dot = 1.0;
    bool series = false;
};

inline int cmd_trace(const TraceArgs& a, const std::vector<std::string>& argv) {
    Canonical canon("trace");
    canon.add("grid_n", a.common.grid_n)
        .add("box", a.common.box)
        .add("nu", a.nu)
        .add("g_norm", a.g_norm)
        .add("dt", a.dt)
        .add("t_final", a.t_final)
        .add("spin_up", a.spin_up)
        .add("n_max", a.n_max)
        .add("reortho_every", a.reortho_every)
        .add("u0", a.u0)
        .add("u0_h1dot", a.u0_h1dot)
        .add("seed", a.common.seed);
    const RunDir rd = make_run_dir(a.common.out_root, "trace", canon, argv);

    const GridPtr grid = make_grid(a.common.grid_n, a.common.box);
    SpectralVectorField u0(grid);
    if (a.u0 == "zero") {
        u0.set_solenoidal(true);
    } else if (a.u0 == "random") {
        RandomFieldSpec spec;
        spec.seed = a.common.seed;
        spec.target_h1dot = a.u0_h1dot;
        u0 = random_solenoidal_field(grid, spec);
    } else {
        u0 = load_field(a.u0);
    }

    TraceRunConfig cfg;
    cfg.solver.nu = a.nu;
    cfg.solver.dt = a.dt;
    cfg.solver.t_final = a.t_final;
    if (a.g_norm > 0.0) {
        cfg.solver.forcing.kind = ForcingSpec::Kind::low_mode;
        cfg.solver.forcing.seed = a.common.seed + 1;
        cfg.solver.forcing.hminus1 = a.g_norm;
    }
    cfg.solver.config_hash = rd.hash;
    cfg.solver.seed = a.common.seed;
    cfg.reortho_every = a.reortho_every;
    cfg.spin_up = a.spin_up;
    cfg.frame_seed = a.common.seed + 99;

    const std::vector<TraceReport> reports = q_sweep(u0, cfg, a.n_max);
    const std::optional<int> crossing = dimension_crossing(reports);

    nlohmann::json per_n = nlohmann::json::array();
    bool all_respected = true;
    for (const auto& r : reports) {
        per_n.push_back(to_json(r, false));
        all_respected = all_respected && r.bound_respected;
        write_text_file(rd.path / ("trace_n" + std::to_string(r.n) + ".csv"), trace_samples_csv(r));
    }
    nlohmann::json j;
    j["reports"] = per_n;
    j["crossing_n"] = crossing ? nlohmann::json(*crossing) : nlohmann::json(nullptr);
    j["all_bounds_respected"] = all_respected;
    j["config_hash"] = rd.hash;
    emit_report(rd, "trace_summary", j, a.common.format);

    std::cout << "trace: q(1.." << a.n_max << "): ";
    for (const auto& r : reports) std::cout << format_double(r.q) << (r.n < a.n_max ? " " : "");
    std::cout << "\ncrossing at n = " << (crossing ? std::to_string(*crossing) : "none")
              << ", bounds " << (all_respected ? "respected" : "VIOLATED") << "\n"
              << "report: " << (rd.path / ("trace_summary." + a.common.format)).string() << "\n";
    if (!all_respected)
        throw invariant_violation("trace: a window-averaged trace exceeded its majorant");
    return 0;
}

struct RhoArgs {
    CommonOpts common{.grid_n = 16};
    int trials = 100;
    int n_max = 8;
};

inline int cmd_rho_check(const RhoArgs& a, const std::vector<std::string>& argv) {
    Canonical canon("rho-check");
    canon.add("grid_n", a.common.grid_n)
        .add("box", a.common.box)
        .add("trials", a.trials)
        .add("n_max", a.n_max)
        .add("seed", a.common.seed);
    const RunDir rd = make_run_dir(a.common.out_root, "rho-check", canon, argv);

    const GridPtr grid = make_grid(a.common.grid_n, a.common.box);
    const lab::ConstantTable table = lab::constants(4);
    SpectralWorkspace ws(*grid);

    std::vector<double> worst_ratio(static_cast<std::size_t>(a.n_max), 0.0);
    bool all_respected = true;
    for (int trial = 0; trial < a.trials; ++trial) {
        const int n = trial % a.n_max + 1;
        TangentFrame frame(random_fields(grid, static_cast<std::size_t>(n),
                                         a.common.seed + 7919 * static_cast<std::uint64_t>(trial)));
        frame = orthonormalize(std::move(frame));
        const lab::RhoBoundReport r = lab::rho_bound_check(frame, table, ws);
        worst_ratio[static_cast<std::size_t>(n - 1)] =
            std::max(worst_ratio[static_cast<std::size_t>(n - 1)], r.ratio);
        all_respected = all_respected && r.respected;
    }

    nlohmann::json j;
    j["trials"] = a.trials;
    j["worst_ratio_by_n"] = worst_ratio;
    j["all_respected"] = all_respected;
    j["bound_coefficient"] = std::pow(4.0 * table.L_upper, 0.5) * 2.0;
    j["config_hash"] = rd.hash;
    emit_report(rd, "rho", j, a.common.format);

    double worst = 0.0;
    for (double r : worst_ratio) worst = std::max(worst, r);
    std::cout << "rho-check: " << a.trials << " frames, worst |rho|_L2 / bound = "
              << format_double(worst) << " " << (all_respected ? "PASS" : "FAIL") << "\n"
              << "report: " << (rd.path / ("rho." + a.common.format)).string() << "\n";
    if (!all_respected)
        throw invariant_violation("rho-check: a frame density exceeded the collective Sobolev bound");
    return 0;
}

struct ClrArgs {
    CommonOpts common;
    std::vector<double> depths = {0.0, 10.0, 20.0, 35.0};
    double radius = 0.8;
    double box = 12.8;
    int resolution = 64;
    int well_dims = 4;
};

inline int cmd_clr_check(const ClrArgs& a, const std::vector<std::string>& argv) {
    Canonical canon("clr-check");
    std::string depths_text;
    for (double d : a.depths) {
        depths_text += format_double(d);
        depths_text += ';';
    }
    canon.add("depths", depths_text)
        .add("radius", a.radius)
        .add("box", a.box)
        .add("resolution", a.resolution)
        .add("well_dims", a.well_dims);
    const RunDir rd = make_run_dir(a.common.out_root, "clr-check", canon, argv);

    const lab::ConstantTable table = lab::constants(4);
    nlohmann::json rows = nlohmann::json::array();
    bool all_ok = true;
    std::cout << "clr-check: depth -> count / bound\n";
    for (double depth : a.depths) {
        lab::PotentialSpec spec;
        spec.depth = depth;
        spec.radius = a.radius;
        spec.box = a.box;
        spec.resolution = a.resolution;
        spec.well_dims = a.well_dims;
        const lab::ClrReport r = lab::clr_cross_check(spec, table);
        const bool ok = static_cast<double>(r.negative_count) <= r.bound ||
                        (r.bound == 0.0 && r.negative_count == 0);
        all_ok = all_ok && ok;
        rows.push_back(to_json(r));
        std::cout << "  " << format_double(depth) << " -> " << r.negative_count << " / "
                  << format_double(r.bound) << (ok ? "" : "  VIOLATED") << "\n";
    }

    nlohmann::json j;
    j["results"] = rows;
    j["all_respected"] = all_ok;
    j["L_upper"] = table.L_upper;
    j["config_hash"] = rd.hash;
    emit_report(rd, "clr", j, a.common.format);
    std::cout << "report: " << (rd.path / ("clr." + a.common.format)).string() << "\n";
    if (!all_ok)
        throw invariant_violation("clr-check: negative-eigenvalue count exceeded the bound");
    return 0;
}

// selftest: fast structural invariants, no filesystem output
inline int cmd_selftest() {
    int failures = 0;
    auto check = [&failures](const std::string& name, bool ok) {
        std::cout << (ok ? "[ok]   " : "[FAIL] ") << name << "\n";
        if (!ok) ++failures;
    };

    const GridPtr grid = make_grid(8);
    {
        bool ok = grid->max_retained_mode() == 2 && grid->retained_count() == 625;
        for (std::size_t s = 0; s < grid->size() && ok; ++s)
            ok = grid->conjugate_site(grid->conjugate_site(s)) == s;
        check("grid: mode bookkeeping and conjugation involution", ok);
    }
    {
        bool ok = true;
        for (int i = 0; i < 20 && ok; ++i) {
            RandomFieldSpec spec;
            spec.seed = 1000 + static_cast<std::uint64_t>(i);
            SpectralVectorField u = random_solenoidal_field(grid, spec);
            SpectralVectorField p = leray_project(u);
            p -= u;
            ok = h1dot_norm(p) <= 1e-12 && u.max_divergence_ratio() <= 1e-12 &&
                 u.hermitian_asymmetry() <= 1e-13;
        }
        check("projection: idempotence, solenoidality, Hermitian symmetry", ok);
    }
    {
        // gradients are annihilated mode by mode
        SpectralVectorField gphi(grid);
        Rng rng(77);
        for (std::size_t s = 1; s < grid->size(); ++s) {
            if (!grid->keep(s) || !grid->is_canonical(s)) continue;
            const Complex phi(rng.normal(), rng.normal());
            for (int c = 0; c < 4; ++c) {
                const double kc = grid->k_scale() * grid->modes(s)[c];
                gphi.at(c, s) = Complex(0.0, kc) * phi;
                gphi.at(c, grid->conjugate_site(s)) = std::conj(gphi.at(c, s));
            }
        }
        const double before = h1dot_norm(gphi);
        check("projection: gradient fields vanish", h1dot_norm(leray_project(gphi)) <= 1e-12 * before);
    }
    {
        bool ok = true;
        SpectralWorkspace ws(*grid);
        for (int i = 0; i < 10 && ok; ++i) {
            RandomFieldSpec spec;
            spec.seed = 2000 + static_cast<std::uint64_t>(i);
            SpectralVectorField u = random_solenoidal_field(grid, spec);
            SpectralVectorField nl = nonlinear_term(u, ws);
            const double pairing = std::abs(l2_inner(nl, u));
            const double scale = h1dot_norm_sq(u) * l2_norm(u);
            ok = pairing <= 1e-10 * std::max(1.0, scale) && nl.mean_magnitude() == 0.0 &&
                 nl.hermitian_asymmetry() <= 1e-12;
        }
        check("nonlinearity: energy neutrality in the dealiased truncation", ok);
    }
    {
        bool ok = true;
        SpectralWorkspace ws(*grid);
        for (int i = 0; i < 3 && ok; ++i) {
            SpectralVectorField u = random_solenoidal_field(
                grid, {.seed = 3000 + static_cast<std::uint64_t>(i), .target_h1dot = 1.0});
            TangentFrame frame(random_fields(grid, 2, 4000 + static_cast<std::uint64_t>(i)));
            frame = orthonormalize(std::move(frame));
            ok = max_gram_deviation(frame) <= 1e-12;
            if (ok) {
                const double t = trace_n(u, frame, 0.7, ws);  // also exercises the two-route check
                ok = std::isfinite(t);
            }
        }
        check("tangent: orthonormalization and two-route trace agreement", ok);
    }
    {
        const lab::ConstantTable t = lab::constants(4);
        const double twelve_l = 12.0 * t.L_upper;
        check("constants: 12 L inside [0.2290, 0.2295] and under 0.23",
              t.c_d == std::sqrt(0.75) && twelve_l >= 0.2290 && twelve_l <= 0.2295 &&
                  twelve_l <= 0.23);
    }
    {
        const auto dir = std::filesystem::temp_directory_path() / "nsv_selftest_field.nsv4";
        SpectralVectorField u =
            random_solenoidal_field(grid, {.seed = 5555, .target_h1dot = 2.0});
        save_field(u, dir);
        const SpectralVectorField v = load_field(dir);
        bool ok = v.grid().same_layout(*grid);
        for (int c = 0; c < 4 && ok; ++c) ok = v.component(c) == u.component(c);
        std::filesystem::remove(dir);
        check("io: field container round-trips bit-exactly", ok);
    }

    std::cout << (failures == 0 ? "selftest: all suites passed\n"
                                : "selftest: " + std::to_string(failures) + " suite(s) failed\n");
    if (failures != 0) throw invariant_violation("selftest: structural invariants violated");
    return 0;
}

// ---------------------------------------------------------------------------

inline int dispatch(std::vector<std::string> args) {
    CLI::App app{"pseudo-spectral lab for the voigt-limit system on the 4-torus"};
    app.require_subcommand(1);
    app.set_config("--config", "", "read options from an INI file");
    app.fallthrough(false);

    BoundArgs bound_args;
    auto* bound_cmd = app.add_subcommand("bound", "closed-form attractor-dimension bound");
    attach_common(bound_cmd, bound_args.common, false);
    bound_cmd->add_option("--g-norm", bound_args.g_norm, "forcing H^-1 norm")->capture_default_str();
    bound_cmd->add_option("--nu", bound_args.nu, "damping rate")->capture_default_str();
    bound_cmd->add_option("--L", bound_args.L, "override the counting constant (0 = pinned value)")
        ->capture_default_str();

    SimulateArgs sim_args;
    auto* sim_cmd = app.add_subcommand("simulate", "integrate the system and log diagnostics");
    attach_common(sim_cmd, sim_args.common);
    sim_cmd->add_option("--nu", sim_args.nu)->capture_default_str();
    sim_cmd->add_option("--dt", sim_args.dt)->capture_default_str();
    sim_cmd->add_option("--t", sim_args.t_final, "final time")->capture_default_str();
    sim_cmd->add_option("--save-every", sim_args.save_every, "sample cadence in steps")
        ->capture_default_str();
    sim_cmd->add_option("--u0", sim_args.u0, "random | zero | field-file path")->capture_default_str();
    sim_cmd->add_option("--u0-h1dot", sim_args.u0_h1dot, "gradient norm of the random start")
        ->capture_default_str();
    sim_cmd->add_option("--u0-decay", sim_args.u0_decay, "spectral slope of the random start")
        ->capture_default_str();
    sim_cmd->add_option("--forcing", sim_args.forcing, "none | low-mode | shear | field-file path")
        ->capture_default_str();
    sim_cmd->add_option("--g-norm", sim_args.g_norm, "low-mode forcing H^-1 norm")
        ->capture_default_str();
    sim_cmd->add_option("--g-mode-limit", sim_args.g_mode_limit)->capture_default_str();
    sim_cmd->add_option("--amplitude", sim_args.amplitude, "shear forcing amplitude")
        ->capture_default_str();
    sim_cmd->add_option("--checkpoint-every", sim_args.checkpoint_every, "steps; 0 disables")
        ->capture_default_str();
    sim_cmd->add_option("--resume", sim_args.resume, "checkpoint file to continue from")
        ->capture_default_str();
    sim_cmd->add_flag("--series,!--no-series", sim_args.series, "include full series in the JSON report")
        ->capture_default_str();

    DecayArgs decay_args;
    auto* decay_cmd = app.add_subcommand("decay-test", "free decay against the exact rate");
    attach_common(decay_cmd, decay_args.common);
    decay_cmd->add_option("--nu", decay_args.nu)->capture_default_str();
    decay_cmd->add_option("--dt", decay_args.dt)->capture_default_str();
    decay_cmd->add_option("--t", decay_args.t_final)->capture_default_str();
    decay_cmd->add_option("--tol", decay_args.tol)->capture_default_str();

    SteadyArgs steady_args;
    auto* steady_cmd = app.add_subcommand("steady-test", "convergence onto the shear equilibrium");
    attach_common(steady_cmd, steady_args.common);
    steady_cmd->add_option("--nu", steady_args.nu)->capture_default_str();
    steady_cmd->add_option("--amplitude", steady_args.amplitude)->capture_default_str();
    steady_cmd->add_option("--dt", steady_args.dt)->capture_default_str();
    steady_cmd->add_option("--t", steady_args.t_final, "final time (0 = 50 / nu)")
        ->capture_default_str();
    steady_cmd->add_option("--tol", steady_args.tol)->capture_default_str();
    steady_cmd->add_option("--rhs-tol", steady_args.rhs_tol)->capture_default_str();

    ContractionArgs contr_args;
    auto* contr_cmd = app.add_subcommand("contraction-test", "Gronwall envelope for co-evolved pairs");
    attach_common(contr_cmd, contr_args.common);
    contr_cmd->add_option("--nu", contr_args.nu)->capture_default_str();
    contr_cmd->add_option("--g-norm", contr_args.g_norm, "forcing H^-1 norm (0 = unforced)")
        ->capture_default_str();
    contr_cmd->add_option("--delta", contr_args.delta, "initial separation")->capture_default_str();
    contr_cmd->add_option("--dt", contr_args.dt)->capture_default_str();
    contr_cmd->add_option("--t", contr_args.t_final)->capture_default_str();
    contr_cmd->add_option("--seeds", contr_args.n_seeds, "number of seeded pairs")
        ->capture_default_str();
    contr_cmd->add_option("--tol", contr_args.tol)->capture_default_str();

    TraceArgs trace_args;
    auto* trace_cmd = app.add_subcommand("trace", "window-averaged traces q(n) along a trajectory");
    attach_common(trace_cmd, trace_args.common);
    trace_cmd->add_option("--nu", trace_args.nu)->capture_default_str();
    trace_cmd->add_option("--g-norm", trace_args.g_norm)->capture_default_str();
    trace_cmd->add_option("--dt", trace_args.dt)->capture_default_str();
    trace_cmd->add_option("--t", trace_args.t_final)->capture_default_str();
    trace_cmd->add_option("--spin-up", trace_args.spin_up, "discard window before averaging")
        ->capture_default_str();
    trace_cmd->add_option("--n-max", trace_args.n_max)->capture_default_str();
    trace_cmd->add_option("--reortho-every", trace_args.reortho_every)->capture_default_str();
    trace_cmd->add_option("--u0", trace_args.u0, "random | zero | field-file path")
        ->capture_default_str();
    trace_cmd->add_option("--u0-h1dot", trace_args.u0_h1dot)->capture_default_str();

    RhoArgs rho_args;
    auto* rho_cmd = app.add_subcommand("rho-check", "frame densities against the collective bound");
    attach_common(rho_cmd, rho_args.common);
    rho_cmd->add_option("--trials", rho_args.trials)->capture_default_str();
    rho_cmd->add_option("--n-max", rho_args.n_max)->capture_default_str();

    ClrArgs clr_args;
    auto* clr_cmd = app.add_subcommand("clr-check", "negative-eigenvalue counts for square wells");
    attach_common(clr_cmd, clr_args.common, false);
    clr_cmd->add_option("--depths", clr_args.depths, "well depths to sweep")->capture_default_str();
    clr_cmd->add_option("--radius", clr_args.radius)->capture_default_str();
    clr_cmd->add_option("--box", clr_args.box)->capture_default_str();
    clr_cmd->add_option("--resolution", clr_args.resolution)->capture_default_str();
    clr_cmd->add_option("--well-dims", clr_args.well_dims)->capture_default_str();

    auto* self_cmd = app.add_subcommand("selftest", "fast structural invariants");

    std::vector<std::string> argv_record = args;
    argv_record.insert(argv_record.begin(), "nsv");

    std::vector<const char*> argv_ptrs;
    argv_ptrs.reserve(argv_record.size());
    for (const auto& s : argv_record) argv_ptrs.push_back(s.c_str());
    try {
        app.parse(static_cast<int>(argv_ptrs.size()), argv_ptrs.data());
    } catch (const CLI::ParseError& e) {
        // prints help text or the usage diagnostic as appropriate
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    if (bound_cmd->parsed()) return cmd_bound(bound_args, argv_record);
    if (sim_cmd->parsed()) return cmd_simulate(sim_args, argv_record);
    if (decay_cmd->parsed()) return cmd_decay_test(decay_args, argv_record);
    if (steady_cmd->parsed()) return cmd_steady_test(steady_args, argv_record);
    if (contr_cmd->parsed()) return cmd_contraction_test(contr_args, argv_record);
    if (trace_cmd->parsed()) return cmd_trace(trace_args, argv_record);
    if (rho_cmd->parsed()) return cmd_rho_check(rho_args, argv_record);
    if (clr_cmd->parsed()) return cmd_clr_check(clr_args, argv_record);
    if (self_cmd->parsed()) return cmd_selftest();
    throw std::invalid_argument("no subcommand given");
}

/// Entry point shared by the binary and the in-process tests.
/// Exit codes: 0 success, 2 configuration or usage error, 3 numerical
/// failure, 4 violated invariant or failed test property.
inline int run_cli(std::vector<std::string> args) {
    try {
        return dispatch(std::move(args));
    } catch (const invariant_violation& e) {
        std::cerr << "invariant violated: " << e.what() << "\n";
        return 4;
    } catch (const numerical_error& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    } catch (const std::invalid_argument& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}

inline int run_cli(int argc, char** argv) {
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
    return run_cli(std::move(args));
}

}  // namespace nsv::cli
