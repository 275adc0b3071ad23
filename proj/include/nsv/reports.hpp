#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "nsv/clr.hpp"
#include "nsv/constants.hpp"
#include "nsv/inequality_checks.hpp"
#include "nsv/solver.hpp"
#include "nsv/tangent.hpp"

namespace nsv {

/// Shortest round-trip decimal form; identical runs must emit identical
/// bytes, so doubles never go through locale- or precision-dependent paths.
inline std::string format_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

inline std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

inline std::string hash_hex(std::uint64_t h, int digits = 16) {
    char buf[24];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return std::string(buf).substr(static_cast<std::size_t>(16 - digits));
}

inline void write_text_file(const std::filesystem::path& p, const std::string& content) {
    std::ofstream out(p, std::ios::binary);  // binary: no newline translation anywhere
    if (!out) throw std::runtime_error("write_text_file: cannot open " + p.string());
    out << content;
    if (!out) throw std::runtime_error("write_text_file: write failed for " + p.string());
}

inline std::string trajectory_csv(const TrajectoryLog& log) {
    std::string s = "t,enstrophy,g_dot_u,residual,bound_rhs\n";
    for (std::size_t i = 0; i < log.t.size(); ++i) {
        s += format_double(log.t[i]);
        s += ',';
        s += format_double(log.enstrophy[i]);
        s += ',';
        s += format_double(log.g_dot_u[i]);
        s += ',';
        s += format_double(log.residual.size() == log.t.size() ? log.residual[i] : 0.0);
        s += ',';
        s += format_double(log.bound_rhs[i]);
        s += '\n';
    }
    return s;
}

inline nlohmann::json to_json(const TrajectoryLog& log, bool include_series = true) {
    nlohmann::json j;
    j["samples"] = log.t.size();
    j["g_hminus1"] = log.g_hminus1;
    j["initial_enstrophy"] = log.enstrophy.empty() ? 0.0 : log.enstrophy.front();
    j["final_enstrophy"] = log.enstrophy.empty() ? 0.0 : log.enstrophy.back();
    if (include_series) {
        j["t"] = log.t;
        j["enstrophy"] = log.enstrophy;
        j["g_dot_u"] = log.g_dot_u;
        j["residual"] = log.residual;
        j["bound_rhs"] = log.bound_rhs;
    }
    if (!log.checkpoints.empty()) {
        nlohmann::json cps = nlohmann::json::array();
        for (const auto& [t, path] : log.checkpoints) cps.push_back({{"t", t}, {"path", path}});
        j["checkpoints"] = cps;
    }
    return j;
}

inline nlohmann::json to_json(const TraceReport& r, bool include_series = true) {
    nlohmann::json j;
    j["n"] = r.n;
    j["nu"] = r.nu;
    j["g_hminus1"] = r.g_hminus1;
    j["spin_up"] = r.spin_up;
    j["t_final"] = r.t_final;
    j["reortho_every"] = r.reortho_every;
    j["frame_seed"] = r.frame_seed;
    j["q"] = r.q;
    j["bound"] = r.bound;
    j["bound_respected"] = r.bound_respected;
    if (!r.config_hash.empty()) j["config_hash"] = r.config_hash;
    if (include_series) {
        j["sample_t"] = r.sample_t;
        j["sample_trace"] = r.sample_trace;
        j["running_mean"] = r.running_mean;
    }
    return j;
}

inline std::string trace_samples_csv(const TraceReport& r) {
    std::string s = "t,trace,running_mean\n";
    for (std::size_t i = 0; i < r.sample_t.size(); ++i) {
        s += format_double(r.sample_t[i]);
        s += ',';
        s += format_double(r.sample_trace[i]);
        s += ',';
        s += format_double(r.running_mean[i]);
        s += '\n';
    }
    return s;
}

inline nlohmann::json to_json(const lab::ConstantTable& t) {
    nlohmann::json j;
    j["d"] = t.d;
    j["c_d"] = t.c_d;
    j["omega_d"] = t.omega_d;
    j["L_cl"] = t.L_cl;
    j["lieb_multiplier"] = t.lieb_multiplier;
    j["L_upper"] = t.L_upper;
    j["c_d_provenance"] = t.c_d_provenance;
    j["L_cl_provenance"] = t.L_cl_provenance;
    j["L_upper_provenance"] = t.L_upper_provenance;
    return j;
}

inline nlohmann::json to_json(const lab::BoundReport& r) {
    nlohmann::json j;
    j["nu"] = r.nu;
    j["g_hminus1"] = r.g_hminus1;
    j["L_used"] = r.L_used;
    j["bound_exact"] = r.bound_exact;
    j["bound_rounded"] = r.bound_rounded;
    j["provenance"] = r.provenance;
    return j;
}

inline nlohmann::json to_json(const lab::RhoBoundReport& r) {
    nlohmann::json j;
    j["n"] = r.n;
    j["rho_l2"] = r.rho_l2;
    j["bound"] = r.bound;
    j["ratio"] = r.ratio;
    j["respected"] = r.respected;
    return j;
}

inline nlohmann::json to_json(const lab::ClrReport& r) {
    nlohmann::json j;
    j["negative_count"] = r.negative_count;
    j["int_v2"] = r.int_v2;
    j["bound"] = r.bound;
    j["ratio"] = r.ratio;
    j["lambda_min"] = r.lambda_min;
    j["depth"] = r.spec.depth;
    j["radius"] = r.spec.radius;
    j["box"] = r.spec.box;
    j["resolution"] = r.spec.resolution;
    j["well_dims"] = r.spec.well_dims;
    return j;
}

inline nlohmann::json to_json(const ContractionReport& r, bool include_series = true) {
    nlohmann::json j;
    j["c_emb"] = r.c_emb;
    j["max_ratio"] = r.max_ratio;
    j["initial_delta"] = r.delta.empty() ? 0.0 : r.delta.front();
    j["final_delta"] = r.delta.empty() ? 0.0 : r.delta.back();
    if (include_series) {
        j["t"] = r.t;
        j["delta"] = r.delta;
        j["ratio"] = r.ratio;
    }
    return j;
}

}  // namespace nsv
