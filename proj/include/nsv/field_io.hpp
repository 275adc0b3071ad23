#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>

#include "nsv/field.hpp"
#include "nsv/wave_grid.hpp"

#include <nlohmann/json.hpp>

namespace nsv {

static_assert(std::endian::native == std::endian::little,
              "field files are little-endian; big-endian hosts are not supported");

/// Binary field container:
///   bytes 0..3   magic "NSV4"
///   u32          format version (1)
///   u32          n_per_dim
///   f64          box_length
///   payload      4 * n^4 complex<double>, component-major, site order,
///                interleaved (re, im), little-endian
inline void save_field(const SpectralVectorField& u, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("save_field: cannot open " + path.string());
    const WaveGrid& g = u.grid();
    const char magic[4] = {'N', 'S', 'V', '4'};
    const std::uint32_t version = 1;
    const std::uint32_t n = static_cast<std::uint32_t>(g.n());
    const double box = g.box_length();
    out.write(magic, 4);
    out.write(reinterpret_cast<const char*>(&version), sizeof version);
    out.write(reinterpret_cast<const char*>(&n), sizeof n);
    out.write(reinterpret_cast<const char*>(&box), sizeof box);
    for (int c = 0; c < 4; ++c) {
        const auto& comp = u.component(c);
        out.write(reinterpret_cast<const char*>(comp.data()),
                  static_cast<std::streamsize>(comp.size() * sizeof(Complex)));
    }
    if (!out) throw std::runtime_error("save_field: write failed for " + path.string());
}

inline SpectralVectorField load_field(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("load_field: cannot open " + path.string());
    char magic[4];
    std::uint32_t version = 0, n = 0;
    double box = 0.0;
    in.read(magic, 4);
    in.read(reinterpret_cast<char*>(&version), sizeof version);
    in.read(reinterpret_cast<char*>(&n), sizeof n);
    in.read(reinterpret_cast<char*>(&box), sizeof box);
    if (!in || std::memcmp(magic, "NSV4", 4) != 0)
        throw std::runtime_error("load_field: " + path.string() + " is not a field file");
    if (version != 1)
        throw std::runtime_error("load_field: unsupported version " + std::to_string(version));
    SpectralVectorField u(make_grid(static_cast<int>(n), box));
    for (int c = 0; c < 4; ++c) {
        auto& comp = u.component(c);
        in.read(reinterpret_cast<char*>(comp.data()),
                static_cast<std::streamsize>(comp.size() * sizeof(Complex)));
    }
    if (!in) throw std::runtime_error("load_field: truncated payload in " + path.string());
    return u;
}

struct Checkpoint {
    SpectralVectorField field;
    double t = 0.0;
    std::string config_hash;
    std::uint64_t seed = 0;
};

/// Field file plus a JSON sidecar (same stem, .json) recording the solver
/// time, the configuration hash, and the seed, so a run can be resumed
/// bit-for-bit and misconfigured resumes are detectable.
inline void save_checkpoint(const SpectralVectorField& u, const std::filesystem::path& path,
                            double t, const std::string& config_hash, std::uint64_t seed) {
    save_field(u, path);
    nlohmann::json j;
    j["t"] = t;
    j["config_hash"] = config_hash;
    j["seed"] = seed;
    std::filesystem::path side = path;
    side.replace_extension(".json");
    std::ofstream out(side);
    if (!out) throw std::runtime_error("save_checkpoint: cannot open " + side.string());
    out << j.dump(2) << "\n";
}

inline Checkpoint load_checkpoint(const std::filesystem::path& path) {
    Checkpoint ck;
    ck.field = load_field(path);
    std::filesystem::path side = path;
    side.replace_extension(".json");
    std::ifstream in(side);
    if (!in) throw std::runtime_error("load_checkpoint: missing sidecar " + side.string());
    nlohmann::json j = nlohmann::json::parse(in);
    ck.t = j.at("t").get<double>();
    ck.config_hash = j.at("config_hash").get<std::string>();
    ck.seed = j.at("seed").get<std::uint64_t>();
    return ck;
}

}  // namespace nsv
