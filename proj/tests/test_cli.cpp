#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "nsv/cli.hpp"

using namespace nsv;
namespace fs = std::filesystem;

namespace {

fs::path fresh_root(const std::string& name) {
    const fs::path root = fs::temp_directory_path() / ("nsv_cli_" + name);
    fs::remove_all(root);
    fs::create_directories(root);
    return root;
}

fs::path find_run_dir(const fs::path& root, const std::string& prefix) {
    for (const auto& e : fs::directory_iterator(root)) {
        if (e.is_directory() && e.path().filename().string().rfind(prefix + "-", 0) == 0)
            return e.path();
    }
    FAIL("no run directory with prefix " + prefix + " under " + root.string());
    return {};
}

nlohmann::json read_json(const fs::path& p) {
    std::ifstream in(p);
    REQUIRE(in.good());
    return nlohmann::json::parse(in);
}

std::string read_bytes(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

int run(std::vector<std::string> args) { return cli::run_cli(std::move(args)); }

}  // namespace

TEST_CASE("selftest subcommand passes") { CHECK(run({"selftest"}) == 0); }

TEST_CASE("usage errors exit with the configuration code") {
    CHECK(run({}) == 2);                           // no subcommand
    CHECK(run({"bound", "--no-such-flag"}) == 2);  // unknown option
    CHECK(run({"not-a-subcommand"}) == 2);
    CHECK(run({"bound", "--nu", "-1"}) == 2);  // rejected by dimension_bound
}

TEST_CASE("bound subcommand writes the closed-form report") {
    const fs::path root = fresh_root("bound");
    REQUIRE(run({"bound", "--g-norm", "1", "--nu", "1", "--out-dir", root.string()}) == 0);
    const fs::path dir = find_run_dir(root, "bound");
    const nlohmann::json j = read_json(dir / "bound.json");
    CHECK(j.at("bound_exact").get<double>() == Catch::Approx(0.2292645).margin(5e-7));
    CHECK(j.at("bound_rounded").get<double>() == 0.23);
    CHECK(j.at("constants").at("d").get<int>() == 4);
    CHECK(j.at("constants").at("lieb_multiplier").get<double>() == 6.034);
    CHECK(j.contains("config_hash"));
    REQUIRE(fs::exists(dir / "sidecar.json"));
}

TEST_CASE("identical physics produces identical report bytes") {
    const fs::path ra = fresh_root("rerun_a");
    const fs::path rb = fresh_root("rerun_b");
    REQUIRE(run({"bound", "--g-norm", "2", "--nu", "0.5", "--out-dir", ra.string()}) == 0);
    REQUIRE(run({"bound", "--g-norm", "2", "--nu", "0.5", "--out-dir", rb.string()}) == 0);
    const fs::path da = find_run_dir(ra, "bound");
    const fs::path db = find_run_dir(rb, "bound");
    // same canonical config hash, so the same directory suffix
    CHECK(da.filename() == db.filename());
    CHECK(read_bytes(da / "bound.json") == read_bytes(db / "bound.json"));
}

TEST_CASE("bound subcommand honors the csv report format") {
    const fs::path root = fresh_root("bound_csv");
    REQUIRE(run({"bound", "--report-format", "csv", "--out-dir", root.string()}) == 0);
    const fs::path dir = find_run_dir(root, "bound");
    const std::string csv = read_bytes(dir / "bound.csv");
    CHECK(csv.rfind("key,value\n", 0) == 0);
    CHECK(csv.find("bound_exact,") != std::string::npos);
}

TEST_CASE("decay-test passes on a quick grid and fails an impossible tolerance") {
    const fs::path root = fresh_root("decay");
    REQUIRE(run({"decay-test", "--grid-n", "8", "--t", "2", "--out-dir", root.string()}) == 0);
    // non-default box side: the exact decay rate is box-independent
    REQUIRE(run({"decay-test", "--grid-n", "8", "--box", "12.566370614359172", "--t", "2",
                 "--out-dir", root.string()}) == 0);
    CHECK(run({"decay-test", "--grid-n", "8", "--t", "2", "--tol", "1e-18", "--out-dir",
               root.string()}) == 4);
}

TEST_CASE("steady-test reproduces the shear equilibrium through the driver") {
    const fs::path root = fresh_root("steady");
    REQUIRE(run({"steady-test", "--nu", "1", "--t", "20", "--tol", "1e-7", "--out-dir",
                 root.string()}) == 0);
    const nlohmann::json j = read_json(find_run_dir(root, "steady-test") / "steady.json");
    CHECK(j.at("pass").get<bool>());
    CHECK(j.at("rhs_at_steady").get<double>() <= 1e-12);
}

TEST_CASE("contraction-test stays under the Gronwall envelope") {
    const fs::path root = fresh_root("contraction");
    REQUIRE(run({"contraction-test", "--t", "1", "--seeds", "2", "--out-dir", root.string()}) == 0);
    const nlohmann::json j = read_json(find_run_dir(root, "contraction-test") / "contraction.json");
    CHECK(j.at("pass").get<bool>());
    CHECK(j.at("worst_ratio").get<double>() <= 1.0 + 1e-6);
    CHECK(j.at("c_emb").get<double>() > 0.0);
}

TEST_CASE("trace subcommand reports q(n) and the majorants") {
    const fs::path root = fresh_root("trace");
    REQUIRE(run({"trace", "--grid-n", "8", "--t", "1", "--dt", "0.05", "--spin-up", "0", "--n-max",
                 "2", "--out-dir", root.string()}) == 0);
    const fs::path dir = find_run_dir(root, "trace");
    const nlohmann::json j = read_json(dir / "trace_summary.json");
    REQUIRE(j.at("reports").size() == 2);
    CHECK(j.at("all_bounds_respected").get<bool>());
    for (const auto& r : j.at("reports")) CHECK(r.at("q").get<double>() <= r.at("bound").get<double>() + 1e-9);
    CHECK(fs::exists(dir / "trace_n1.csv"));
    CHECK(fs::exists(dir / "trace_n2.csv"));
}

TEST_CASE("rho-check passes on a small budget") {
    const fs::path root = fresh_root("rho");
    REQUIRE(run({"rho-check", "--grid-n", "8", "--trials", "6", "--n-max", "3", "--out-dir",
                 root.string()}) == 0);
    const nlohmann::json j = read_json(find_run_dir(root, "rho-check") / "rho.json");
    CHECK(j.at("all_respected").get<bool>());
    REQUIRE(j.at("worst_ratio_by_n").size() == 3);
    for (const auto& r : j.at("worst_ratio_by_n")) CHECK(r.get<double>() <= 1.0);
}

TEST_CASE("clr-check sweeps depths and respects the counting bound") {
    const fs::path root = fresh_root("clr");
    REQUIRE(run({"clr-check", "--resolution", "32", "--depths", "0", "20", "--out-dir",
                 root.string()}) == 0);
    const nlohmann::json j = read_json(find_run_dir(root, "clr-check") / "clr.json");
    REQUIRE(j.at("results").size() == 2);
    CHECK(j.at("results")[0].at("negative_count").get<int>() == 0);
    CHECK(j.at("results")[1].at("negative_count").get<int>() >= 1);
    CHECK(j.at("all_respected").get<bool>());
}

TEST_CASE("simulate reports numerical failure for a non-finite start") {
    const fs::path root = fresh_root("nanstart");
    const auto g = make_grid(8);
    RandomFieldSpec spec;
    spec.seed = 9;
    SpectralVectorField u = random_solenoidal_field(g, spec);
    u.at(0, g->site_of({1, 0, 0, 0})) = Complex(std::numeric_limits<double>::quiet_NaN(), 0.0);
    const fs::path bad = root / "bad.nsv4";
    save_field(u, bad);
    CHECK(run({"simulate", "--u0", bad.string(), "--t", "0.1", "--dt", "0.01", "--out-dir",
               root.string()}) == 3);
}

TEST_CASE("simulate writes trajectory, report and final state") {
    const fs::path root = fresh_root("simulate");
    REQUIRE(run({"simulate", "--grid-n", "8", "--t", "0.5", "--dt", "0.01", "--save-every", "10",
                 "--forcing", "low-mode", "--g-norm", "1", "--out-dir", root.string()}) == 0);
    const fs::path dir = find_run_dir(root, "simulate");
    REQUIRE(fs::exists(dir / "trajectory.csv"));
    REQUIRE(fs::exists(dir / "final_state.nsv4"));
    const nlohmann::json j = read_json(dir / "report.json");
    CHECK(j.at("samples").get<int>() == 6);
    CHECK(j.at("g_hminus1").get<double>() == Catch::Approx(1.0).epsilon(1e-12));
    const std::string csv = read_bytes(dir / "trajectory.csv");
    CHECK(csv.rfind("t,enstrophy,g_dot_u,residual,bound_rhs\n", 0) == 0);
    const SpectralVectorField final_state = load_field(dir / "final_state.nsv4");
    CHECK(final_state.grid().n() == 8);
}

TEST_CASE("simulate resumes from its own checkpoints") {
    const fs::path root = fresh_root("resume");
    REQUIRE(run({"simulate", "--grid-n", "8", "--t", "1", "--dt", "0.01", "--save-every", "25",
                 "--checkpoint-every", "50", "--forcing", "low-mode", "--out-dir",
                 root.string()}) == 0);
    const fs::path dir = find_run_dir(root, "simulate");
    const fs::path mid = dir / "checkpoint_00000050.nsv4";
    REQUIRE(fs::exists(mid));
    const std::string before = read_bytes(dir / "final_state.nsv4");
    REQUIRE(run({"simulate", "--grid-n", "8", "--t", "1", "--dt", "0.01", "--save-every", "25",
                 "--checkpoint-every", "50", "--forcing", "low-mode", "--resume", mid.string(),
                 "--out-dir", root.string()}) == 0);
    // the resumed run lands in the same run directory (same physics config)
    // and reproduces the final state byte for byte
    CHECK(read_bytes(dir / "final_state.nsv4") == before);
}

TEST_CASE("options can come from a config file") {
    const fs::path root = fresh_root("config");
    const fs::path ini = root / "run.ini";
    {
        std::ofstream out(ini);
        out << "[bound]\n"
               "g-norm=2.5\n"
               "nu=0.5\n";
    }
    REQUIRE(run({"--config", ini.string(), "bound", "--out-dir", root.string()}) == 0);
    const nlohmann::json j = read_json(find_run_dir(root, "bound") / "bound.json");
    CHECK(j.at("g_hminus1").get<double>() == 2.5);
    CHECK(j.at("nu").get<double>() == 0.5);
    CHECK(j.at("bound_exact").get<double>() == Catch::Approx(22.92645).margin(5e-5));
}
