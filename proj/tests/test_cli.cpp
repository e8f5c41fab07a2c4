#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#ifndef GREENSTOP_CLI_PATH
#error "GREENSTOP_CLI_PATH must point at the built binary"
#endif

namespace fs = std::filesystem;

namespace {

int run_cli(const std::string& args) {
    const std::string cmd = std::string(GREENSTOP_CLI_PATH) + " " + args + " > /dev/null 2>&1";
    const int rc = std::system(cmd.c_str());
    return WEXITSTATUS(rc);
}

fs::path work_dir() {
    static const fs::path dir = [] {
        fs::path d = fs::temp_directory_path() / "greenstop_cli_test";
        fs::remove_all(d);
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

fs::path write_file(const std::string& name, const std::string& body) {
    const fs::path p = work_dir() / name;
    std::ofstream out(p);
    out << body;
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

// small but solvable setup: default kernel grid, light simulation budget
std::string base_config(const std::string& out_dir, const std::string& extra_kernel = "",
                        const std::string& extra_solver = "") {
    std::ostringstream os;
    os << R"({
  "problem": {"gamma": 1.0, "sigma": 1.0, "lambda": 1.0, "beta": 1.0, "alpha": 1.0},
  "kernel": {"n_z": 4096, "z_max": 40.0)" << extra_kernel << R"(},
  "solver": {"root_tol": 1e-6, "check_grid": {"lo": -2.0, "hi": 3.0, "n": 11})"
       << extra_solver << R"(},
  "sim": {"dt": 0.001, "n_paths": 5000, "seed": 7, "horizon_eps": 1e-5},
  "out": {"dir": ")" << out_dir << R"("}
})";
    return os.str();
}

} // namespace

TEST_CASE("solve writes report and value data, exits clean") {
    const fs::path out = work_dir() / "solve_out";
    const fs::path cfg = write_file("solve.json", base_config(out.string()));

    CHECK(run_cli("solve --config " + cfg.string()) == 0);
    REQUIRE(fs::exists(out / "report.json"));
    CHECK(fs::exists(out / "value_function.csv"));
    CHECK(fs::exists(out / "kernel.cache"));

    const nlohmann::json report = nlohmann::json::parse(slurp(out / "report.json"));
    CHECK(report["threshold"].get<double>() == doctest::Approx(1.1442).epsilon(0.01));
    CHECK(report["verified"] == true);
    CHECK(report["flags"]["majorant"] == true);
    CHECK(report["sign_changes"].size() >= 1);

    // rerun reuses the cache and reproduces the report byte for byte
    const std::string first = slurp(out / "report.json");
    CHECK(run_cli("solve --config " + cfg.string()) == 0);
    CHECK(slurp(out / "report.json") == first);
}

TEST_CASE("kernel subcommand exports grid and diagnostics") {
    const fs::path out = work_dir() / "kernel_out";
    const fs::path cfg = write_file("kernel.json", base_config(out.string()));
    CHECK(run_cli("kernel --config " + cfg.string()) == 0);
    CHECK(fs::exists(out / "kernel.csv"));
    CHECK(fs::exists(out / "kernel.cache"));

    std::ifstream in(out / "kernel.csv");
    std::string line;
    std::getline(in, line);
    CHECK(line.rfind("#", 0) == 0);
    std::getline(in, line);
    CHECK(line == "x,y,density");
}

TEST_CASE("simulate produces an estimate consistent with the solved value") {
    const fs::path out = work_dir() / "solve_out";  // reuse the solved run
    const fs::path cfg = write_file("sim.json", base_config(out.string()));
    CHECK(run_cli("simulate --config " + cfg.string() + " --x0 0.0") == 0);
    REQUIRE(fs::exists(out / "estimate.json"));
    const nlohmann::json est = nlohmann::json::parse(slurp(out / "estimate.json"));
    // value near 0.648 at x0 = 0; generous band for 2000 paths
    CHECK(est["mean"].get<double>() > 0.4);
    CHECK(est["mean"].get<double>() < 0.9);

    // same seed, same bytes
    const std::string first = slurp(out / "estimate.json");
    CHECK(run_cli("simulate --config " + cfg.string() + " --x0 0.0") == 0);
    CHECK(slurp(out / "estimate.json") == first);

    // explicit threshold and path dump
    CHECK(run_cli("simulate --config " + cfg.string() +
                  " --x0 0.0 --threshold 1.2 --dump-paths") == 0);
    CHECK(fs::exists(out / "paths.csv"));
}

TEST_CASE("verify chains the stochastic cross-checks") {
    const fs::path out = work_dir() / "solve_out";
    const fs::path cfg = write_file("verify.json_cfg", base_config(out.string()));
    CHECK(run_cli("verify --config " + cfg.string()) == 0);
    REQUIRE(fs::exists(out / "verify.json"));
    const nlohmann::json doc = nlohmann::json::parse(slurp(out / "verify.json"));
    CHECK(doc["all_pass"] == true);
    CHECK(doc["checks"].size() >= 6);
}

TEST_CASE("config errors exit 2") {
    CHECK(run_cli("solve --config /nonexistent/cfg.json") == 2);

    const fs::path bad_alpha = write_file("bad_alpha.json",
        R"({"problem": {"gamma": 1, "sigma": 1, "lambda": 1, "beta": 1, "alpha": 0}})");
    CHECK(run_cli("solve --config " + bad_alpha.string()) == 2);

    const fs::path bad_nz = write_file("bad_nz.json",
        R"({"problem": {"gamma": 1, "sigma": 1, "lambda": 1, "beta": 1, "alpha": 1},
            "kernel": {"n_z": 1000}})");
    CHECK(run_cli("kernel --config " + bad_nz.string()) == 2);

    const fs::path degenerate = write_file("degenerate.json",
        R"({"problem": {"gamma": 1, "sigma": 0, "lambda": 0, "beta": 1, "alpha": 1}})");
    CHECK(run_cli("simulate --config " + degenerate.string() + " --threshold 1.0") == 2);

    const fs::path unknown = write_file("unknown.json",
        R"({"problem": {"gamma": 1, "sigma": 1, "lambda": 1, "beta": 1, "alpha": 1},
            "mystery": {}})");
    CHECK(run_cli("solve --config " + unknown.string()) == 2);
}

TEST_CASE("unresolvable grids exit 3") {
    // pure-jump process: the transform has no Gaussian decay
    const fs::path pure_jump = write_file("pure_jump.json",
        R"({"problem": {"gamma": 1, "sigma": 0, "lambda": 1, "beta": 1, "alpha": 1}})");
    CHECK(run_cli("solve --config " + pure_jump.string()) == 3);

    // unreachable mass tolerance
    const fs::path strict = write_file("strict.json",
        R"({"problem": {"gamma": 1, "sigma": 1, "lambda": 1, "beta": 1, "alpha": 1},
            "kernel": {"mass_tol": 1e-13}})");
    CHECK(run_cli("kernel --config " + strict.string()) == 3);
}

TEST_CASE("verification failure exits 4 but still writes the report") {
    const fs::path out = work_dir() / "fail_out";
    const fs::path cfg = write_file("strict_solver.json",
        base_config(out.string(), "", R"(, "identity_tol": 1e-12)"));
    CHECK(run_cli("solve --config " + cfg.string()) == 4);
    REQUIRE(fs::exists(out / "report.json"));
    const nlohmann::json report = nlohmann::json::parse(slurp(out / "report.json"));
    CHECK(report["verified"] == false);
    CHECK(report["flags"]["identity"] == false);
}
