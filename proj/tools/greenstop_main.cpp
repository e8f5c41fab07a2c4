// Batch front end: solves the threshold problem, exports the kernel grid,
// runs policy simulations and cross-method verification.
//
// Exit codes: 0 success, 2 configuration error, 3 no threshold / grid
// tolerance failure, 4 verification failure (outputs still written).

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "greenstop/errors.hpp"
#include "greenstop/io.hpp"
#include "greenstop/kernel.hpp"
#include "greenstop/kernel_fourier.hpp"
#include "greenstop/model.hpp"
#include "greenstop/montecarlo.hpp"
#include "greenstop/solver.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace greenstop;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUnexpected = 1;
constexpr int kExitConfig = 2;
constexpr int kExitNoThreshold = 3;
constexpr int kExitVerification = 4;

struct CommonOpts {
    std::string config_path;
    std::string out_dir;  // empty = value from config
    std::uint64_t seed = 0;
    int threads = 0;
    CLI::Option* seed_opt = nullptr;
    CLI::Option* threads_opt = nullptr;
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
    cmd->add_option("--config", opts.config_path, "run configuration (JSON)")->required();
    cmd->add_option("--out", opts.out_dir, "output directory (default: from config, else ./out)");
    opts.seed_opt = cmd->add_option("--seed", opts.seed, "override the simulation seed");
    opts.threads_opt = cmd->add_option("--threads", opts.threads, "worker threads (0 = auto)");
}

RunConfig load_with_overrides(const CommonOpts& opts) {
    RunConfig cfg = load_run_config(opts.config_path);
    if (!opts.out_dir.empty()) cfg.out_dir = opts.out_dir;
    if (opts.seed_opt && opts.seed_opt->count() > 0) cfg.sim.seed = opts.seed;
    if (opts.threads_opt && opts.threads_opt->count() > 0) cfg.sim.threads = opts.threads;
    return cfg;
}

fs::path ensure_out_dir(const RunConfig& cfg) {
    fs::path dir(cfg.out_dir);
    fs::create_directories(dir);
    return dir;
}

// warm the on-demand kernel from a previous run's cache if one matches
void try_adopt_cache(FourierGreenKernel& kernel, const fs::path& cache_path) {
    if (!fs::exists(cache_path)) return;
    try {
        const KernelGrid cached = load_kernel_cache(cache_path.string());
        const std::size_t adopted = kernel.adopt(cached);
        if (adopted > 0)
            std::printf("reused %zu kernel rows from %s\n", adopted, cache_path.string().c_str());
    } catch (const std::exception&) {
        // stale or foreign cache: recompute silently
    }
}

int cmd_solve(const CommonOpts& opts) {
    const RunConfig cfg = load_with_overrides(opts);
    const fs::path out = ensure_out_dir(cfg);
    const Problem problem = cfg.problem();

    FourierGreenKernel kernel(problem, cfg.kernel);
    const fs::path cache_path = out / "kernel.cache";
    try_adopt_cache(kernel, cache_path);

    SolveReport solve = solve_threshold(problem, kernel, cfg.solver);
    SolveReport report = verify_hypotheses(problem, kernel, solve.threshold, cfg.solver);
    report.sign_changes = solve.sign_changes;
    report.multiple_sign_changes = solve.multiple_sign_changes;

    // plot data: value function and reward across the check range
    const int n_plot = 101;
    std::vector<double> xs(n_plot), vs(n_plot), gs(n_plot);
    for (int i = 0; i < n_plot; ++i) {
        xs[i] = cfg.check_grid.lo + (cfg.check_grid.hi - cfg.check_grid.lo) * i / (n_plot - 1);
        vs[i] = value_function(problem, kernel, report.threshold, xs[i]);
        gs[i] = problem.reward(xs[i]);
    }

    write_text_file((out / "report.json").string(), solve_report_to_json(report));
    write_value_csv((out / "value_function.csv").string(), xs, vs, gs);
    save_kernel_cache(cache_path.string(), kernel.materialize(kernel.snapshot_points()));

    std::printf("threshold      %.6f\n", report.threshold);
    std::printf("residual       %+.3e (bound %.3e)\n", report.residual_at_threshold,
                report.residual_bound);
    std::printf("verified       %s\n", report.verified() ? "yes" : "NO");
    std::printf("report         %s\n", (out / "report.json").string().c_str());
    return report.verified() ? kExitOk : kExitVerification;
}

int cmd_kernel(const CommonOpts& opts) {
    const RunConfig cfg = load_with_overrides(opts);
    const fs::path out = ensure_out_dir(cfg);
    const Problem problem = cfg.problem();

    FourierGrid grid = cfg.kernel;
    grid.x_values = cfg.check_grid.points();
    const KernelGrid kg = build_kernel_grid(problem, grid, cfg.sim.threads);

    double worst_mass = 0.0, worst_identity = 0.0;
    for (const KernelRow& r : kg.rows) {
        worst_mass = std::max(worst_mass, std::abs(r.mass * problem.alpha - 1.0));
        worst_identity = std::max(worst_identity, std::abs(r.identity_residual));
        std::printf("x=%+9.4f  mass=%.8f  identity=%+.3e  clipped=%.3e  tail=%.3e\n",
                    r.x, r.mass, r.identity_residual, r.clipped_mass, r.tail_mass);
    }
    std::printf("max relative mass error  %.3e (tolerance %.3e)\n", worst_mass, grid.mass_tol);
    std::printf("max identity residual    %.3e (tolerance %.3e)\n", worst_identity,
                grid.identity_tol);

    write_kernel_csv((out / "kernel.csv").string(), kg);
    save_kernel_cache((out / "kernel.cache").string(), kg);
    std::printf("kernel grid    %s\n", (out / "kernel.csv").string().c_str());
    return kExitOk;
}

// the solved threshold from a prior `solve` run in the same out dir
double threshold_from_report(const fs::path& out) {
    const fs::path path = out / "report.json";
    std::ifstream in(path);
    if (!in)
        throw ConfigError("no threshold given and no report.json in " + out.string() +
                          " (run `solve` first or pass --threshold)");
    json doc;
    in >> doc;
    if (!doc.contains("threshold") || !doc["threshold"].is_number())
        throw ConfigError("report.json has no numeric 'threshold'");
    return doc["threshold"].get<double>();
}

int cmd_simulate(const CommonOpts& opts, double x0, std::optional<double> threshold,
                 bool dump_paths) {
    const RunConfig cfg = load_with_overrides(opts);
    const fs::path out = ensure_out_dir(cfg);
    const Problem problem = cfg.problem();

    const double b = threshold ? *threshold : threshold_from_report(out);
    std::vector<PathRecord> records;
    const PolicyEstimate est =
        estimate_policy_value(problem, x0, b, cfg.sim, dump_paths ? &records : nullptr);

    // step-halving study: same seed at dt/2 exposes the grid-detection bias
    SimConfig halved = cfg.sim;
    halved.dt = cfg.sim.dt / 2.0;
    const PolicyEstimate est_half = estimate_policy_value(problem, x0, b, halved);

    json doc = json::parse(policy_estimate_to_json(est));
    doc["dt"] = cfg.sim.dt;
    doc["halved_dt"] = json{{"dt", halved.dt},
                            {"mean", est_half.mean},
                            {"se", est_half.std_error},
                            {"mean_shift", est_half.mean - est.mean}};
    doc["truncation_bias_bound"] =
        cfg.sim.horizon_eps * (problem.reward(b) + 1.0 / problem.params.beta);
    write_text_file((out / "estimate.json").string(), doc.dump(2) + "\n");
    if (dump_paths) write_paths_csv((out / "paths.csv").string(), records);

    std::printf("policy value   %.6f +- %.6f (95%%: [%.6f, %.6f])\n", est.mean, est.std_error,
                est.ci95.first, est.ci95.second);
    std::printf("halving shift  %+.6f at dt/2 = %g\n", est_half.mean - est.mean, halved.dt);
    std::printf("threshold      %.6f, start %.4f, paths %lld, truncated %.4f\n", b, x0,
                est.n_paths, est.truncated_fraction);
    return kExitOk;
}

int cmd_verify(const CommonOpts& opts) {
    const RunConfig cfg = load_with_overrides(opts);
    const fs::path out = ensure_out_dir(cfg);
    const Problem problem = cfg.problem();
    const double threshold = threshold_from_report(out);

    FourierGreenKernel kernel(problem, cfg.kernel);
    try_adopt_cache(kernel, out / "kernel.cache");

    json checks = json::array();
    bool all_ok = true;
    auto record = [&](const std::string& name, double statistic, double se, double n_se,
                      bool pass, const json& extra = json::object()) {
        json c = extra;
        c["check"] = name;
        c["statistic"] = statistic;
        c["se"] = se;
        c["n_se"] = n_se;
        c["pass"] = pass;
        checks.push_back(c);
        all_ok = all_ok && pass;
        std::printf("%-28s %s  (stat %+.4e, se %.4e)\n", name.c_str(),
                    pass ? "PASS" : "FAIL", statistic, se);
    };

    // stopped-expectation agreement on the continuation side
    for (double x0 : {-1.0, 0.0, 0.5}) {
        if (x0 >= threshold) continue;
        const HarmonicityResult h = harmonicity_check(problem, kernel, threshold, x0, cfg.sim);
        record("harmonicity(x0=" + std::to_string(x0).substr(0, 4) + ")", h.diff, h.mc_se,
               3.0, h.diff <= 3.0 * h.mc_se,
               json{{"value", h.value}, {"mc_mean", h.mc_mean}});
    }

    // occupation-ratio factorization below the start points
    {
        const RatioCheck rc = green_ratio_check(problem.params, problem.alpha, 1.0, 0.0,
                                                Interval{-1.0, -0.5}, Interval{-2.0, -1.5},
                                                cfg.sim);
        const double diff = std::abs(rc.ratio1 - rc.ratio2);
        record("occupation_ratio", diff, rc.se_diff, 3.0,
               rc.conclusive && diff <= 3.0 * rc.se_diff,
               json{{"ratio1", rc.ratio1}, {"ratio2", rc.ratio2},
                    {"conclusive", rc.conclusive}});
    }

    // the solved threshold should not be beaten by its neighbours
    {
        const std::vector<double> bs{threshold - 0.25, threshold, threshold + 0.25};
        const ScanResult scan = optimality_scan(problem, 0.0, bs, cfg.sim);
        bool pass = true;
        double worst = 0.0, worst_se = 0.0;
        for (std::size_t i = 0; i < bs.size(); ++i) {
            if (i == 1) continue;
            const PolicyEstimate d = scan.paired_difference(i, 1);  // rival minus solved
            if (d.mean > worst) { worst = d.mean; worst_se = d.std_error; }
            if (d.mean > 3.0 * d.std_error) pass = false;
        }
        record("optimality_scan", worst, worst_se, 3.0, pass,
               json{{"thresholds", bs}});
    }

    // marginal mean law at a few horizons
    for (double t : {0.5, 1.0, 2.0}) {
        const double x0 = 0.0;
        SimConfig law_cfg = cfg.sim;
        law_cfg.n_paths = std::min<long long>(cfg.sim.n_paths, 20000);
        const std::vector<double> xs =
            sample_marginal(problem.params, x0, t, cfg.sim.dt, law_cfg.n_paths, law_cfg.seed);
        double mean = 0.0;
        for (double v : xs) mean += v;
        mean /= static_cast<double>(xs.size());
        double ss = 0.0;
        for (double v : xs) ss += (v - mean) * (v - mean);
        const double se = std::sqrt(ss / static_cast<double>(xs.size() - 1) /
                                    static_cast<double>(xs.size()));
        const ModelParams& p = problem.params;
        const double expected = (1.0 - std::exp(-p.gamma * t)) * p.lambda / (p.beta * p.gamma) +
                                x0 * std::exp(-p.gamma * t);
        record("marginal_mean(t=" + std::to_string(t).substr(0, 3) + ")",
               mean - expected, se, 4.0, std::abs(mean - expected) <= 4.0 * se,
               json{{"expected", expected}, {"empirical", mean}});
    }

    json doc;
    doc["threshold"] = threshold;
    doc["checks"] = checks;
    doc["all_pass"] = all_ok;
    write_text_file((out / "verify.json").string(), doc.dump(2) + "\n");
    std::printf("verify         %s\n", (out / "verify.json").string().c_str());
    return all_ok ? kExitOk : kExitVerification;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"threshold solver for discounted stopping of a jump mean-reverting process"};
    app.require_subcommand(1);

    CommonOpts solve_opts, kernel_opts, sim_opts, verify_opts;
    CLI::App* solve = app.add_subcommand("solve", "solve the threshold problem and verify");
    add_common(solve, solve_opts);
    CLI::App* kernel = app.add_subcommand("kernel", "compute and export the kernel grid");
    add_common(kernel, kernel_opts);
    CLI::App* simulate = app.add_subcommand("simulate", "Monte Carlo policy value");
    add_common(simulate, sim_opts);
    double x0 = 0.0;
    double threshold_value = 0.0;
    bool dump_paths = false;
    simulate->add_option("--x0", x0, "start state (default 0)");
    CLI::Option* threshold_opt = simulate->add_option(
        "--threshold", threshold_value, "stopping threshold (default: from report.json)");
    simulate->add_flag("--dump-paths", dump_paths, "write per-path CSV");
    CLI::App* verify = app.add_subcommand("verify", "Monte Carlo cross-checks of a solved run");
    add_common(verify, verify_opts);

    CLI11_PARSE(app, argc, argv);

    try {
        if (solve->parsed()) return cmd_solve(solve_opts);
        if (kernel->parsed()) return cmd_kernel(kernel_opts);
        if (simulate->parsed()) {
            std::optional<double> threshold;
            if (threshold_opt->count() > 0) threshold = threshold_value;
            return cmd_simulate(sim_opts, x0, threshold, dump_paths);
        }
        if (verify->parsed()) return cmd_verify(verify_opts);
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kExitConfig;
    } catch (const NoThresholdError& e) {
        std::fprintf(stderr, "no threshold: %s\n", e.what());
        return kExitNoThreshold;
    } catch (const GridResolutionError& e) {
        std::fprintf(stderr, "kernel grid: %s\n", e.what());
        return kExitNoThreshold;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitUnexpected;
    }
    return kExitUnexpected;
}
