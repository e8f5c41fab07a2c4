#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "greenstop/errors.hpp"
#include "greenstop/kernel.hpp"
#include "greenstop/model.hpp"
#include "greenstop/montecarlo.hpp"
#include "greenstop/solver.hpp"

using namespace greenstop;

namespace {

const ModelParams kJump{1.0, 1.0, 1.0, 1.0};
const ModelParams kNoJump{1.0, 1.0, 0.0, 1.0};

double mean_of(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

double var_of(const std::vector<double>& v, double m) {
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return s / static_cast<double>(v.size() - 1);
}

} // namespace

TEST_CASE("pure decay without noise is deterministic") {
    // raw parameter struct: the degenerate combination is rejected at
    // problem construction, but the stepper itself is well-defined
    ModelParams still{1.0, 0.0, 0.0, 1.0};
    std::mt19937_64 rng(1);
    CHECK(step_exact(still, 1.0, 1.0, rng) == doctest::Approx(std::exp(-1.0)).epsilon(1e-14));
    CHECK(step_exact(still, -2.0, 0.5, rng) ==
          doctest::Approx(-2.0 * std::exp(-0.5)).epsilon(1e-14));
}

TEST_CASE("marginal mean follows the decay-plus-jump-drift law") {
    const long long n = 40000;
    for (double t : {0.5, 1.0}) {
        const std::vector<double> xs = sample_marginal(kJump, 0.0, t, 1e-2, n, 99);
        const double m = mean_of(xs);
        const double se = std::sqrt(var_of(xs, m) / static_cast<double>(n));
        const double expected = (1.0 - std::exp(-t));  // lambda/(beta gamma) = 1, x0 = 0
        CHECK(std::abs(m - expected) < 4.0 * se);
    }
    // non-zero start folds in the decayed initial condition
    const std::vector<double> xs = sample_marginal(kJump, 2.0, 1.0, 1e-2, n, 17);
    const double m = mean_of(xs);
    const double se = std::sqrt(var_of(xs, m) / static_cast<double>(n));
    CHECK(std::abs(m - ((1.0 - std::exp(-1.0)) + 2.0 * std::exp(-1.0))) < 4.0 * se);

    // no jumps: pure decay of the mean
    const std::vector<double> ys = sample_marginal(kNoJump, 1.5, 0.5, 1e-2, n, 23);
    const double m2 = mean_of(ys);
    const double se2 = std::sqrt(var_of(ys, m2) / static_cast<double>(n));
    CHECK(std::abs(m2 - 1.5 * std::exp(-0.5)) < 4.0 * se2);
}

TEST_CASE("no-jump variance matches the stationary-approach law") {
    const long long n = 40000;
    const double t = 1.0;
    const std::vector<double> xs = sample_marginal(kNoJump, 0.0, t, 1e-2, n, 7);
    const double m = mean_of(xs);
    const double v = var_of(xs, m);
    const double expected = (1.0 - std::exp(-2.0 * t)) / 2.0;
    // standard error of a Gaussian sample variance
    const double se_var = expected * std::sqrt(2.0 / static_cast<double>(n - 1));
    CHECK(std::abs(v - expected) < 4.0 * se_var);
}

TEST_CASE("policy value: immediate stop when the threshold is behind us") {
    Problem prob = Problem::jump_ou(kJump, 1.0);
    SimConfig cfg;
    cfg.n_paths = 100;
    const PolicyEstimate est = estimate_policy_value(prob, 2.0, 1.5, cfg);
    CHECK(est.mean == 2.0);
    CHECK(est.std_error == 0.0);
    CHECK(est.ci95.first == est.ci95.second);

    // negative start, threshold right at the start point
    const PolicyEstimate zero = estimate_policy_value(prob, -1.0, -1.0, cfg);
    CHECK(zero.mean == 0.0);  // reward of a negative state
}

TEST_CASE("policy value: unreachable threshold pays nothing") {
    Problem prob = Problem::jump_ou(kJump, 1.0);
    SimConfig cfg;
    cfg.n_paths = 200;
    cfg.dt = 5e-3;
    const PolicyEstimate est = estimate_policy_value(prob, 0.0, 1e6, cfg);
    CHECK(est.mean == 0.0);
    CHECK(est.std_error == 0.0);
    CHECK(est.truncated_fraction == 1.0);
}

TEST_CASE("same seed reproduces estimates bit for bit") {
    Problem prob = Problem::jump_ou(kJump, 1.0);
    SimConfig cfg;
    cfg.n_paths = 2000;
    cfg.dt = 2e-3;
    cfg.seed = 4242;
    const PolicyEstimate a = estimate_policy_value(prob, 0.0, 1.1, cfg);
    const PolicyEstimate b = estimate_policy_value(prob, 0.0, 1.1, cfg);
    CHECK(a.mean == b.mean);
    CHECK(a.std_error == b.std_error);

    cfg.seed = 4243;
    const PolicyEstimate c = estimate_policy_value(prob, 0.0, 1.1, cfg);
    CHECK(a.mean != c.mean);

    // thread count must not change the result
    cfg.seed = 4242;
    cfg.threads = 4;
    const PolicyEstimate d = estimate_policy_value(prob, 0.0, 1.1, cfg);
    CHECK(a.mean == d.mean);
    CHECK(a.std_error == d.std_error);
}

TEST_CASE("crossing records: jumps overshoot, diffusion lands close") {
    Problem prob = Problem::jump_ou(kJump, 1.0);
    SimConfig cfg;
    cfg.n_paths = 4000;
    cfg.dt = 1e-3;
    cfg.seed = 31;
    std::vector<PathRecord> records;
    const double b = 1.1442;
    estimate_policy_value(prob, 0.0, b, cfg, &records);

    int jumps = 0, diffusive = 0;
    for (const PathRecord& r : records) {
        if (r.crossing == CrossingType::jump) {
            ++jumps;
            // payoff = e^{-tau} X_tau with X_tau strictly past the threshold
            CHECK(r.payoff * std::exp(r.tau) > b);
        } else if (r.crossing == CrossingType::diffusive) {
            ++diffusive;
            const double x_tau = r.payoff * std::exp(r.tau);
            CHECK(x_tau >= b);
            CHECK(x_tau - b < 0.5);  // a few step widths at most
        }
    }
    CHECK(jumps > 100);
    CHECK(diffusive > 100);
}

TEST_CASE("optimality scan reduces to the single estimate and respects ties") {
    Problem prob = Problem::jump_ou(kJump, 1.0);
    SimConfig cfg;
    cfg.n_paths = 1000;
    cfg.dt = 2e-3;
    cfg.seed = 5;

    const ScanResult single = optimality_scan(prob, 0.0, {1.2}, cfg);
    const PolicyEstimate direct = estimate_policy_value(prob, 0.0, 1.2, cfg);
    CHECK(single.estimates[0].mean == direct.mean);
    CHECK(single.estimates[0].std_error == direct.std_error);

    // all thresholds at or below the start: every policy stops at once
    const ScanResult flat = optimality_scan(prob, 1.0, {0.2, 0.5, 1.0}, cfg);
    for (const PolicyEstimate& e : flat.estimates) CHECK(e.mean == 1.0);
    const PolicyEstimate d = flat.paired_difference(0, 2);
    CHECK(d.mean == 0.0);
    CHECK(d.std_error == 0.0);

    CHECK_THROWS_AS(optimality_scan(prob, 0.0, {}, cfg), ConfigError);
}

TEST_CASE("occupation ratios: identical start points give unit ratios") {
    SimConfig cfg;
    cfg.n_paths = 500;
    cfg.dt = 2e-3;
    cfg.horizon_eps = 1e-4;
    const RatioCheck rc = green_ratio_check(kJump, 1.0, 0.0, 0.0, Interval{-1.0, -0.5},
                                            Interval{-2.0, -1.5}, cfg);
    CHECK(rc.ratio1 == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(rc.ratio2 == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(rc.se_diff == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("occupation ratios are discount factors, at most one") {
    SimConfig cfg;
    cfg.n_paths = 20000;
    cfg.dt = 2e-3;
    cfg.horizon_eps = 1e-5;
    cfg.seed = 77;
    const RatioCheck rc = green_ratio_check(kJump, 1.0, 0.5, 0.0, Interval{-1.0, -0.5},
                                            Interval{-1.6, -1.1}, cfg);
    CHECK(rc.conclusive);
    CHECK(rc.ratio1 <= 1.0 + 3.0 * rc.se_diff);
    CHECK(rc.ratio2 <= 1.0 + 3.0 * rc.se_diff);
    CHECK(std::abs(rc.ratio1 - rc.ratio2) <= 3.0 * rc.se_diff);
}

TEST_CASE("occupation ratio input validation") {
    SimConfig cfg;
    cfg.n_paths = 10;
    CHECK_THROWS_AS(green_ratio_check(kJump, 1.0, 0.0, 1.0, Interval{-2.0, -1.5},
                                      Interval{-3.0, -2.5}, cfg),
                    ConfigError);  // x < z
    CHECK_THROWS_AS(green_ratio_check(kJump, 1.0, 1.0, 0.0, Interval{-1.0, 0.5},
                                      Interval{-3.0, -2.5}, cfg),
                    ConfigError);  // H1 reaches above z
    CHECK_THROWS_AS(green_ratio_check(kJump, 1.0, 1.0, 0.0, Interval{-1.0, -2.0},
                                      Interval{-3.0, -2.5}, cfg),
                    ConfigError);  // empty interval
}

TEST_CASE("discounted occupation of the whole line is deterministic per path") {
    SimConfig cfg;
    cfg.n_paths = 50;
    cfg.dt = 1e-3;
    cfg.horizon_eps = 1e-6;
    const double alpha = 1.0;
    const double T = cfg.horizon(alpha);
    const Interval everything{-1e300, 1e300};
    const PolicyEstimate est = discounted_occupation(kJump, alpha, 0.3, everything, cfg);
    CHECK(est.std_error < 1e-12);  // integrand is 1 on every path
    const double exact = (1.0 - std::exp(-alpha * T)) / alpha;
    // left-point rule overestimates a decreasing integrand by at most dt
    CHECK(est.mean >= exact - 1e-12);
    CHECK(est.mean <= exact + cfg.dt);
}

TEST_CASE("kernel row matches the simulated occupation density (no jumps)") {
    Problem prob = Problem::jump_ou(kNoJump, 1.0);
    FourierGrid settings;
    settings.x_values = {0.0};
    auto grid = std::make_shared<KernelGrid>(build_kernel_grid(prob, settings));
    GridKernel kernel = grid_kernel_adapter(grid);

    SimConfig cfg;
    cfg.n_paths = 10000;
    cfg.dt = 2e-3;
    cfg.horizon_eps = 1e-4;
    cfg.seed = 11;
    auto one = [](double) { return 1.0; };
    for (const auto& bin : {Interval{-2.0, -1.0}, Interval{-1.0, 0.0}, Interval{0.0, 1.0},
                            Interval{1.0, 2.0}}) {
        const PolicyEstimate occ = discounted_occupation(kNoJump, 1.0, 0.0, bin, cfg);
        const double from_kernel =
            kernel.integrate_tail(0.0, bin.lo, one) - kernel.integrate_tail(0.0, bin.hi, one);
        // 4 SE plus the left-point rule and horizon truncation allowances
        const double slack = 4.0 * occ.std_error + cfg.dt + cfg.horizon_eps;
        CHECK(std::abs(occ.mean - from_kernel) < slack);
    }
}

TEST_CASE("harmonicity check vanishes at the threshold and nearby starts") {
    Problem prob = Problem::jump_ou(kJump, 1.0);
    FourierGrid settings;
    FourierGreenKernel kernel(prob, settings);

    SolveConfig scfg;
    const SolveReport solved = solve_threshold(prob, kernel, scfg);

    SimConfig cfg;
    cfg.n_paths = 20000;
    cfg.dt = 1e-3;
    cfg.seed = 3;

    // at the threshold the hit is immediate in simulation
    const HarmonicityResult at_b =
        harmonicity_check(prob, kernel, solved.threshold, solved.threshold, cfg);
    CHECK(at_b.mc_se == 0.0);
    CHECK(at_b.diff < 1e-3);  // |V(x*) - g(x*)| = |residual|

    // on the continuation side the stopped expectation reproduces V
    const HarmonicityResult mid =
        harmonicity_check(prob, kernel, solved.threshold, 0.5, cfg);
    CHECK(mid.diff < 3.0 * mid.mc_se + 5e-3);

    // no-jump continuation point
    Problem nj = Problem::jump_ou(kNoJump, 1.0);
    FourierGreenKernel nj_kernel(nj, settings);
    const SolveReport nj_solved = solve_threshold(nj, nj_kernel, scfg);
    const HarmonicityResult nj_mid =
        harmonicity_check(nj, nj_kernel, nj_solved.threshold, 0.0, cfg);
    CHECK(nj_mid.diff < 3.0 * nj_mid.mc_se + 5e-3);
}

TEST_CASE("sim config validation") {
    SimConfig cfg;
    cfg.dt = 0.0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = SimConfig{};
    cfg.horizon_eps = 1.5;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = SimConfig{};
    cfg.n_paths = 0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    CHECK(SimConfig{}.horizon(1.0) == doctest::Approx(std::log(1e6)));
}
