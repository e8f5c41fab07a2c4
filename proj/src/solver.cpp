#include "greenstop/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "greenstop/errors.hpp"

namespace greenstop {

void SolveConfig::validate() const {
    if (!(root_tol > 0.0)) throw ConfigError("root_tol must be positive");
    if (scan_points < 2) throw ConfigError("scan_points must be at least 2");
    if (max_expansions < 1) throw ConfigError("max_expansions must be at least 1");
    if (!(majorant_tol > 0.0) || !(identity_tol > 0.0))
        throw ConfigError("verification tolerances must be positive");
    if (!std::isnan(bracket_lo) && !std::isnan(bracket_hi) && !(bracket_lo < bracket_hi))
        throw ConfigError("bracket_lo must be below bracket_hi");
}

double threshold_residual(const Problem& problem, const GreenKernel& kernel, double b) {
    return problem.smooth_reward(b) - kernel.integrate_tail(b, b, problem.excess);
}

namespace {

double bisect(const Problem& problem, const GreenKernel& kernel,
              double lo, double hi, double r_lo, double root_tol) {
    // invariant: residual changes sign on [lo, hi]
    while (hi - lo > root_tol) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        const double r = threshold_residual(problem, kernel, mid);
        if (r == 0.0) return mid;
        if ((r < 0.0) == (r_lo < 0.0)) {
            lo = mid;
            r_lo = r;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

} // namespace

SolveReport solve_threshold(const Problem& problem, const GreenKernel& kernel,
                            const SolveConfig& cfg) {
    cfg.validate();

    double lo = std::isnan(cfg.bracket_lo) ? excess_root(problem.params, problem.alpha)
                                           : cfg.bracket_lo;
    double hi = std::isnan(cfg.bracket_hi) ? lo + 1.0 : cfg.bracket_hi;
    if (!(lo < hi)) throw ConfigError("solve_threshold: empty bracket");

    double r_lo = threshold_residual(problem, kernel, lo);
    double r_hi = threshold_residual(problem, kernel, hi);

    int expansions = 0;
    while ((r_lo < 0.0) == (r_hi < 0.0) && r_lo != 0.0 && r_hi != 0.0 &&
           expansions < cfg.max_expansions) {
        hi += (hi - lo);  // double the bracket width upward; lo is a hard floor
        r_hi = threshold_residual(problem, kernel, hi);
        ++expansions;
    }
    if ((r_lo < 0.0) == (r_hi < 0.0) && r_lo != 0.0 && r_hi != 0.0) {
        std::ostringstream os;
        os << "threshold residual keeps sign " << (r_lo < 0 ? '-' : '+') << " on ["
           << lo << ", " << hi << "] after " << expansions
           << " expansions; the problem may not be right-sided for these parameters";
        throw NoThresholdError(os.str());
    }

    SolveReport report;

    // scan the bracket and collect every sign-change sub-interval
    const int n = cfg.scan_points;
    std::vector<double> xs(n), rs(n);
    for (int i = 0; i < n; ++i) {
        xs[i] = lo + (hi - lo) * i / (n - 1);
        rs[i] = (i == 0) ? r_lo : (i == n - 1 ? r_hi : threshold_residual(problem, kernel, xs[i]));
    }
    for (int i = 0; i + 1 < n; ++i) {
        if (rs[i] == 0.0 || (rs[i] < 0.0) != (rs[i + 1] < 0.0))
            report.sign_changes.emplace_back(xs[i], xs[i + 1]);
    }
    report.multiple_sign_changes = report.sign_changes.size() > 1;

    // leftmost admissible root: excess rate must be non-negative there
    const double slack = cfg.root_tol * (problem.alpha + problem.params.gamma);
    bool found = false;
    for (const auto& [a, b] : report.sign_changes) {
        const double root =
            bisect(problem, kernel, a, b, threshold_residual(problem, kernel, a), cfg.root_tol);
        if (problem.excess(root) >= -slack) {
            report.threshold = root;
            found = true;
            break;
        }
    }
    if (!found) {
        // fall back to the plain bracket root (scan may have missed at its resolution)
        report.threshold = bisect(problem, kernel, lo, hi, r_lo, cfg.root_tol);
        if (report.sign_changes.empty())
            report.sign_changes.emplace_back(lo, hi);
    }
    report.residual_at_threshold = threshold_residual(problem, kernel, report.threshold);
    return report;
}

double value_function(const Problem& problem, const GreenKernel& kernel,
                      double threshold, double x) {
    return kernel.integrate_tail(x, threshold, problem.excess);
}

SolveReport verify_hypotheses(const Problem& problem, const GreenKernel& kernel,
                              double threshold, const SolveConfig& cfg) {
    cfg.validate();

    SolveReport report;
    report.threshold = threshold;
    report.residual_at_threshold = threshold_residual(problem, kernel, threshold);

    // root equation: the residual must vanish within a bound formed from
    // the local slope at root_tol scale
    const double rp = threshold_residual(problem, kernel, threshold + cfg.root_tol);
    const double rm = threshold_residual(problem, kernel, threshold - cfg.root_tol);
    report.residual_bound = std::max(1e-9, 2.0 * std::abs(rp - rm));
    report.root_equation_ok = std::abs(report.residual_at_threshold) <= report.residual_bound;

    // excess rate non-negative from the threshold on; f is increasing, so
    // the threshold itself is the binding point
    const double slack = cfg.root_tol * (problem.alpha + problem.params.gamma);
    report.f_nonneg_ok = problem.excess(threshold) >= -slack;

    report.majorant_ok = true;
    report.identity_ok = true;
    report.reward_match_ok =
        std::abs(problem.reward(threshold) - problem.smooth_reward(threshold)) <=
        cfg.majorant_tol;

    const double neg_inf = -std::numeric_limits<double>::infinity();
    for (double x : cfg.check_grid) {
        const double v = value_function(problem, kernel, threshold, x);
        report.value_samples.emplace_back(x, v);
        if (x <= threshold) {
            if (!(v >= problem.reward(x) - cfg.majorant_tol)) report.majorant_ok = false;
        } else {
            if (std::abs(problem.reward(x) - problem.smooth_reward(x)) > 1e-12)
                report.reward_match_ok = false;
        }
        const double ident = kernel.integrate_tail(x, neg_inf, problem.excess);
        if (std::abs(ident - problem.smooth_reward(x)) > cfg.identity_tol)
            report.identity_ok = false;
    }
    return report;
}

HarmonicityResult harmonicity_check(const Problem& problem, const GreenKernel& kernel,
                                    double threshold, double x, const SimConfig& cfg) {
    HarmonicityResult out;
    out.value = value_function(problem, kernel, threshold, x);
    // first entry into the stopping set happens at a state >= threshold,
    // where the candidate value coincides with the smooth reward; the
    // stopped expectation is therefore the threshold-policy payoff
    const PolicyEstimate est = estimate_policy_value(problem, x, threshold, cfg);
    out.mc_mean = est.mean;
    out.mc_se = est.std_error;
    out.diff = std::abs(out.value - out.mc_mean);
    return out;
}

} // namespace greenstop
