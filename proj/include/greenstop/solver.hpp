#pragma once

#include <cmath>
#include <utility>
#include <vector>

#include "greenstop/kernel.hpp"
#include "greenstop/model.hpp"
#include "greenstop/montecarlo.hpp"

namespace greenstop {

struct SolveConfig {
    // Bracket for the root search.  NaN bracket_lo defaults to the zero of
    // the excess rate (no admissible threshold lies below it); NaN
    // bracket_hi starts one unit above and is doubled until the residual
    // changes sign, at most max_expansions times.
    double bracket_lo = std::nan("");
    double bracket_hi = std::nan("");
    double root_tol = 1e-6;
    int scan_points = 64;      // residual sign scan across the bracket
    int max_expansions = 20;

    std::vector<double> check_grid;  // states for hypothesis verification
    double majorant_tol = 1e-2;
    double identity_tol = 1e-2;

    void validate() const;
};

struct SolveReport {
    double threshold = std::nan("");
    double residual_at_threshold = std::nan("");
    double residual_bound = std::nan("");  // solver-reported bound on the residual

    // verification flags; see verify_hypotheses
    bool f_nonneg_ok = false;
    bool majorant_ok = false;
    bool identity_ok = false;
    bool root_equation_ok = false;
    bool reward_match_ok = false;
    bool multiple_sign_changes = false;

    std::vector<std::pair<double, double>> sign_changes;   // scan sub-intervals
    std::vector<std::pair<double, double>> value_samples;  // (x, V(x)) on the check grid

    bool verified() const {
        return f_nonneg_ok && majorant_ok && identity_ok && root_equation_ok && reward_match_ok;
    }
};

/// Signed residual of the threshold equation at candidate b:
///   g_smooth(b) - int_b^inf f(y) G_alpha(b, y) dy.
/// A zero makes b a root of the threshold equation.
double threshold_residual(const Problem& problem, const GreenKernel& kernel, double b);

/// Locates the threshold: expands the bracket until the residual changes
/// sign, scans it for every sign change, and bisects the leftmost
/// admissible one (excess rate non-negative at the root) to root_tol.
/// The returned report carries threshold, residual and the scan result;
/// verification flags are left to verify_hypotheses.
/// Throws NoThresholdError when no sign change is found.
SolveReport solve_threshold(const Problem& problem, const GreenKernel& kernel,
                            const SolveConfig& cfg);

/// Candidate value at x for a given threshold:
///   V(x) = int_threshold^inf f(y) G_alpha(x, y) dy.
double value_function(const Problem& problem, const GreenKernel& kernel,
                      double threshold, double x);

/// Checks the verification conditions at the computed threshold:
///  - excess rate non-negative from the threshold on (affine f: checked
///    at the threshold itself),
///  - V dominates the reward on the continuation side of the check grid,
///  - the full-line identity int f G = g_smooth on the check grid,
///  - the root equation within the solver-reported bound,
///  - reward and smooth reward agree on the stopping side.
/// Failures set flags rather than throw.
SolveReport verify_hypotheses(const Problem& problem, const GreenKernel& kernel,
                              double threshold, const SolveConfig& cfg);

/// Monte Carlo corroboration that the candidate value is discount-harmonic
/// on the continuation side: compares V(x) with the simulated
/// E_x[e^{-alpha tau} V(X_tau)] for the first entry into [threshold, inf),
/// where V on the stopping side equals the smooth reward.
struct HarmonicityResult {
    double value = 0.0;     // V(x) from the kernel
    double mc_mean = 0.0;   // simulated stopped expectation
    double mc_se = 0.0;
    double diff = 0.0;      // |value - mc_mean|
};
HarmonicityResult harmonicity_check(const Problem& problem, const GreenKernel& kernel,
                                    double threshold, double x, const SimConfig& cfg);

} // namespace greenstop
