#pragma once

#include <algorithm>
#include <functional>

#include "greenstop/errors.hpp"

namespace greenstop {

/// Parameters of the mean-reverting jump process
///   dX_t = -gamma X_{t-} dt + sigma dB_t + dJ_t,
/// where J is compound Poisson with rate lambda and Exp(beta) jump sizes
/// (all jumps positive).
///
/// The struct is a plain aggregate; validate() enforces the admissible
/// region and is called whenever the parameters enter a Problem or a
/// run configuration.
struct ModelParams {
    double gamma = 1.0;   // mean-reversion rate, > 0
    double sigma = 1.0;   // Brownian volatility, >= 0
    double lambda = 0.0;  // jump intensity, >= 0
    double beta = 1.0;    // jump-size exponential rate, > 0

    void validate() const;
};

inline double positive_part(double x) { return std::max(x, 0.0); }
inline double identity_reward(double x) { return x; }

/// Excess rate f(y) = y (alpha + gamma) - lambda / beta.
/// Affine and strictly increasing in y; its tail integral against the
/// Green kernel reproduces the smooth reward.
double excess_function(const ModelParams& params, double alpha, double y);

/// Unique zero of the excess rate: lambda / (beta (alpha + gamma)).
/// A valid threshold can never lie below this point.
double excess_root(const ModelParams& params, double alpha);

/// A discounted stopping problem: process parameters, discount rate and
/// the reward triple (g, g_smooth, f).  g_smooth agrees with g on the
/// stopping side and f is its excess rate under the generator.
///
/// The handles make the solver reusable for other reward pairs; the
/// shipped factories wire the piecewise-linear payoff used throughout.
struct Problem {
    ModelParams params;
    double alpha = 1.0;
    std::function<double(double)> reward;
    std::function<double(double)> smooth_reward;
    std::function<double(double)> excess;

    /// g(x) = x^+, g_smooth(x) = x, f(y) = y(alpha+gamma) - lambda/beta.
    static Problem jump_ou(const ModelParams& params, double alpha);

    /// Same validation, caller-supplied reward triple.
    static Problem custom(const ModelParams& params, double alpha,
                          std::function<double(double)> reward,
                          std::function<double(double)> smooth_reward,
                          std::function<double(double)> excess);
};

} // namespace greenstop
