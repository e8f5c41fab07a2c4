#include "greenstop/model.hpp"

#include <cmath>
#include <string>

namespace greenstop {

void ModelParams::validate() const {
    if (!(gamma > 0.0) || !std::isfinite(gamma))
        throw ConfigError("gamma must be positive and finite, got " + std::to_string(gamma));
    if (!(beta > 0.0) || !std::isfinite(beta))
        throw ConfigError("beta must be positive and finite, got " + std::to_string(beta));
    if (!(sigma >= 0.0) || !std::isfinite(sigma))
        throw ConfigError("sigma must be non-negative and finite, got " + std::to_string(sigma));
    if (!(lambda >= 0.0) || !std::isfinite(lambda))
        throw ConfigError("lambda must be non-negative and finite, got " + std::to_string(lambda));
    if (sigma == 0.0 && lambda == 0.0)
        throw ConfigError("sigma and lambda cannot both be zero (deterministic process)");
}

double excess_function(const ModelParams& params, double alpha, double y) {
    return y * (alpha + params.gamma) - params.lambda / params.beta;
}

double excess_root(const ModelParams& params, double alpha) {
    return params.lambda / (params.beta * (alpha + params.gamma));
}

namespace {

void validate_alpha(double alpha) {
    if (!(alpha > 0.0) || !std::isfinite(alpha))
        throw ConfigError("alpha must be positive and finite, got " + std::to_string(alpha));
}

} // namespace

Problem Problem::jump_ou(const ModelParams& params, double alpha) {
    params.validate();
    validate_alpha(alpha);
    Problem p;
    p.params = params;
    p.alpha = alpha;
    p.reward = positive_part;
    p.smooth_reward = identity_reward;
    p.excess = [params, alpha](double y) { return excess_function(params, alpha, y); };
    return p;
}

Problem Problem::custom(const ModelParams& params, double alpha,
                        std::function<double(double)> reward,
                        std::function<double(double)> smooth_reward,
                        std::function<double(double)> excess) {
    params.validate();
    validate_alpha(alpha);
    if (!reward || !smooth_reward || !excess)
        throw ConfigError("Problem::custom requires all three reward handles");
    Problem p;
    p.params = params;
    p.alpha = alpha;
    p.reward = std::move(reward);
    p.smooth_reward = std::move(smooth_reward);
    p.excess = std::move(excess);
    return p;
}

} // namespace greenstop
