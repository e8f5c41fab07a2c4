#pragma once

#include <array>
#include <cstdint>
#include <random>
#include <utility>
#include <vector>

#include "greenstop/model.hpp"

namespace greenstop {

struct SimConfig {
    double dt = 1e-3;           // evaluation grid step
    double horizon_eps = 1e-6;  // discount mass ignored beyond the horizon
    long long n_paths = 10000;
    std::uint64_t seed = 0x5eed5eedULL;
    int threads = 1;            // 0 = hardware concurrency

    void validate() const;
    /// T with e^{-alpha T} = horizon_eps.
    double horizon(double alpha) const;
};

struct PolicyEstimate {
    double mean = 0.0;
    double std_error = 0.0;
    long long n_paths = 0;
    std::pair<double, double> ci95{0.0, 0.0};
    double truncated_fraction = 0.0;  // paths that reached the horizon unstopped
};

enum class CrossingType { none = 0, diffusive = 1, jump = 2, immediate = 3 };

struct PathRecord {
    long long path_id = 0;
    double tau = 0.0;
    double payoff = 0.0;
    CrossingType crossing = CrossingType::none;
};

/// Independent generator stream for one path index.
std::mt19937_64 path_rng(std::uint64_t seed, long long path_index);

/// One step of the process, exact in distribution for the marginal at dt:
/// exponential decay of the state, the stationary-matched Gaussian
/// increment, and Poisson(lambda dt) jumps placed uniformly in (0, dt],
/// each decayed from its arrival time.
double step_exact(const ModelParams& params, double x, double dt, std::mt19937_64& rng);

/// n samples of X_t started from x0, composed from exact steps of size dt
/// (plus one remainder step).  Exact in law for any dt.
std::vector<double> sample_marginal(const ModelParams& params, double x0, double t,
                                    double dt, long long n, std::uint64_t seed);

/// Discounted payoff of the threshold rule "stop on reaching [b, inf)":
/// paths evolve by exact decay between evaluation times; jump times are
/// simulated individually, so a jump over the threshold stops the path at
/// the jump instant.  Unstopped paths pay 0 at the horizon.
PolicyEstimate estimate_policy_value(const Problem& problem, double x0, double b,
                                     const SimConfig& cfg,
                                     std::vector<PathRecord>* records = nullptr);

/// Common-random-numbers sweep over candidate thresholds: path i uses the
/// same generator stream for every b, so paired differences between
/// thresholds have low variance.
struct ScanResult {
    std::vector<double> thresholds;
    std::vector<PolicyEstimate> estimates;
    std::vector<std::vector<double>> payoffs;  // [threshold][path]

    /// Estimate of value(i) - value(j) with the paired standard error.
    PolicyEstimate paired_difference(std::size_t i, std::size_t j) const;
};
ScanResult optimality_scan(const Problem& problem, double x0,
                           const std::vector<double>& b_list, const SimConfig& cfg);

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
};

/// Occupation-ratio test: estimates the discounted occupation of two sets
/// H1, H2 (both below z) from the two start points x > z and returns the
/// ratios G(x,H)/G(z,H), which agree for a process that cannot jump down.
/// Start points share generator streams, and the standard error of the
/// ratio difference accounts for the induced correlation.
struct RatioCheck {
    double ratio1 = 0.0;
    double ratio2 = 0.0;
    double se_diff = 0.0;              // standard error of ratio1 - ratio2
    bool conclusive = true;            // all occupations distinguishable from 0
    std::array<double, 4> occupations{};    // (x,H1), (x,H2), (z,H1), (z,H2)
    std::array<double, 4> occupation_se{};
};
RatioCheck green_ratio_check(const ModelParams& params, double alpha,
                             double x, double z, Interval H1, Interval H2,
                             const SimConfig& cfg);

/// Discounted occupation estimate of one set (left-point rule on the
/// evaluation grid).  With H covering the whole line the per-path value is
/// deterministic, which the tests use to pin the integrator bias.
PolicyEstimate discounted_occupation(const ModelParams& params, double alpha,
                                     double x0, Interval H, const SimConfig& cfg);

} // namespace greenstop
