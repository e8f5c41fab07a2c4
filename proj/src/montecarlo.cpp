#include "greenstop/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <thread>

#include "greenstop/errors.hpp"

namespace greenstop {

namespace {

std::uint64_t splitmix64(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

constexpr double kInf = std::numeric_limits<double>::infinity();

// exact mean-reverting Gaussian step over an arbitrary interval
double gauss_step(const ModelParams& p, double x, double delta,
                  std::mt19937_64& rng, std::normal_distribution<double>& normal) {
    const double decay = std::exp(-p.gamma * delta);
    double v = x * decay;
    if (p.sigma > 0.0) {
        const double sd = p.sigma * std::sqrt((1.0 - decay * decay) / (2.0 * p.gamma));
        v += sd * normal(rng);
    }
    return v;
}

struct PathOutcome {
    double tau = 0.0;
    double x_tau = 0.0;
    CrossingType crossing = CrossingType::none;
    bool hit = false;
};

// first passage into [b, inf): exact decay between evaluation times,
// jumps applied at their own instants
PathOutcome run_threshold_path(const ModelParams& p, double x0, double b,
                               double T, double dt, std::mt19937_64& rng) {
    if (x0 >= b) return {0.0, x0, CrossingType::immediate, true};

    std::normal_distribution<double> normal;
    std::exponential_distribution<double> jump_wait(p.lambda > 0.0 ? p.lambda : 1.0);
    std::exponential_distribution<double> jump_size(p.beta);

    const double decay_dt = std::exp(-p.gamma * dt);
    const double sd_dt =
        p.sigma > 0.0 ? p.sigma * std::sqrt((1.0 - decay_dt * decay_dt) / (2.0 * p.gamma)) : 0.0;

    double t = 0.0;
    double x = x0;
    long long k = 0;  // completed grid steps
    double next_jump = p.lambda > 0.0 ? jump_wait(rng) : kInf;

    while (t < T) {
        const double next_grid = (k + 1) * dt;
        const double target = std::min(next_grid, T);
        if (next_jump < target) {
            x = gauss_step(p, x, next_jump - t, rng, normal);
            t = next_jump;
            if (x >= b) return {t, x, CrossingType::diffusive, true};
            x += jump_size(rng);
            next_jump = t + jump_wait(rng);
            if (x >= b) return {t, x, CrossingType::jump, true};
        } else {
            if (t == k * dt && target == next_grid) {
                x = x * decay_dt + (sd_dt > 0.0 ? sd_dt * normal(rng) : 0.0);
            } else {
                x = gauss_step(p, x, target - t, rng, normal);
            }
            t = target;
            if (target == next_grid) ++k;
            if (x >= b) return {t, x, CrossingType::diffusive, true};
        }
    }
    return {T, x, CrossingType::none, false};
}

// discounted occupation of two sets, left-point rule on the grid
std::pair<double, double> run_occupation_path(const ModelParams& p, double alpha,
                                              double x0, Interval H1, Interval H2,
                                              double T, double dt, std::mt19937_64& rng) {
    std::normal_distribution<double> normal;
    std::exponential_distribution<double> jump_wait(p.lambda > 0.0 ? p.lambda : 1.0);
    std::exponential_distribution<double> jump_size(p.beta);

    const double decay_dt = std::exp(-p.gamma * dt);
    const double sd_dt =
        p.sigma > 0.0 ? p.sigma * std::sqrt((1.0 - decay_dt * decay_dt) / (2.0 * p.gamma)) : 0.0;
    const double disc_dt = std::exp(-alpha * dt);

    double t = 0.0;
    double x = x0;
    double w = 1.0;  // e^{-alpha t} at the current grid time
    long long k = 0;
    double next_jump = p.lambda > 0.0 ? jump_wait(rng) : kInf;
    double occ1 = 0.0;
    double occ2 = 0.0;

    while (k * dt < T) {
        if (x >= H1.lo && x <= H1.hi) occ1 += w * dt;
        if (x >= H2.lo && x <= H2.hi) occ2 += w * dt;

        const double next_grid = (k + 1) * dt;
        while (next_jump < next_grid) {
            x = gauss_step(p, x, next_jump - t, rng, normal);
            t = next_jump;
            x += jump_size(rng);
            next_jump = t + jump_wait(rng);
        }
        if (t == k * dt) {
            x = x * decay_dt + (sd_dt > 0.0 ? sd_dt * normal(rng) : 0.0);
        } else {
            x = gauss_step(p, x, next_grid - t, rng, normal);
        }
        t = next_grid;
        ++k;
        w *= disc_dt;
    }
    return {occ1, occ2};
}

template <class Fn>
void parallel_paths(long long n, int threads, Fn&& fn) {
    unsigned n_threads = threads > 0 ? static_cast<unsigned>(threads)
                                     : std::max(1u, std::thread::hardware_concurrency());
    if (n_threads <= 1 || n < 2) {
        for (long long i = 0; i < n; ++i) fn(i);
        return;
    }
    const long long chunk = (n + n_threads - 1) / n_threads;
    std::vector<std::future<void>> futs;
    for (long long b = 0; b < n; b += chunk) {
        const long long e = std::min(b + chunk, n);
        futs.push_back(std::async(std::launch::async, [&fn, b, e] {
            for (long long i = b; i < e; ++i) fn(i);
        }));
    }
    for (auto& f : futs) f.get();
}

PolicyEstimate summarize(const std::vector<double>& samples) {
    PolicyEstimate est;
    est.n_paths = static_cast<long long>(samples.size());
    double sum = 0.0;
    for (double v : samples) sum += v;
    est.mean = sum / static_cast<double>(est.n_paths);
    double ss = 0.0;
    for (double v : samples) ss += (v - est.mean) * (v - est.mean);
    const double var = est.n_paths > 1 ? ss / static_cast<double>(est.n_paths - 1) : 0.0;
    est.std_error = std::sqrt(var / static_cast<double>(est.n_paths));
    est.ci95 = {est.mean - 1.96 * est.std_error, est.mean + 1.96 * est.std_error};
    return est;
}

} // namespace

void SimConfig::validate() const {
    if (!(dt > 0.0)) throw ConfigError("dt must be positive");
    if (!(horizon_eps > 0.0 && horizon_eps < 1.0))
        throw ConfigError("horizon_eps must lie in (0, 1)");
    if (n_paths < 1) throw ConfigError("n_paths must be at least 1");
    if (threads < 0) throw ConfigError("threads must be >= 0");
}

double SimConfig::horizon(double alpha) const {
    if (!(alpha > 0.0)) throw ConfigError("horizon requires alpha > 0");
    return std::log(1.0 / horizon_eps) / alpha;
}

std::mt19937_64 path_rng(std::uint64_t seed, long long path_index) {
    return std::mt19937_64(
        splitmix64(seed ^ (0x9E3779B97F4A7C15ULL * static_cast<std::uint64_t>(path_index + 1))));
}

double step_exact(const ModelParams& params, double x, double dt, std::mt19937_64& rng) {
    if (!(dt > 0.0)) throw ConfigError("step_exact: dt must be positive");
    std::normal_distribution<double> normal;
    double v = gauss_step(params, x, dt, rng, normal);
    if (params.lambda > 0.0) {
        std::poisson_distribution<int> jumps(params.lambda * dt);
        std::uniform_real_distribution<double> place(0.0, dt);
        std::exponential_distribution<double> jump_size(params.beta);
        const int n = jumps(rng);
        for (int i = 0; i < n; ++i) {
            const double arrival = dt - place(rng);  // uniform in (0, dt]
            v += std::exp(-params.gamma * (dt - arrival)) * jump_size(rng);
        }
    }
    return v;
}

std::vector<double> sample_marginal(const ModelParams& params, double x0, double t,
                                    double dt, long long n, std::uint64_t seed) {
    params.validate();
    if (!(t > 0.0) || !(dt > 0.0)) throw ConfigError("sample_marginal: t and dt must be positive");
    const auto steps = static_cast<long long>(std::floor(t / dt + 1e-12));
    const double rem = t - static_cast<double>(steps) * dt;
    std::vector<double> out(static_cast<std::size_t>(n));
    for (long long i = 0; i < n; ++i) {
        std::mt19937_64 rng = path_rng(seed, i);
        double x = x0;
        for (long long s = 0; s < steps; ++s) x = step_exact(params, x, dt, rng);
        if (rem > 1e-12) x = step_exact(params, x, rem, rng);
        out[static_cast<std::size_t>(i)] = x;
    }
    return out;
}

PolicyEstimate estimate_policy_value(const Problem& problem, double x0, double b,
                                     const SimConfig& cfg, std::vector<PathRecord>* records) {
    cfg.validate();
    problem.params.validate();

    if (b <= x0) {
        PolicyEstimate est;
        est.mean = problem.reward(x0);
        est.std_error = 0.0;
        est.n_paths = cfg.n_paths;
        est.ci95 = {est.mean, est.mean};
        if (records) {
            records->assign(static_cast<std::size_t>(cfg.n_paths),
                            PathRecord{0, 0.0, est.mean, CrossingType::immediate});
            for (long long i = 0; i < cfg.n_paths; ++i)
                (*records)[static_cast<std::size_t>(i)].path_id = i;
        }
        return est;
    }

    const double T = cfg.horizon(problem.alpha);
    std::vector<double> payoffs(static_cast<std::size_t>(cfg.n_paths));
    std::vector<PathOutcome> outcomes(static_cast<std::size_t>(cfg.n_paths));

    parallel_paths(cfg.n_paths, cfg.threads, [&](long long i) {
        std::mt19937_64 rng = path_rng(cfg.seed, i);
        const PathOutcome o = run_threshold_path(problem.params, x0, b, T, cfg.dt, rng);
        outcomes[static_cast<std::size_t>(i)] = o;
        payoffs[static_cast<std::size_t>(i)] =
            o.hit ? std::exp(-problem.alpha * o.tau) * problem.reward(o.x_tau) : 0.0;
    });

    PolicyEstimate est = summarize(payoffs);
    long long truncated = 0;
    for (const PathOutcome& o : outcomes)
        if (!o.hit) ++truncated;
    est.truncated_fraction = static_cast<double>(truncated) / static_cast<double>(cfg.n_paths);

    if (records) {
        records->resize(static_cast<std::size_t>(cfg.n_paths));
        for (long long i = 0; i < cfg.n_paths; ++i) {
            const auto& o = outcomes[static_cast<std::size_t>(i)];
            (*records)[static_cast<std::size_t>(i)] =
                PathRecord{i, o.tau, payoffs[static_cast<std::size_t>(i)], o.crossing};
        }
    }
    return est;
}

ScanResult optimality_scan(const Problem& problem, double x0,
                           const std::vector<double>& b_list, const SimConfig& cfg) {
    if (b_list.empty()) throw ConfigError("optimality_scan: empty threshold list");
    ScanResult out;
    out.thresholds = b_list;
    out.estimates.reserve(b_list.size());
    out.payoffs.reserve(b_list.size());
    std::vector<PathRecord> records;
    for (double b : b_list) {
        out.estimates.push_back(estimate_policy_value(problem, x0, b, cfg, &records));
        std::vector<double> pay(records.size());
        for (std::size_t i = 0; i < records.size(); ++i) pay[i] = records[i].payoff;
        out.payoffs.push_back(std::move(pay));
    }
    return out;
}

PolicyEstimate ScanResult::paired_difference(std::size_t i, std::size_t j) const {
    const std::vector<double>& a = payoffs.at(i);
    const std::vector<double>& b = payoffs.at(j);
    if (a.size() != b.size()) throw ConfigError("paired_difference: size mismatch");
    std::vector<double> diff(a.size());
    for (std::size_t k = 0; k < a.size(); ++k) diff[k] = a[k] - b[k];
    return summarize(diff);
}

RatioCheck green_ratio_check(const ModelParams& params, double alpha,
                             double x, double z, Interval H1, Interval H2,
                             const SimConfig& cfg) {
    cfg.validate();
    params.validate();
    if (!(alpha > 0.0)) throw ConfigError("green_ratio_check: alpha must be positive");
    if (!(x >= z)) throw ConfigError("green_ratio_check: requires x >= z");
    if (!(H1.lo < H1.hi) || !(H2.lo < H2.hi))
        throw ConfigError("green_ratio_check: intervals must be non-empty");
    if (!(H1.hi < z) || !(H2.hi < z))
        throw ConfigError("green_ratio_check: both sets must lie entirely below z");

    const double T = cfg.horizon(alpha);
    const auto n = static_cast<std::size_t>(cfg.n_paths);
    // per path: (occ_x_H1, occ_x_H2, occ_z_H1, occ_z_H2), shared streams per index
    std::vector<std::array<double, 4>> s(n);
    parallel_paths(cfg.n_paths, cfg.threads, [&](long long i) {
        std::mt19937_64 rng_x = path_rng(cfg.seed, i);
        const auto from_x = run_occupation_path(params, alpha, x, H1, H2, T, cfg.dt, rng_x);
        std::mt19937_64 rng_z = path_rng(cfg.seed, i);
        const auto from_z = run_occupation_path(params, alpha, z, H1, H2, T, cfg.dt, rng_z);
        s[static_cast<std::size_t>(i)] = {from_x.first, from_x.second, from_z.first, from_z.second};
    });

    std::array<double, 4> mean{};
    for (const auto& row : s)
        for (int c = 0; c < 4; ++c) mean[c] += row[c];
    for (int c = 0; c < 4; ++c) mean[c] /= static_cast<double>(n);

    double cov[4][4] = {};
    for (const auto& row : s)
        for (int a = 0; a < 4; ++a)
            for (int b = 0; b < 4; ++b) cov[a][b] += (row[a] - mean[a]) * (row[b] - mean[b]);
    const double denom = n > 1 ? static_cast<double>(n - 1) : 1.0;
    for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b) cov[a][b] /= denom;

    RatioCheck out;
    out.occupations = mean;
    for (int c = 0; c < 4; ++c)
        out.occupation_se[c] = std::sqrt(cov[c][c] / static_cast<double>(n));

    out.conclusive = true;
    for (int c = 0; c < 4; ++c)
        if (!(mean[c] > 3.0 * out.occupation_se[c]) || !(mean[c] > 0.0)) out.conclusive = false;

    if (mean[2] > 0.0 && mean[3] > 0.0) {
        out.ratio1 = mean[0] / mean[2];
        out.ratio2 = mean[1] / mean[3];
        // delta method for d = s0/s2 - s1/s3 with the full covariance
        const double g[4] = {1.0 / mean[2], -1.0 / mean[3],
                             -mean[0] / (mean[2] * mean[2]), mean[1] / (mean[3] * mean[3])};
        double var = 0.0;
        for (int a = 0; a < 4; ++a)
            for (int b = 0; b < 4; ++b) var += g[a] * cov[a][b] * g[b];
        out.se_diff = std::sqrt(std::max(var, 0.0) / static_cast<double>(n));
    } else {
        out.ratio1 = out.ratio2 = 0.0;
        out.se_diff = 0.0;
        out.conclusive = false;
    }
    return out;
}

PolicyEstimate discounted_occupation(const ModelParams& params, double alpha,
                                     double x0, Interval H, const SimConfig& cfg) {
    cfg.validate();
    params.validate();
    if (!(alpha > 0.0)) throw ConfigError("discounted_occupation: alpha must be positive");
    const double T = cfg.horizon(alpha);
    std::vector<double> occ(static_cast<std::size_t>(cfg.n_paths));
    parallel_paths(cfg.n_paths, cfg.threads, [&](long long i) {
        std::mt19937_64 rng = path_rng(cfg.seed, i);
        occ[static_cast<std::size_t>(i)] =
            run_occupation_path(params, alpha, x0, H, H, T, cfg.dt, rng).first;
    });
    return summarize(occ);
}

} // namespace greenstop
