#include "greenstop/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "greenstop/errors.hpp"
#include "greenstop/quadrature.hpp"

namespace greenstop {

double bm_kernel_density(double alpha, double x, double y) {
    const double c = std::sqrt(2.0 * alpha);
    return std::exp(-c * std::abs(x - y)) / c;
}

BrownianKernel::BrownianKernel(double alpha) : alpha_(alpha) {
    if (!(alpha > 0.0)) throw ConfigError("BrownianKernel: alpha must be positive");
}

double BrownianKernel::density(double x, double y) const {
    return bm_kernel_density(alpha_, x, y);
}

double BrownianKernel::integrate_tail(double x, double b,
                                      const std::function<double(double)>& f) const {
    const double c = std::sqrt(2.0 * alpha_);
    const double span = 48.0 / c;  // e^{-48} tail, negligible against linear growth
    const double hi = x + span;
    const double lo = std::max(b, x - span);
    if (lo >= hi) return 0.0;

    auto h = [&](double y) { return f(y) * bm_kernel_density(alpha_, x, y); };
    double total = 0.0;
    if (lo < x) {
        total += integrate_adaptive_real(h, lo, x, 1e-13, 1e-11);
        total += integrate_adaptive_real(h, x, hi, 1e-13, 1e-11);
    } else {
        total += integrate_adaptive_real(h, lo, hi, 1e-13, 1e-11);
    }
    return total;
}

GridKernel::GridKernel(std::shared_ptr<const KernelGrid> grid) : grid_(std::move(grid)) {
    if (!grid_) throw ConfigError("GridKernel: null grid");
}

const KernelRow& GridKernel::row(double x) const {
    const KernelRow* r = grid_->find_row(x);
    if (!r) {
        std::ostringstream os;
        os << "no kernel row at x = " << x << " (rows are matched exactly, no interpolation)";
        throw RowLookupError(os.str());
    }
    return *r;
}

double GridKernel::density(double x, double y) const {
    const KernelRow& r = row(x);
    const std::vector<double>& ys = grid_->y_values;
    if (y <= ys.front() || y >= ys.back()) return 0.0;
    const double dy = ys[1] - ys[0];
    const auto i = static_cast<std::size_t>((y - ys.front()) / dy);
    const std::size_t j = std::min(i, ys.size() - 2);
    const double t = (y - ys[j]) / dy;
    return r.density[j] * (1.0 - t) + r.density[j + 1] * t;
}

double GridKernel::integrate_tail(double x, double b,
                                  const std::function<double(double)>& f) const {
    return row_integrate_tail(row(x), grid_->y_values, b, f);
}

double GridKernel::integrate_head(double x, double b,
                                  const std::function<double(double)>& f) const {
    const KernelRow& r = row(x);
    const double full = row_integrate_tail(r, grid_->y_values,
                                           -std::numeric_limits<double>::infinity(), f);
    return full - row_integrate_tail(r, grid_->y_values, b, f);
}

GridKernel grid_kernel_adapter(std::shared_ptr<const KernelGrid> grid) {
    return GridKernel(std::move(grid));
}

FourierGreenKernel::FourierGreenKernel(Problem problem, FourierGrid settings)
    : problem_(std::move(problem)), settings_(std::move(settings)) {
    settings_.validate();
    problem_.params.validate();
    settings_.x_values.clear();  // rows are built on demand
    y_ = make_y_grid(settings_);

    const double tail = ghat_tail_estimate(problem_.params, problem_.alpha, settings_.z_max);
    if (!(tail < settings_.tail_tol)) {
        std::ostringstream os;
        os << "transform magnitude estimate at z_max is " << tail
           << " (tolerance " << settings_.tail_tol << "); increase z_max";
        throw GridResolutionError(os.str());
    }
}

const KernelRow& FourierGreenKernel::row(double x) const {
    {
        std::lock_guard<std::mutex> lock(mutex_);
        auto it = cache_.find(x);
        if (it != cache_.end()) return it->second;
    }
    KernelRow built = build_kernel_row(problem_, settings_, x, y_);
    std::lock_guard<std::mutex> lock(mutex_);
    return cache_.emplace(x, std::move(built)).first->second;
}

double FourierGreenKernel::density(double x, double y) const {
    const KernelRow& r = row(x);
    if (y <= y_.front() || y >= y_.back()) return 0.0;
    const double dy = y_[1] - y_[0];
    const auto i = static_cast<std::size_t>((y - y_.front()) / dy);
    const std::size_t j = std::min(i, y_.size() - 2);
    const double t = (y - y_[j]) / dy;
    return r.density[j] * (1.0 - t) + r.density[j + 1] * t;
}

double FourierGreenKernel::integrate_tail(double x, double b,
                                          const std::function<double(double)>& f) const {
    return row_integrate_tail(row(x), y_, b, f);
}

std::size_t FourierGreenKernel::rows_built() const {
    std::lock_guard<std::mutex> lock(mutex_);
    return cache_.size();
}

std::size_t FourierGreenKernel::adopt(const KernelGrid& grid) {
    const ModelParams& a = grid.params;
    const ModelParams& b = problem_.params;
    const bool same_params = a.gamma == b.gamma && a.sigma == b.sigma &&
                             a.lambda == b.lambda && a.beta == b.beta &&
                             grid.alpha == problem_.alpha;
    const bool same_grid = grid.grid.n_z == settings_.n_z &&
                           grid.grid.z_max == settings_.z_max &&
                           grid.grid.quad_tol == settings_.quad_tol;
    if (!same_params || !same_grid) return 0;

    std::lock_guard<std::mutex> lock(mutex_);
    std::size_t adopted = 0;
    for (const KernelRow& r : grid.rows) {
        if (cache_.emplace(r.x, r).second) ++adopted;
    }
    return adopted;
}

std::vector<double> FourierGreenKernel::snapshot_points() const {
    std::lock_guard<std::mutex> lock(mutex_);
    std::vector<double> xs;
    xs.reserve(cache_.size());
    for (const auto& [x, row] : cache_) xs.push_back(x);
    return xs;
}

KernelGrid FourierGreenKernel::materialize(const std::vector<double>& xs) const {
    KernelGrid out;
    out.params = problem_.params;
    out.alpha = problem_.alpha;
    out.grid = settings_;
    out.grid.x_values = xs;
    out.y_values = y_;
    out.rows.reserve(xs.size());
    for (double x : xs) out.rows.push_back(row(x));
    return out;
}

} // namespace greenstop
