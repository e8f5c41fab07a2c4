#pragma once

#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <vector>

#include "greenstop/kernel_fourier.hpp"
#include "greenstop/model.hpp"

namespace greenstop {

/// Abstract discounted occupation kernel y -> G_alpha(x, y).
class GreenKernel {
public:
    virtual ~GreenKernel() = default;

    virtual double density(double x, double y) const = 0;

    /// int_b^infinity f(y) G_alpha(x, y) dy.  Pass -infinity (or anything
    /// below the support) for the full-line integral; with f == 1 that is
    /// the resolvent of the constant, 1/alpha.
    virtual double integrate_tail(double x, double b,
                                  const std::function<double(double)>& f) const = 0;
};

/// Resolvent density of standard Brownian motion,
/// e^{-sqrt(2 alpha) |x-y|} / sqrt(2 alpha).
double bm_kernel_density(double alpha, double x, double y);

/// Closed-form Brownian kernel, used as an analytically solvable
/// validation instance for the solver.
class BrownianKernel final : public GreenKernel {
public:
    explicit BrownianKernel(double alpha);

    double density(double x, double y) const override;
    double integrate_tail(double x, double b,
                          const std::function<double(double)>& f) const override;

    double alpha() const { return alpha_; }

private:
    double alpha_;
};

/// Adapter serving a fixed, precomputed KernelGrid.  Rows are looked up by
/// exact source point; there is no interpolation across rows.  Tail
/// integrals follow the stored-row scheme (trapezoid on the smooth part,
/// analytic reference part); b beyond the grid end returns 0.
class GridKernel final : public GreenKernel {
public:
    explicit GridKernel(std::shared_ptr<const KernelGrid> grid);

    double density(double x, double y) const override;
    double integrate_tail(double x, double b,
                          const std::function<double(double)>& f) const override;

    /// Complement of integrate_tail under the same decomposition, so
    /// head + tail equals the full-row integral exactly.
    double integrate_head(double x, double b,
                          const std::function<double(double)>& f) const;

    const KernelGrid& grid() const { return *grid_; }

private:
    const KernelRow& row(double x) const;
    std::shared_ptr<const KernelGrid> grid_;
};

GridKernel grid_kernel_adapter(std::shared_ptr<const KernelGrid> grid);

/// Kernel of the jump process, built row by row on demand: each requested
/// source point triggers one transform + inversion at the configured grid
/// settings, cached afterwards.  Safe for concurrent readers.
class FourierGreenKernel final : public GreenKernel {
public:
    FourierGreenKernel(Problem problem, FourierGrid settings);

    double density(double x, double y) const override;
    double integrate_tail(double x, double b,
                          const std::function<double(double)>& f) const override;

    const KernelRow& row(double x) const;
    const std::vector<double>& y_values() const { return y_; }
    const FourierGrid& settings() const { return settings_; }
    const Problem& problem() const { return problem_; }
    std::size_t rows_built() const;

    /// Copies compatible rows from a previously saved grid into the cache.
    /// Returns the number of rows adopted; silently ignores grids built
    /// with different parameters or settings.
    std::size_t adopt(const KernelGrid& grid);

    /// Snapshot of requested rows as a serializable grid.
    KernelGrid materialize(const std::vector<double>& xs) const;

    /// Source points of every row built so far.
    std::vector<double> snapshot_points() const;

private:
    Problem problem_;
    FourierGrid settings_;
    std::vector<double> y_;
    mutable std::mutex mutex_;
    mutable std::map<double, KernelRow> cache_;
};

} // namespace greenstop
