#include "greenstop/kernel_fourier.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <sstream>
#include <thread>

#include "greenstop/errors.hpp"
#include "greenstop/fft.hpp"
#include "greenstop/quadrature.hpp"

namespace greenstop {

namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;

struct Coeffs {
    double gamma, sigma, lambda, beta, alpha;
    double a_over_g;   // alpha / gamma
    double l_over_g;   // lambda / gamma
    double s2_over_4g; // sigma^2 / (4 gamma)
    double x;

    Coeffs(const ModelParams& p, double alpha_, double x_)
        : gamma(p.gamma), sigma(p.sigma), lambda(p.lambda), beta(p.beta), alpha(alpha_),
          a_over_g(alpha_ / p.gamma), l_over_g(p.lambda / p.gamma),
          s2_over_4g(p.sigma * p.sigma / (4.0 * p.gamma)), x(x_) {}

    complex jump_pow(double t) const {
        if (l_over_g == 0.0) return {1.0, 0.0};
        return std::pow(complex{beta, -t}, l_over_g);
    }

    // integrand of the rescaled integral: all exponentials bounded for t in (0, z_hi]
    //   w(t; z_hi) = e^{i t x} e^{-s^2 (z_hi^2 - t^2)/(4g)} t^{a/g - 1} (beta - i t)^{l/g}
    complex w(double z_hi, double t) const {
        const double damp = std::exp(-s2_over_4g * (z_hi - t) * (z_hi + t));
        const complex osc{std::cos(t * x), std::sin(t * x)};
        return osc * (damp * std::pow(t, a_over_g - 1.0)) * jump_pow(t);
    }

    // same integrand after the power substitution t = u^{g/a}, which removes
    // the t^{a/g - 1} factor exactly
    complex w_substituted(double z_hi, double u) const {
        const double t = std::pow(u, gamma / alpha);
        const double damp = std::exp(-s2_over_4g * (z_hi - t) * (z_hi + t));
        const complex osc{std::cos(t * x), std::sin(t * x)};
        return (gamma / alpha) * damp * osc * jump_pow(t);
    }

    // non-Gaussian part of the homogeneous solution
    complex h0(double z) const {
        return std::pow(std::abs(z), -a_over_g) *
               (l_over_g == 0.0 ? complex{1.0, 0.0}
                                : std::pow(complex{beta, -z}, -l_over_g));
    }
};

[[noreturn]] void quadrature_failure(const char* where, double z, double err) {
    std::ostringstream os;
    os << where << ": quadrature did not converge at z = " << z
       << " (estimated error " << err << ")";
    throw NumericalError(os.str());
}

// int_0^eps w(t; z_hi) dt via the power substitution
complex leading_panel(const Coeffs& c, double z_hi, double eps, double tol) {
    const double u_end = std::pow(eps, c.a_over_g);
    auto f = [&](double u) { return c.w_substituted(z_hi, u); };
    QuadResult q = integrate_adaptive(f, 0.0, u_end, 1e-300, tol);
    if (!q.converged) quadrature_failure("ghat", z_hi, q.error);
    return q.value;
}

// rescaled integral int_0^z w(t; z) dt, z > 0
complex scaled_integral(const Coeffs& c, double z, double tol) {
    const double eps = std::min(0.1, z / 10.0);
    complex total = leading_panel(c, z, eps, tol);
    auto f = [&](double t) { return c.w(z, t); };
    QuadResult q = integrate_adaptive(f, eps, z, 1e-300, tol);
    if (!q.converged) quadrature_failure("ghat", z, q.error);
    return total + q.value;
}

// transform of the kink-matched reference density
//   R(z) = e^{izx} [ 2/(s^2 (z^2 + c^2)) + a3 z/(z^2 + c^2)^2 ],
// c^2 = 2 alpha / s^2, a3 = -4 i gamma x / s^4; R matches ghat to O(z^-4).
complex reference_transform(const Coeffs& c, double z) {
    const double s2 = c.sigma * c.sigma;
    const double c2 = 2.0 * c.alpha / s2;
    const double q = z * z + c2;
    const complex a3{0.0, -4.0 * c.gamma * c.x / (s2 * s2)};
    const complex osc{std::cos(z * c.x), std::sin(z * c.x)};
    return osc * (2.0 / (s2 * q) + a3 * z / (q * q));
}

} // namespace

void FourierGrid::validate() const {
    if (n_z < 256 || !is_power_of_two(static_cast<std::size_t>(n_z)))
        throw ConfigError("n_z must be a power of two >= 256, got " + std::to_string(n_z));
    if (!(z_max > 0.0) || !std::isfinite(z_max))
        throw ConfigError("z_max must be positive and finite");
    if (!(quad_tol > 0.0))
        throw ConfigError("quad_tol must be positive");
    if (!(mass_tol > 0.0) || !(identity_tol > 0.0) || !(clip_tol > 0.0) || !(tail_tol > 0.0))
        throw ConfigError("kernel tolerances must be positive");
}

double FourierGrid::dy() const { return kPi / z_max; }

complex homogeneous_H(const ModelParams& params, double alpha, double z) {
    if (z == 0.0)
        throw std::domain_error("homogeneous_H is singular at z = 0");
    const Coeffs c(params, alpha, 0.0);
    return std::exp(-c.s2_over_4g * z * z) * c.h0(z);
}

complex ghat(const ModelParams& params, double alpha, double x, double z, double quad_tol) {
    if (!(quad_tol > 0.0))
        throw ConfigError("ghat: quad_tol must be positive");
    if (z == 0.0) return {1.0 / alpha, 0.0};
    if (z < 0.0) return std::conj(ghat(params, alpha, x, -z, quad_tol));
    const Coeffs c(params, alpha, x);
    return c.h0(z) * scaled_integral(c, z, quad_tol) / params.gamma;
}

double ghat_tail_estimate(const ModelParams& params, double alpha, double z) {
    (void)alpha;
    if (params.sigma == 0.0) return std::numeric_limits<double>::infinity();
    return 2.0 / (params.sigma * params.sigma * z * z);
}

double ode_residual(const ModelParams& params, double alpha, double x,
                    double z, double h, double quad_tol) {
    if (!(h > 0.0))
        throw ConfigError("ode_residual: step h must be positive");
    if (std::abs(z) < 10.0 * h)
        throw ConfigError("ode_residual: |z| must be at least 10 h (singular point at 0)");
    const complex g0 = ghat(params, alpha, x, z, quad_tol);
    const complex gp = ghat(params, alpha, x, z + h, quad_tol);
    const complex gm = ghat(params, alpha, x, z - h, quad_tol);
    const complex dg = (gp - gm) / (2.0 * h);
    const complex iz{0.0, z};
    const complex factor = alpha + 0.5 * params.sigma * params.sigma * z * z -
                           iz * params.lambda / (complex{params.beta, 0.0} - iz);
    const complex lhs = factor * g0 + params.gamma * z * dg;
    const complex rhs{std::cos(z * x), std::sin(z * x)};
    return std::abs(lhs - rhs);
}

double KernelRow::reference(double y) const {
    const double d = y - x;
    return (ref_scale + ref_dipole * d) * std::exp(-ref_rate * std::abs(d));
}

const KernelRow* KernelGrid::find_row(double x) const {
    for (const KernelRow& r : rows) {
        if (std::abs(r.x - x) <= 1e-9 * std::max(1.0, std::abs(x)))
            return &r;
    }
    return nullptr;
}

std::vector<double> make_y_grid(const FourierGrid& grid) {
    const int n = grid.n_z;
    const double dy = grid.dy();
    std::vector<double> y(n);
    for (int m = 0; m < n; ++m) y[m] = (m - n / 2) * dy;
    return y;
}

namespace {

// analytic part of a row integral: int_lo^hi f(y) ref(y) dy by Gauss panels,
// split at the kink and kept short relative to the decay scale
double reference_integral(const KernelRow& row, double lo, double hi,
                          const std::function<double(double)>& f) {
    const double c = row.ref_rate;
    if (c <= 0.0 || lo >= hi) return 0.0;
    const double span = 50.0 / c;
    double a = std::max(lo, row.x - span);
    double b = std::min(hi, row.x + span);
    if (a >= b) return 0.0;

    auto h = [&](double y) { return f(y) * row.reference(y); };
    auto segment = [&](double s0, double s1) {
        if (s0 >= s1) return 0.0;
        const int n_panels = std::max(1, static_cast<int>(std::ceil((s1 - s0) * c / 4.0)));
        const double step = (s1 - s0) / n_panels;
        double sum = 0.0;
        for (int i = 0; i < n_panels; ++i)
            sum += gl16_panel(h, s0 + i * step, s0 + (i + 1) * step);
        return sum;
    };

    if (a < row.x && row.x < b)
        return segment(a, row.x) + segment(row.x, b);
    return segment(a, b);
}

} // namespace

double row_integrate_tail(const KernelRow& row, const std::vector<double>& y_values,
                          double b, const std::function<double(double)>& f) {
    const std::size_t n = y_values.size();
    if (n < 2 || row.density.size() != n)
        throw RowLookupError("row_integrate_tail: row/grid size mismatch");
    const double y_lo = y_values.front();
    const double y_hi = y_values.back();
    if (b > y_hi) return 0.0;

    const double dy = y_values[1] - y_values[0];
    auto h = [&](std::size_t i) {
        return f(y_values[i]) * (row.density[i] - row.reference(y_values[i]));
    };
    // central-difference slope of the smooth integrand at a node, for the
    // trapezoid endpoint correction (dy^2/12)(h'(start) - h'(end))
    auto slope = [&](std::size_t i) {
        if (i == 0) return (h(1) - h(0)) / dy;
        if (i + 1 >= n) return (h(n - 1) - h(n - 2)) / dy;
        return (h(i + 1) - h(i - 1)) / (2.0 * dy);
    };

    double trap = 0.0;
    double slope_at_b = 0.0;
    double ref_from = b;
    if (b <= y_lo) {
        ref_from = y_lo;
        for (std::size_t i = 0; i + 1 < n; ++i) trap += 0.5 * (h(i) + h(i + 1)) * dy;
        slope_at_b = slope(0);
    } else {
        const std::size_t idx = static_cast<std::size_t>(
            std::lower_bound(y_values.begin(), y_values.end(), b) - y_values.begin());
        for (std::size_t i = idx; i + 1 < n; ++i) trap += 0.5 * (h(i) + h(i + 1)) * dy;
        // partial cell [b, y_idx], linear interpolation of the smooth part
        const double t = (b - y_values[idx - 1]) / dy;
        const double sm_b = (row.density[idx - 1] - row.reference(y_values[idx - 1])) * (1.0 - t) +
                            (row.density[idx] - row.reference(y_values[idx])) * t;
        trap += 0.5 * (f(b) * sm_b + h(idx)) * (y_values[idx] - b);
        slope_at_b = slope(idx - 1) * (1.0 - t) + slope(idx) * t;
    }
    trap += dy * dy / 12.0 * (slope_at_b - slope(n - 1));
    return trap + reference_integral(row, ref_from, y_hi, f);
}

KernelRow build_kernel_row(const Problem& problem, const FourierGrid& grid,
                           double x, const std::vector<double>& y_values) {
    const ModelParams& p = problem.params;
    const double alpha = problem.alpha;
    const int n = grid.n_z;
    const int half = n / 2;
    const double dz = grid.dz();
    const double dy = grid.dy();

    if (std::abs(x) > 0.5 * std::abs(y_values.back()))
        throw ConfigError("kernel row source point too far out for the y-grid; increase n_z");

    const Coeffs c(p, alpha, x);

    // transform on the positive half grid, one quadrature panel per step
    std::vector<complex> gpos(half + 1);
    gpos[0] = {1.0 / alpha, 0.0};
    complex running = scaled_integral(c, dz, grid.quad_tol);
    gpos[1] = c.h0(dz) * running / p.gamma;
    for (int k = 1; k < half; ++k) {
        const double a = k * dz;
        const double b = (k + 1) * dz;
        const double damp = std::exp(-c.s2_over_4g * (b - a) * (b + a));
        auto f = [&](double t) { return c.w(b, t); };
        QuadResult q = integrate_adaptive(f, a, b, 1e-300, grid.quad_tol, 200);
        if (!q.converged) quadrature_failure("build_kernel_row", b, q.error);
        running = damp * running + q.value;
        gpos[k + 1] = c.h0(b) * running / p.gamma;
    }

    // subtract the reference transform; z = 0 entry vanishes exactly
    std::vector<complex> spec(n);
    spec[half] = {0.0, 0.0};
    for (int k = 1; k <= half; ++k) {
        const complex v = gpos[k] - reference_transform(c, k * dz);
        if (half + k < n) spec[half + k] = v;
        spec[half - k] = std::conj(v);
    }

    // centered inverse transform: G_m = (dz/2pi) (-1)^m sum_j (-1)^j spec_j e^{-2pi i j m/n}
    for (int j = 0; j < n; ++j)
        if (j & 1) spec[j] = -spec[j];
    fft_pow2(spec, -1);

    KernelRow row;
    row.x = x;
    row.ref_rate = std::sqrt(2.0 * alpha) / p.sigma;
    row.ref_scale = 1.0 / (p.sigma * std::sqrt(2.0 * alpha));
    row.ref_dipole = -p.gamma * x / (std::pow(p.sigma, 4) * row.ref_rate);
    row.density.resize(n);

    const double scale = dz / (2.0 * kPi);
    double max_imag = 0.0;
    for (int m = 0; m < n; ++m) {
        const complex v = ((m & 1) ? -spec[m] : spec[m]) * scale;
        max_imag = std::max(max_imag, std::abs(v.imag()));
        row.density[m] = v.real() + row.reference(y_values[m]);
    }
    if (max_imag > 1e-6)
        throw NumericalError("kernel row inversion left an imaginary residue of " +
                             std::to_string(max_imag));

    // clip small negatives from truncation ringing
    double neg_min = 0.0;
    double clipped = 0.0;
    for (double& d : row.density) {
        if (d < 0.0) {
            neg_min = std::min(neg_min, d);
            clipped += -d * dy;
            d = 0.0;
        }
    }
    if (-neg_min > grid.clip_tol) {
        std::ostringstream os;
        os << "kernel row at x = " << x << " has negative density " << neg_min
           << " beyond clip_tol = " << grid.clip_tol
           << "; increase z_max (and n_z to keep the z-step)";
        throw GridResolutionError(os.str());
    }
    row.clipped_mass = clipped;

    auto one = [](double) { return 1.0; };
    row.mass = row_integrate_tail(row, y_values, -std::numeric_limits<double>::infinity(), one);
    row.identity_residual =
        row_integrate_tail(row, y_values, -std::numeric_limits<double>::infinity(),
                           problem.excess) - x;

    // exponential-fit estimate of the density mass beyond y_max
    const double d_last = row.density[n - 1];
    const double d_prev = row.density[n - 2];
    if (d_last > 0.0 && d_prev > d_last) {
        const double rate = std::log(d_prev / d_last) / dy;
        row.tail_mass = d_last / rate;
    } else {
        row.tail_mass = d_last * dy;  // flat or zero tail: one extra cell
    }
    return row;
}

KernelGrid build_kernel_grid(const Problem& problem, const FourierGrid& grid, int threads) {
    grid.validate();
    problem.params.validate();

    const double tail = ghat_tail_estimate(problem.params, problem.alpha, grid.z_max);
    if (!(tail < grid.tail_tol)) {
        std::ostringstream os;
        os << "transform magnitude estimate at z_max is " << tail << " (tolerance "
           << grid.tail_tol << "); increase z_max";
        if (problem.params.sigma == 0.0)
            os << " -- sigma = 0 has no Gaussian component and is not invertible here";
        throw GridResolutionError(os.str());
    }

    KernelGrid out;
    out.params = problem.params;
    out.alpha = problem.alpha;
    out.grid = grid;
    out.y_values = make_y_grid(grid);
    out.rows.resize(grid.x_values.size());

    const std::size_t n_rows = grid.x_values.size();
    unsigned n_threads = threads > 0 ? static_cast<unsigned>(threads)
                                     : std::max(1u, std::thread::hardware_concurrency());
    n_threads = std::min<unsigned>(n_threads, static_cast<unsigned>(std::max<std::size_t>(n_rows, 1)));

    auto work = [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i)
            out.rows[i] = build_kernel_row(problem, grid, grid.x_values[i], out.y_values);
    };

    if (n_threads <= 1 || n_rows <= 1) {
        work(0, n_rows);
    } else {
        std::vector<std::future<void>> futs;
        const std::size_t chunk = (n_rows + n_threads - 1) / n_threads;
        for (std::size_t b = 0; b < n_rows; b += chunk)
            futs.push_back(std::async(std::launch::async, work, b, std::min(b + chunk, n_rows)));
        for (auto& f : futs) f.get();
    }

    const double target_mass = 1.0 / problem.alpha;
    for (const KernelRow& r : out.rows) {
        if (std::abs(r.mass - target_mass) > grid.mass_tol * target_mass) {
            std::ostringstream os;
            os << "row mass at x = " << r.x << " is " << r.mass << ", expected "
               << target_mass << " within " << grid.mass_tol
               << " relative; increase z_max or n_z";
            throw GridResolutionError(os.str());
        }
        if (std::abs(r.identity_residual) > grid.identity_tol) {
            std::ostringstream os;
            os << "resolvent identity residual at x = " << r.x << " is "
               << r.identity_residual << " (tolerance " << grid.identity_tol
               << "); increase z_max or n_z";
            throw GridResolutionError(os.str());
        }
        if (r.clipped_mass > 1e-4 * r.mass) {
            std::ostringstream os;
            os << "clipped negative mass at x = " << r.x << " is " << r.clipped_mass
               << ", more than 1e-4 of the row mass; increase z_max";
            throw GridResolutionError(os.str());
        }
    }
    return out;
}

} // namespace greenstop
