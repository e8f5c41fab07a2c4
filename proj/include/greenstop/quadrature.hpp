#pragma once

#include <complex>
#include <functional>

namespace greenstop {

using complex = std::complex<double>;

struct QuadResult {
    complex value{0.0, 0.0};
    double error = 0.0;       // estimated absolute error
    int evaluations = 0;
    bool converged = true;
};

/// One Gauss-Kronrod 15(7) panel on [a, b].  The error estimate is the
/// usual scaled |K15 - G7| heuristic.
QuadResult gk15_panel(const std::function<complex(double)>& f, double a, double b);

/// Globally adaptive Gauss-Kronrod quadrature: repeatedly bisects the
/// interval with the largest error estimate until
///   total_error <= max(abs_tol, rel_tol * |value|)
/// or the interval budget is exhausted (converged = false in that case).
QuadResult integrate_adaptive(const std::function<complex(double)>& f,
                              double a, double b,
                              double abs_tol, double rel_tol,
                              int max_intervals = 4000);

/// Real-valued convenience wrapper.
double integrate_adaptive_real(const std::function<double(double)>& f,
                               double a, double b,
                               double abs_tol, double rel_tol,
                               int max_intervals = 4000);

/// Fixed-order Gauss-Legendre panel, for smooth integrands on short cells.
double gl16_panel(const std::function<double(double)>& f, double a, double b);

} // namespace greenstop
