#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <vector>

#include "greenstop/model.hpp"
#include "greenstop/quadrature.hpp"

namespace greenstop {

/// Settings of the frequency grid used to compute and invert the transform
/// of the resolvent density.  The z-grid is symmetric, z_j = (j - n_z/2) dz
/// with dz = 2 z_max / n_z; the induced y-grid has spacing dy = pi / z_max.
struct FourierGrid {
    int n_z = 4096;          // power of two, >= 256
    double z_max = 40.0;     // frequency cutoff
    std::vector<double> x_values;  // source states for build_kernel_grid
    double quad_tol = 1e-9;  // relative quadrature tolerance per frequency point

    double mass_tol = 1e-3;      // relative tolerance on per-row mass vs 1/alpha
    double identity_tol = 1e-2;  // tolerance on |int f G - x|
    double clip_tol = 1e-5;      // largest tolerated negative density value
    double tail_tol = 5e-3;      // bound on the |ghat(z_max)| magnitude estimate

    void validate() const;
    double dz() const { return 2.0 * z_max / n_z; }
    double dy() const;
};

/// Homogeneous solution of the frequency-domain ODE satisfied by the
/// transform:  H(z) = e^{-sigma^2 z^2/(4 gamma)} |z|^{-alpha/gamma}
///                    (beta - i z)^{-lambda/gamma},
/// principal branch (beta > 0 keeps the base in the right half-plane).
/// Throws std::domain_error at the singular point z = 0.
complex homogeneous_H(const ModelParams& params, double alpha, double z);

/// Transform of the resolvent density,
///   ghat(x, z) = (H(z)/gamma) int_0^z e^{i t x} / (t H(t)) dt,
/// evaluated by adaptive quadrature of an exponent-rescaled integrand so
/// that no intermediate grows like e^{+z^2}.  ghat(x, 0) = 1/alpha is the
/// analytic limit; negative z is evaluated by conjugate symmetry.
/// Throws NumericalError when the quadrature budget is exhausted.
complex ghat(const ModelParams& params, double alpha, double x, double z,
             double quad_tol = 1e-9);

/// Magnitude estimate of |ghat(x, z)| for large z, derived from the
/// dominant balance of the ODE: 2 / (sigma^2 z^2).  Infinite when
/// sigma = 0: without a Gaussian component the occupation measure keeps
/// a singular part and the grid inversion does not apply.
double ghat_tail_estimate(const ModelParams& params, double alpha, double z);

/// Self-consistency check: plugs a central finite difference of ghat into
///   (alpha + sigma^2 z^2/2 - i lambda z/(beta - i z)) ghat
///       + gamma z d(ghat)/dz = e^{i z x}
/// and returns the residual magnitude.  Requires |z| >= 10 h.
double ode_residual(const ModelParams& params, double alpha, double x,
                    double z, double h, double quad_tol = 1e-10);

/// One row of the discretized kernel density y -> G_alpha(x, y).
///
/// Each row carries the closed-form reference it was inverted against:
///   ref(y) = [ref_scale + ref_dipole (y - x)] e^{-ref_rate |y - x|}.
/// The reference matches the kink of the density at y = x (and the first
/// asymmetry correction), so the numerically transformed remainder is
/// smooth; row integrals treat the two parts separately.
struct KernelRow {
    double x = 0.0;
    std::vector<double> density;   // clipped to >= 0
    double mass = 0.0;             // int G(x, y) dy over the grid
    double identity_residual = 0.0;  // int f(y) G(x, y) dy - x
    double clipped_mass = 0.0;     // negative mass removed by clipping
    double tail_mass = 0.0;        // exponential-fit estimate beyond y_max
    double ref_rate = 0.0;
    double ref_scale = 0.0;
    double ref_dipole = 0.0;

    double reference(double y) const;
};

struct KernelGrid {
    ModelParams params;
    double alpha = 1.0;
    FourierGrid grid;
    std::vector<double> y_values;  // uniform, y_m = (m - n_z/2) dy
    std::vector<KernelRow> rows;

    /// Row whose source point matches x (no interpolation across rows).
    /// Returns nullptr when absent.
    const KernelRow* find_row(double x) const;
};

/// Builds one kernel row: evaluates the transform on the half grid with
/// incremental panel quadrature, subtracts the reference transform,
/// inverts with the FFT, adds the reference back, clips and validates.
KernelRow build_kernel_row(const Problem& problem, const FourierGrid& grid,
                           double x, const std::vector<double>& y_values);

/// Uniform y-grid induced by the settings.
std::vector<double> make_y_grid(const FourierGrid& grid);

/// Builds rows for every x in grid.x_values and checks the grid-level
/// invariants (mass, identity, positivity).  Throws GridResolutionError
/// with a resolution hint on failure.
KernelGrid build_kernel_grid(const Problem& problem, const FourierGrid& grid,
                             int threads = 1);

/// Tail integral of one stored row: int_b^{y_max} f(y) G(x, y) dy with the
/// smooth remainder handled by the trapezoid rule (sub-cell split at b)
/// and the reference part integrated by Gauss panels.  b below the grid
/// integrates the full row; b above it returns 0.
double row_integrate_tail(const KernelRow& row, const std::vector<double>& y_values,
                          double b, const std::function<double(double)>& f);

} // namespace greenstop
