#pragma once

#include <complex>
#include <functional>

namespace kacpf {

struct QuadratureOptions {
    double abs_tol = 1e-12;
    double rel_tol = 1e-10;
    unsigned max_depth = 20;
    // When false, a missed tolerance is reported through QuadratureResult::converged.
    bool throw_on_failure = true;
};

struct QuadratureResult {
    double value = 0.0;
    double error = 0.0;
    bool converged = true;
};

/// Adaptive 31-point Gauss–Kronrod quadrature on [a, b] (b < a allowed).
/// Converged means error <= max(abs_tol, rel_tol * |value|).
QuadratureResult integrate(const std::function<double(double)>& f, double a, double b,
                           const QuadratureOptions& options = {});

/// Double-exponential (tanh-sinh) quadrature on a finite interval, for
/// integrands with endpoint singularities or endpoint boundary layers. f is
/// never evaluated at a or b.
QuadratureResult integrate_endpoint_singular(const std::function<double(double)>& f, double a, double b,
                                             const QuadratureOptions& options = {});
/// Same, with f(x, xc) where xc is the distance to the nearer endpoint: b - x
/// on the upper half of the interval, a - x (negative) on the lower half. Use
/// it when the singular factor needs b - x or x - a to full precision.
QuadratureResult integrate_endpoint_singular(const std::function<double(double, double)>& f, double a, double b,
                                             const QuadratureOptions& options = {});

/// Fixed 30-point Gauss–Legendre rule; exact to rounding for smooth integrands
/// of low trigonometric or polynomial degree.
double integrate_fixed(const std::function<double(double)>& f, double a, double b);

/// Same, applied separately to the real and imaginary parts.
std::complex<double> integrate_complex(const std::function<std::complex<double>(double)>& f, double a,
                                       double b, const QuadratureOptions& options = {});

}  // namespace kacpf
