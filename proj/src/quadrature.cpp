#include "kacpf/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>
#include <string>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include "kacpf/errors.hpp"

namespace kacpf {
namespace {

std::string missed(const char* rule, double error, double target) {
    std::ostringstream msg;
    msg << std::setprecision(3) << rule << ": estimated error " << error << " above target " << target;
    return msg.str();
}

}  // namespace

QuadratureResult integrate(const std::function<double(double)>& f, double a, double b,
                           const QuadratureOptions& options) {
    QuadratureResult result;
    if (a == b) return result;
    using Rule = boost::math::quadrature::gauss_kronrod<double, 31>;
    double l1 = 0.0;
    result.value = Rule::integrate(f, a, b, options.max_depth, options.rel_tol, &result.error, &l1);
    const double target = std::max(options.abs_tol, options.rel_tol * std::abs(result.value));
    // Boost terminates on error <= rel_tol * L1; accept that too, since the
    // integrands here are sign-changing polynomial products with |value| << L1.
    result.converged = std::isfinite(result.value) &&
                       (result.error <= target || result.error <= options.rel_tol * l1);
    if (!result.converged && options.throw_on_failure) {
        throw ToleranceError(missed("integrate", result.error, target), result.error);
    }
    return result;
}

namespace {

template <typename F>
QuadratureResult tanh_sinh_rule(const F& f, double a, double b, const QuadratureOptions& options) {
    QuadratureResult result;
    if (a == b) return result;
    thread_local boost::math::quadrature::tanh_sinh<double> rule(15);
    double l1 = 0.0;
    std::size_t levels = 0;
    result.value = rule.integrate(f, a, b, options.rel_tol, &result.error, &l1, &levels);
    const double target = std::max(options.abs_tol, options.rel_tol * std::max(std::abs(result.value), l1));
    result.converged = std::isfinite(result.value) && result.error <= target;
    if (!result.converged && options.throw_on_failure) {
        throw ToleranceError(missed("integrate_endpoint_singular", result.error, target), result.error);
    }
    return result;
}

}  // namespace

QuadratureResult integrate_endpoint_singular(const std::function<double(double)>& f, double a, double b,
                                             const QuadratureOptions& options) {
    return tanh_sinh_rule([&f](double x) { return f(x); }, a, b, options);
}

QuadratureResult integrate_endpoint_singular(const std::function<double(double, double)>& f, double a, double b,
                                             const QuadratureOptions& options) {
    return tanh_sinh_rule([&f](double x, double xc) { return f(x, xc); }, a, b, options);
}

double integrate_fixed(const std::function<double(double)>& f, double a, double b) {
    return boost::math::quadrature::gauss<double, 30>::integrate(f, a, b);
}

std::complex<double> integrate_complex(const std::function<std::complex<double>(double)>& f, double a,
                                       double b, const QuadratureOptions& options) {
    const double re = integrate([&](double t) { return f(t).real(); }, a, b, options).value;
    const double im = integrate([&](double t) { return f(t).imag(); }, a, b, options).value;
    return {re, im};
}

}  // namespace kacpf
