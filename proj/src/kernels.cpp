#include "kacpf/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "kacpf/errors.hpp"
#include "kacpf/quadrature.hpp"

namespace kacpf {
namespace {

using std::numbers::pi;
constexpr cplx kI{0.0, 1.0};

// Limiting entries refuse |1 - uv| below this and points this close to ±1.
constexpr double kSingularProduct = 1e-12;
constexpr double kEdgeMargin = 1e-8;

void require_L(int L) {
    if (L < 1) throw InputError("L must be >= 1, got " + std::to_string(L));
}

double sgn(double v) { return static_cast<double>((v > 0.0) - (v < 0.0)); }

// L/(2π) Γ(1/2)Γ((L+1)/2)/Γ(L/2): the square of the real-axis weight at x = 0.
double real_weight_constant_sq(int L) {
    const double log_ratio = std::lgamma(0.5) + std::lgamma(0.5 * (L + 1)) - std::lgamma(0.5 * L);
    return L / (2.0 * pi) * std::exp(log_ratio);
}

// ∫_0^a sin^n φ dφ by the reduction n S_n = -cos a sin^{n-1} a + (n-1) S_{n-2}.
double sin_power_integral(double a, int n) {
    double even = a;
    double odd = 1.0 - std::cos(a);
    if (n == 0) return even;
    if (n == 1) return odd;
    const double s = std::sin(a);
    const double c = std::cos(a);
    double value = 0.0;
    for (int m = 2; m <= n; ++m) {
        double& prev = m % 2 == 0 ? even : odd;
        value = (-c * std::pow(s, m - 1) + (m - 1) * prev) / m;
        prev = value;
    }
    return value;
}

// ∫_0^θ cos^n φ dφ by the reduction n C_n = sin θ cos^{n-1} θ + (n-1) C_{n-2}.
double cos_power_integral_n(double theta, int n) {
    double even = theta;
    double odd = std::sin(theta);
    if (n == 0) return even;
    if (n == 1) return odd;
    const double s = std::sin(theta);
    const double c = std::cos(theta);
    double value = 0.0;
    for (int m = 2; m <= n; ++m) {
        double& prev = m % 2 == 0 ? even : odd;
        value = (s * std::pow(c, m - 1) + (m - 1) * prev) / m;
        prev = value;
    }
    return value;
}

// ∫_0^θ cos^{L-1}φ dφ, i.e. ∫_0^{sin θ} (1-t²)^{L/2-1} dt.
double cos_power_integral(double theta, int L) { return cos_power_integral_n(theta, L - 1); }

cplx eval_poly(const std::vector<double>& coefficients, cplx x) {
    cplx acc = 0.0;
    for (auto it = coefficients.rbegin(); it != coefficients.rend(); ++it) acc = acc * x + *it;
    return acc;
}

// p_j at x for all j < count, without materializing coefficient lists.
std::vector<cplx> skew_poly_values(cplx x, int L, int count) {
    std::vector<cplx> powers(static_cast<std::size_t>(std::max(count, 1)));
    powers[0] = 1.0;
    for (int j = 1; j < count; ++j) powers[j] = powers[j - 1] * x;
    std::vector<cplx> p(static_cast<std::size_t>(count));
    for (int j = 0; j < count; ++j) {
        p[j] = powers[j];
        if (j % 2 == 1 && j >= 3) p[j] -= static_cast<double>(j - 1) / (L + j - 1) * powers[j - 2];
    }
    return p;
}

void require_inside(const Point& p) {
    const cplx v = p.value();
    if (!(std::abs(v) < 1.0 - (p.is_real() ? kEdgeMargin : 0.0)) || std::abs(v - 1.0) < kEdgeMargin ||
        std::abs(v + 1.0) < kEdgeMargin) {
        throw DomainError("kernel argument (" + std::to_string(v.real()) + "," + std::to_string(v.imag()) +
                          ") is outside the open unit disk or too close to ±1");
    }
    if (p.is_complex() && !(v.imag() > 0.0)) {
        throw DomainError("complex kernel argument must have positive imaginary part");
    }
}

cplx checked_one_minus(cplx u, cplx v) {
    const cplx d = 1.0 - u * v;
    if (std::abs(d) < kSingularProduct) throw DomainError("kernel entry singular: |1 - uv| below cutoff");
    return d;
}

// Limiting S with the second argument real: analytic in the first slot apart
// from the weight factor.
cplx limit_S_second_real(const Point& u, double y, int L) {
    const Point v = Point::real(y);
    const cplx denom = std::pow(checked_one_minus(u.value(), y), L);
    return weight_tilde(u, L) * weight_tilde(v, L) * (1.0 - y * y) / (static_cast<double>(L) * denom);
}

cplx limit_D_values(cplx u, double wu, cplx v, double wv, int L) {
    const cplx denom = std::pow(checked_one_minus(u, v), L + 1);
    return -wu * wv * (u - v) / denom;
}

}  // namespace

// --- points ----------------------------------------------------------------

void PointConfig::validate() const {
    for (double x : xs) {
        if (!std::isfinite(x) || !(std::abs(x) < 1.0))
            throw DomainError("real point " + std::to_string(x) + " is outside (-1, 1)");
    }
    for (cplx z : zs) {
        if (!std::isfinite(z.real()) || !std::isfinite(z.imag()) || !(std::abs(z) < 1.0) || !(z.imag() > 0.0)) {
            throw DomainError("complex point (" + std::to_string(z.real()) + "," + std::to_string(z.imag()) +
                              ") is outside the open upper half disk");
        }
    }
    for (std::size_t a = 0; a < xs.size(); ++a)
        for (std::size_t b = a + 1; b < xs.size(); ++b)
            if (xs[a] == xs[b]) throw InputError("coincident real points at " + std::to_string(xs[a]));
    for (std::size_t a = 0; a < zs.size(); ++a)
        for (std::size_t b = a + 1; b < zs.size(); ++b)
            if (zs[a] == zs[b]) throw InputError("coincident complex points");
}

std::vector<Point> PointConfig::points() const {
    std::vector<Point> out;
    out.reserve(size());
    for (double x : xs) out.push_back(Point::real(x));
    for (cplx z : zs) out.push_back(Point::upper(z));
    return out;
}

// --- weights ---------------------------------------------------------------

double weight_w(cplx z, int L) {
    require_L(L);
    if (!(std::abs(z) < 1.0)) throw DomainError("weight_w: need |z| < 1");
    const double a = std::abs(1.0 - z * z);
    if (L == 1) {
        if (a == 0.0) throw DomainError("weight_w: singular at z = ±1");
        return std::sqrt(1.0 / (2.0 * pi)) / std::sqrt(a);
    }
    const double lower = 2.0 * std::abs(z.imag()) / a;
    if (lower > 1.0) return 0.0;
    // ∫_lower^1 (1-u²)^{(L-3)/2} du with u = cos φ.
    const double inner = sin_power_integral(std::acos(lower), L - 2);
    return std::sqrt(L * (L - 1) / (2.0 * pi) * std::pow(a, L - 2) * inner);
}

double weight_w_real(double x, int L) {
    require_L(L);
    if (!(std::abs(x) < 1.0)) throw DomainError("weight_w_real: need |x| < 1, got " + std::to_string(x));
    return std::sqrt(real_weight_constant_sq(L)) * std::pow(1.0 - x * x, 0.5 * L - 1.0);
}

double weight_tilde(const Point& p, int L) {
    return std::numbers::sqrt2 * (p.is_real() ? weight_w_real(p.value().real(), L) : weight_w(p.value(), L));
}

std::vector<double> skew_poly(int j, int L) {
    require_L(L);
    if (j < 0) throw InputError("skew_poly: degree must be >= 0");
    std::vector<double> c(static_cast<std::size_t>(j) + 1, 0.0);
    c[j] = 1.0;
    if (j % 2 == 1 && j >= 3) c[j - 2] = -static_cast<double>(j - 1) / (L + j - 1);
    return c;
}

double generalized_binomial(int L, int m) {
    if (L < 0 || m < 0) throw InputError("generalized_binomial: negative argument");
    if (L + m <= 20) {
        // C(L+m, m) exactly; every partial product is itself a binomial coefficient.
        std::uint64_t c = 1;
        for (int i = 1; i <= m; ++i) c = c * static_cast<std::uint64_t>(L + i) / static_cast<std::uint64_t>(i);
        return static_cast<double>(c);
    }
    return std::exp(std::lgamma(L + m + 1.0) - std::lgamma(L + 1.0) - std::lgamma(m + 1.0));
}

double skew_norm_r(int j, int L) {
    require_L(L);
    if (j < 0) throw InputError("skew_norm_r: index must be >= 0");
    return 1.0 / generalized_binomial(L, 2 * j);
}

// --- kernel sets -------------------------------------------------------------

KernelSet::KernelSet(int L) : L_(L) { require_L(L); }

FiniteKernelSet::FiniteKernelSet(int L, int M) : KernelSet(L), M_(M) {
    if (M < 2 || M % 2 != 0) throw InputError("finite kernels need even M >= 2, got " + std::to_string(M));
    inverse_norms_.resize(static_cast<std::size_t>(M / 2));
    for (int j = 0; j < M / 2; ++j) inverse_norms_[j] = generalized_binomial(L, 2 * j);
}

FiniteKernelSet::Components FiniteKernelSet::components(const Point& u) const {
    require_inside(u);
    const int L = this->L();
    const double wt = weight_tilde(u, L);
    Components c;
    c.q = skew_poly_values(u.value(), L, M_);
    for (cplx& v : c.q) v *= wt;
    c.tau.resize(c.q.size());

    if (u.is_complex()) {
        // τ_j(z) = i q_j(z̄); the weight is conjugation invariant.
        std::vector<cplx> p_bar = skew_poly_values(u.conj(), L, M_);
        for (int j = 0; j < M_; ++j) c.tau[j] = kI * wt * p_bar[j];
        return c;
    }

    const double x = u.value().real();
    const double edge = wt * (1.0 - x * x);  // w̃(x)(1 - x²) = √2 c (1-x²)^{L/2}
    // τ_0(x) = -∫_0^x q_0 by evenness of q_0.
    const double c0 = std::numbers::sqrt2 * std::sqrt(real_weight_constant_sq(L));
    c.tau[0] = -c0 * cos_power_integral(std::asin(x), L);
    double x_pow = 1.0;  // x^{2n}
    for (int n = 0; 2 * n + 1 < M_; ++n) {
        // Odd index: closed antiderivative.
        c.tau[2 * n + 1] = edge * x_pow / static_cast<double>(L + 2 * n);
        // Even index: forward recursion from τ_{2n}.
        if (2 * n + 2 < M_) {
            c.tau[2 * n + 2] =
                (static_cast<double>(2 * n + 1) * c.tau[2 * n] + edge * x_pow * x) / static_cast<double>(L + 2 * n + 1);
        }
        x_pow *= x * x;
    }
    return c;
}

cplx FiniteKernelSet::S(const Point& u, const Point& v) const {
    const Components a = components(u);
    const Components b = components(v);
    cplx sum = 0.0;
    for (int j = 0; j < M_ / 2; ++j)
        sum += inverse_norms_[j] * (a.q[2 * j] * b.tau[2 * j + 1] - a.q[2 * j + 1] * b.tau[2 * j]);
    return sum;
}

cplx FiniteKernelSet::D(const Point& u, const Point& v) const {
    const Components a = components(u);
    const Components b = components(v);
    cplx sum = 0.0;
    for (int j = 0; j < M_ / 2; ++j)
        sum += inverse_norms_[j] * (a.q[2 * j] * b.q[2 * j + 1] - a.q[2 * j + 1] * b.q[2 * j]);
    return sum;
}

cplx FiniteKernelSet::I(const Point& u, const Point& v) const {
    const Components a = components(u);
    const Components b = components(v);
    cplx sum = 0.0;
    for (int j = 0; j < M_ / 2; ++j)
        sum += inverse_norms_[j] * (a.tau[2 * j] * b.tau[2 * j + 1] - a.tau[2 * j + 1] * b.tau[2 * j]);
    if (u.is_real() && v.is_real()) sum += 0.5 * sgn(u.value().real() - v.value().real());
    return sum;
}

LimitingKernelSet::LimitingKernelSet(int L) : KernelSet(L) {}

cplx LimitingKernelSet::S(const Point& u, const Point& v) const {
    require_inside(u);
    require_inside(v);
    if (v.is_real()) return limit_S_second_real(u, v.value().real(), L());
    // S(u, z) = i D(u, z̄)
    return kI * limit_D_values(u.value(), weight_tilde(u, L()), v.conj(), weight_tilde(v, L()), L());
}

cplx LimitingKernelSet::D(const Point& u, const Point& v) const { return limit_D(u, v, L()); }

cplx LimitingKernelSet::I(const Point& u, const Point& v) const {
    require_inside(u);
    require_inside(v);
    const int L = this->L();
    if (u.is_real() && v.is_real()) return limit_I_rr(u.value().real(), v.value().real(), L);
    if (u.is_complex() && v.is_real()) return kI * limit_S_second_real(Point::upper(u.conj()), v.value().real(), L);
    if (u.is_real() && v.is_complex()) return -kI * limit_S_second_real(Point::upper(v.conj()), u.value().real(), L);
    return -limit_D_values(u.conj(), weight_tilde(u, L), v.conj(), weight_tilde(v, L), L);
}

FiniteKernelSet finite_kernels(int L, int M) { return FiniteKernelSet(L, M); }
LimitingKernelSet limiting_kernels(int L) { return LimitingKernelSet(L); }

// --- limiting entries ------------------------------------------------------

cplx limit_D(const Point& u, const Point& v, int L) {
    require_L(L);
    require_inside(u);
    require_inside(v);
    return limit_D_values(u.value(), weight_tilde(u, L), v.value(), weight_tilde(v, L), L);
}

cplx limit_S_cc(cplx z1, cplx z2, int L) { return LimitingKernelSet(L).S(Point::upper(z1), Point::upper(z2)); }

cplx limit_I_cc(cplx z1, cplx z2, int L) { return LimitingKernelSet(L).I(Point::upper(z1), Point::upper(z2)); }

double limit_S_rr(double x, double y, int L) {
    require_L(L);
    const Point u = Point::real(x);
    require_inside(u);
    require_inside(Point::real(y));
    return limit_S_second_real(u, y, L).real();
}

double limit_I_rr_quadrature(double x, double y, int L) {
    require_L(L);
    require_inside(Point::real(x));
    require_inside(Point::real(y));
    if (x == y) return 0.0;
    const QuadratureResult r = integrate([&](double u) { return limit_S_rr(u, y, L); }, x, y);
    return r.value + 0.5 * sgn(x - y);
}

double limit_I_rr(double x, double y, int L) {
    if (L != 1) return limit_I_rr_quadrature(x, y, L);
    require_inside(Point::real(x));
    require_inside(Point::real(y));
    const double ratio = std::sqrt((1.0 - x * x) * (1.0 - y * y)) / checked_one_minus(x, y).real();
    return sgn(x - y) / pi * std::asin(std::min(1.0, ratio));
}

CrossEntries limit_cross(cplx z, double x, int L) {
    const LimitingKernelSet k(L);
    const Point zp = Point::upper(z);
    const Point xp = Point::real(x);
    return CrossEntries{k.S(zp, xp), k.S(xp, zp), k.D(zp, xp), k.D(xp, zp), k.I(zp, xp), k.I(xp, zp)};
}

// --- correlations ----------------------------------------------------------

SkewMatrix pfaffian_kernel_matrix(const PointConfig& config, const KernelSet& kernels) {
    config.validate();
    const std::vector<Point> pts = config.points();
    const auto n = static_cast<Eigen::Index>(pts.size());
    if (n == 0) throw InputError("pfaffian_kernel_matrix: no points");
    Eigen::MatrixXcd k(2 * n, 2 * n);
    for (Eigen::Index j = 0; j < n; ++j) {
        for (Eigen::Index l = 0; l < n; ++l) {
            const Point& u = pts[j];
            const Point& v = pts[l];
            // [[S_jl, -D_jl], [Ĩ_jl, S_lj]] · [[0, 1], [-1, 0]]
            k(2 * j, 2 * l) = kernels.D(u, v);
            k(2 * j, 2 * l + 1) = kernels.S(u, v);
            k(2 * j + 1, 2 * l) = -kernels.S(v, u);
            k(2 * j + 1, 2 * l + 1) = kernels.I(u, v);
        }
    }
    const double scale = std::max(1.0, k.cwiseAbs().maxCoeff());
    const double asym = (k + k.transpose()).cwiseAbs().maxCoeff();
    if (asym > 1e-10 * scale) {
        throw ConsistencyError("assembled kernel matrix is not antisymmetric (residual " + std::to_string(asym) + ")");
    }
    return SkewMatrix(0.5 * (k - k.transpose()));
}

cplx rho_pfaffian_complex(const PointConfig& points, const KernelSet& kernels) {
    return pfaffian(pfaffian_kernel_matrix(points, kernels));
}

double rho_pfaffian(const PointConfig& points, const KernelSet& kernels) {
    return rho_pfaffian_complex(points, kernels).real();
}

double rho1_real_closed(double x) {
    if (!(std::abs(x) < 1.0)) throw DomainError("rho1_real_closed: need |x| < 1");
    return 1.0 / (pi * (1.0 - x * x));
}

double rho2_real_closed(double x1, double x2) {
    if (!(std::abs(x1) < 1.0 && std::abs(x2) < 1.0)) throw DomainError("rho2_real_closed: need |x| < 1");
    const double a = 1.0 - x1 * x1;
    const double b = 1.0 - x2 * x2;
    const double c = 1.0 - x1 * x2;
    const double d = x1 - x2;
    const double first = d * d / (pi * pi * c * c * a * b);
    const double second =
        std::abs(d) / (pi * pi * c * c * std::sqrt(a * b)) * std::asin(std::min(1.0, std::sqrt(a * b) / c));
    return first + second;
}

double rho1_complex_closed(cplx z) {
    if (!(std::abs(z) < 1.0)) throw DomainError("rho1_complex_closed: need |z| < 1");
    const double r2 = std::norm(z);
    return std::abs(z - std::conj(z)) / (pi * std::abs(1.0 - z * z) * (1.0 - r2) * (1.0 - r2));
}

InnerProductResult skew_inner_product(int j, int k, int L) {
    require_L(L);
    const std::vector<double> pj = skew_poly(j, L);
    const std::vector<double> pk = skew_poly(k, L);
    QuadratureOptions inner_opts;
    inner_opts.abs_tol = 1e-12;
    inner_opts.rel_tol = 1e-10;
    inner_opts.throw_on_failure = false;
    QuadratureOptions outer_opts = inner_opts;
    outer_opts.abs_tol = 1e-10;
    outer_opts.rel_tol = 1e-8;

    // Upper half disk in polar coordinates. For real-coefficient polynomials
    // 2i(g1(z)g2(z̄) - g1(z̄)g2(z)) = -4 Im(g1(z) g2(z̄)). At L = 1 the weight
    // blows up at z = ±1, so both directions use the double-exponential rule.
    double inner_error = 0.0;
    auto radial = [&](double theta) {
        const cplx e = std::polar(1.0, theta);
        const QuadratureResult r = integrate_endpoint_singular(
            [&](double rad) {
                if (!(rad > 0.0 && rad < 1.0)) return 0.0;
                const cplx z = rad * e;
                const double w = weight_w(z, L);
                return -4.0 * w * w * std::imag(eval_poly(pj, z) * eval_poly(pk, std::conj(z))) * rad;
            },
            0.0, 1.0, inner_opts);
        inner_error = std::max(inner_error, r.error);
        return r.value;
    };
    const QuadratureResult disk = integrate_endpoint_singular(radial, 0.0, pi, outer_opts);

    // Real line with x = sin θ, so w(x)dx = c cos^{L-1}θ dθ; the integrands are
    // trigonometric polynomials and a fixed rule is exact.
    const double c = std::sqrt(real_weight_constant_sq(L));
    auto weighted = [&](const std::vector<double>& p, double theta) {
        return c * std::pow(std::cos(theta), L - 1) * eval_poly(p, std::sin(theta)).real();
    };
    const double half = pi / 2.0;
    auto cumulative = [&](double theta) {
        return integrate_fixed([&](double phi) { return weighted(pj, phi); }, -half, theta);
    };
    const double total = cumulative(half);
    // ∫∫ w w g1(x1) g2(x2) sgn(x2 - x1) = ∫ w g2(x2) (2F(x2) - F(1)) dx2
    const double line =
        integrate_fixed([&](double theta) { return weighted(pk, theta) * (2.0 * cumulative(theta) - total); }, -half,
                        half);

    InnerProductResult out;
    out.value = disk.value + line;
    out.error = disk.error + pi * inner_error;
    return out;
}

}  // namespace kacpf
