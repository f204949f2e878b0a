#pragma once

// Kernel machinery for the eigenvalues of truncated Haar-orthogonal matrices:
// the one-point weight, skew-orthogonal polynomials, the finite-M kernel sums,
// their M → ∞ limits, and Pfaffian k-point correlations.

#include <complex>
#include <optional>
#include <vector>

#include "kacpf/skewlin.hpp"

namespace kacpf {

using cplx = std::complex<double>;

/// A correlation argument: either a real point in (-1, 1) or a complex point
/// in the open upper half of the unit disk.
class Point {
public:
    static Point real(double x) { return Point(cplx{x, 0.0}, false); }
    static Point upper(cplx z) { return Point(z, true); }

    bool is_real() const noexcept { return !complex_; }
    bool is_complex() const noexcept { return complex_; }
    cplx value() const noexcept { return value_; }
    cplx conj() const noexcept { return std::conj(value_); }

private:
    Point(cplx value, bool complex) : value_(value), complex_(complex) {}
    cplx value_;
    bool complex_;
};

struct PointConfig {
    std::vector<double> xs;
    std::vector<cplx> zs;

    /// |x| < 1; |z| < 1 with Im z > 0; all points pairwise distinct.
    void validate() const;
    /// Real points first, then complex, in input order.
    std::vector<Point> points() const;
    std::size_t size() const noexcept { return xs.size() + zs.size(); }
};

// --- weights and skew-orthogonal polynomials -------------------------------

/// One-point weight w(z). For L >= 2 the inner integral is reduced to a
/// finite sin-power sum.
double weight_w(cplx z, int L);

/// w on the real line in closed Gamma-function form.
double weight_w_real(double x, int L);

/// √2·w, dispatching on the point kind.
double weight_tilde(const Point& p, int L);

/// Monic p_j, ascending coefficients. Odd j: x^j - (j-1)/(L+j-1) x^{j-2}.
std::vector<double> skew_poly(int j, int L);

/// (L+m)! / (L! m!), exact for L+m <= 20, log-Gamma beyond.
double generalized_binomial(int L, int m);

/// Skew norm r_j = L!(2j)!/(L+2j)!.
double skew_norm_r(int j, int L);

// --- kernel sets -----------------------------------------------------------

enum class KernelMode { Finite, Limiting };

/// The three kernel functions S, D and Ĩ over any combination of real and
/// complex arguments. Implementations are immutable and thread-safe.
class KernelSet {
public:
    virtual ~KernelSet() = default;

    int L() const noexcept { return L_; }
    virtual KernelMode mode() const noexcept = 0;
    /// Truncation size for finite kernels.
    virtual std::optional<int> M() const noexcept { return std::nullopt; }

    virtual cplx S(const Point& u, const Point& v) const = 0;
    virtual cplx D(const Point& u, const Point& v) const = 0;
    virtual cplx I(const Point& u, const Point& v) const = 0;

protected:
    explicit KernelSet(int L);

private:
    int L_;
};

/// Explicit sums over j = 0..M/2-1 built from q_j = w̃ p_j and τ_j.
class FiniteKernelSet final : public KernelSet {
public:
    FiniteKernelSet(int L, int M);

    KernelMode mode() const noexcept override { return KernelMode::Finite; }
    std::optional<int> M() const noexcept override { return M_; }

    cplx S(const Point& u, const Point& v) const override;
    cplx D(const Point& u, const Point& v) const override;
    cplx I(const Point& u, const Point& v) const override;

    /// q_j(u) and τ_j(u) for j = 0..M-1.
    struct Components {
        std::vector<cplx> q;
        std::vector<cplx> tau;
    };
    Components components(const Point& u) const;

private:
    int M_;
    std::vector<double> inverse_norms_;  // 1/r_j
};

/// Closed-form M → ∞ limits.
class LimitingKernelSet final : public KernelSet {
public:
    explicit LimitingKernelSet(int L);

    KernelMode mode() const noexcept override { return KernelMode::Limiting; }

    cplx S(const Point& u, const Point& v) const override;
    cplx D(const Point& u, const Point& v) const override;
    cplx I(const Point& u, const Point& v) const override;
};

FiniteKernelSet finite_kernels(int L, int M);
LimitingKernelSet limiting_kernels(int L);

// --- limiting entries ------------------------------------------------------

/// -w̃(u)w̃(v)(u-v)/(1-uv)^{L+1}.
cplx limit_D(const Point& u, const Point& v, int L);
cplx limit_S_cc(cplx z1, cplx z2, int L);
cplx limit_I_cc(cplx z1, cplx z2, int L);
double limit_S_rr(double x, double y, int L);

/// Ĩ_rr(x, y) = ∫_x^y S_rr(u, y) du + ½ sgn(x - y). Closed arcsine form at
/// L = 1, quadrature otherwise.
double limit_I_rr(double x, double y, int L);
/// Always by quadrature (used to cross-check the closed form).
double limit_I_rr_quadrature(double x, double y, int L);

struct CrossEntries {
    cplx S_cr;  // S(z, x)
    cplx S_rc;  // S(x, z)
    cplx D_cr;  // D(z, x)
    cplx D_rc;  // D(x, z)
    cplx I_cr;  // Ĩ(z, x)
    cplx I_rc;  // Ĩ(x, z)
};
CrossEntries limit_cross(cplx z, double x, int L);

// --- correlations ----------------------------------------------------------

/// The 2n×2n antisymmetric matrix whose Pfaffian is the n-point correlation:
/// 2×2 blocks [[S(u_j,u_l), -D(u_j,u_l)], [Ĩ(u_j,u_l), S(u_l,u_j)]] each
/// right-multiplied by [[0,1],[-1,0]].
SkewMatrix pfaffian_kernel_matrix(const PointConfig& points, const KernelSet& kernels);

/// Pfaffian correlation, complex-valued (imaginary part is round-off).
cplx rho_pfaffian_complex(const PointConfig& points, const KernelSet& kernels);
double rho_pfaffian(const PointConfig& points, const KernelSet& kernels);

/// L = 1 closed forms: real density, real two-point function, complex density.
double rho1_real_closed(double x);
double rho2_real_closed(double x1, double x2);
double rho1_complex_closed(cplx z);

/// The antisymmetric inner product ⟨p_j, p_k⟩ under the weight w, by nested
/// adaptive quadrature over the upper half disk plus the real sgn-kernel term.
struct InnerProductResult {
    double value = 0.0;
    double error = 0.0;
};
InnerProductResult skew_inner_product(int j, int k, int L);

}  // namespace kacpf
