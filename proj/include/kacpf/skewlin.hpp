#pragma once

// Dense kernels shared by the analytic evaluators: Pfaffian, Hafnian and the
// LU/Cholesky helpers the Gaussian-integral formulas need.

#include <complex>

#include <Eigen/Dense>

namespace kacpf {

using cplx = std::complex<double>;

/// Even-dimensional complex antisymmetric matrix.
///
/// Construction validates the shape, rejects NaN/Inf, and checks
/// |a(j,l) + a(l,j)| <= 1e-12 * max|a|. The stored entries are the input as
/// given; no symmetrization is applied.
class SkewMatrix {
public:
    explicit SkewMatrix(Eigen::MatrixXcd entries);

    Eigen::Index dim() const noexcept { return entries_.rows(); }
    const Eigen::MatrixXcd& entries() const noexcept { return entries_; }
    cplx operator()(Eigen::Index row, Eigen::Index col) const { return entries_(row, col); }

private:
    Eigen::MatrixXcd entries_;
};

/// Even-dimensional complex symmetric matrix, symmetrized as (A + Aᵀ)/2 on construction.
class SymMatrix {
public:
    explicit SymMatrix(const Eigen::MatrixXcd& entries);

    Eigen::Index dim() const noexcept { return entries_.rows(); }
    const Eigen::MatrixXcd& entries() const noexcept { return entries_; }
    cplx operator()(Eigen::Index row, Eigen::Index col) const { return entries_(row, col); }

private:
    Eigen::MatrixXcd entries_;
};

/// Pfaffian by skew-symmetric Gaussian elimination (Parlett–Reid) with
/// partial pivoting. A pivot below 1e-14 * max|entry| yields exactly 0.
cplx pfaffian(const SkewMatrix& matrix);

inline constexpr int kDefaultHafnianPairCap = 8;

/// Sum over perfect matchings of the product of paired entries.
///
/// Dynamic programming over subsets, O(2^n · n). Throws CapacityError when
/// dim/2 exceeds `max_pairs`.
cplx hafnian(const SymMatrix& matrix, int max_pairs = kDefaultHafnianPairCap);

// LU-based helpers. `inverse` and `solve` throw SingularityError when the
// reciprocal condition estimate falls below kSingularRcond.
inline constexpr double kSingularRcond = 1e-14;

double det(const Eigen::MatrixXd& matrix);
cplx det(const Eigen::MatrixXcd& matrix);

Eigen::MatrixXd inverse(const Eigen::MatrixXd& matrix);
Eigen::MatrixXcd inverse(const Eigen::MatrixXcd& matrix);

Eigen::VectorXd solve(const Eigen::MatrixXd& matrix, const Eigen::VectorXd& rhs);
Eigen::VectorXcd solve(const Eigen::MatrixXcd& matrix, const Eigen::VectorXcd& rhs);

/// Reciprocal 1-norm condition estimate from an LU factorization.
double rcond(const Eigen::MatrixXd& matrix);
double rcond(const Eigen::MatrixXcd& matrix);

/// Lower-triangular L with L·Lᵀ = P. P must be symmetric to 1e-12 (relative)
/// and positive definite; otherwise throws.
Eigen::MatrixXd cholesky(const Eigen::MatrixXd& spd);

}  // namespace kacpf
