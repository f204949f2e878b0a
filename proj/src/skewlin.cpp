#include "kacpf/skewlin.hpp"

#include <bit>
#include <cmath>
#include <string>
#include <vector>

#include "kacpf/errors.hpp"

namespace kacpf {
namespace {

template <typename Matrix>
void require_square(const Matrix& m, const char* op) {
    if (m.rows() != m.cols()) {
        throw StructuralError(std::string(op) + ": matrix is " + std::to_string(m.rows()) + "x" +
                              std::to_string(m.cols()) + ", expected square");
    }
}

template <typename Matrix>
void require_even_square(const Matrix& m, const char* op) {
    require_square(m, op);
    if (m.rows() == 0 || m.rows() % 2 != 0) {
        throw StructuralError(std::string(op) + ": dimension " + std::to_string(m.rows()) +
                              " is not a positive even number");
    }
}

template <typename Matrix>
void require_finite(const Matrix& m, const char* op) {
    if (!m.allFinite()) {
        throw InputError(std::string(op) + ": matrix has NaN or Inf entries");
    }
}

template <typename Matrix>
double rcond_impl(const Matrix& m) {
    require_square(m, "rcond");
    if (m.rows() == 0) return 1.0;
    Eigen::PartialPivLU<Matrix> lu(m);
    // PartialPivLU never reports rank deficiency, and its estimate can come back
    // as 1 for an exactly zero pivot. The pivot ratio bounds rcond from above.
    const auto pivots = lu.matrixLU().diagonal().cwiseAbs();
    const double largest = pivots.maxCoeff();
    if (!(largest > 0.0)) return 0.0;
    const double r = std::min(lu.rcond(), pivots.minCoeff() / largest);
    return std::isfinite(r) ? r : 0.0;
}

template <typename Matrix>
Eigen::PartialPivLU<Matrix> checked_lu(const Matrix& m, const char* op) {
    require_square(m, op);
    require_finite(m, op);
    Eigen::PartialPivLU<Matrix> lu(m);
    double r = lu.rcond();
    if (!std::isfinite(r)) r = 0.0;
    if (r < kSingularRcond) {
        throw SingularityError(std::string(op) + ": matrix is singular to working precision",
                               r > 0.0 ? 1.0 / r : INFINITY);
    }
    return lu;
}

}  // namespace

SkewMatrix::SkewMatrix(Eigen::MatrixXcd entries) : entries_(std::move(entries)) {
    require_even_square(entries_, "SkewMatrix");
    require_finite(entries_, "SkewMatrix");
    const double scale = entries_.cwiseAbs().maxCoeff();
    const double tol = 1e-12 * scale;
    for (Eigen::Index j = 0; j < dim(); ++j) {
        for (Eigen::Index l = j; l < dim(); ++l) {
            if (std::abs(entries_(j, l) + entries_(l, j)) > tol) {
                throw StructuralError("SkewMatrix: entries (" + std::to_string(j) + "," +
                                      std::to_string(l) + ") violate antisymmetry");
            }
        }
    }
}

SymMatrix::SymMatrix(const Eigen::MatrixXcd& entries) {
    require_even_square(entries, "SymMatrix");
    require_finite(entries, "SymMatrix");
    entries_ = 0.5 * (entries + entries.transpose());
}

cplx pfaffian(const SkewMatrix& matrix) {
    Eigen::MatrixXcd a = matrix.entries();
    const Eigen::Index n = a.rows();
    const double threshold = 1e-14 * a.cwiseAbs().maxCoeff();
    if (threshold == 0.0) return 0.0;

    cplx result = 1.0;
    for (Eigen::Index k = 0; k + 1 < n; k += 2) {
        // Pivot: largest entry in column k below the diagonal.
        Eigen::Index offset = 0;
        a.col(k).tail(n - k - 1).cwiseAbs().maxCoeff(&offset);
        const Eigen::Index pivot = k + 1 + offset;
        if (pivot != k + 1) {
            a.row(k + 1).swap(a.row(pivot));
            a.col(k + 1).swap(a.col(pivot));
            result = -result;
        }
        if (std::abs(a(k + 1, k)) <= threshold) return 0.0;

        result *= a(k, k + 1);
        const Eigen::Index rest = n - k - 2;
        if (rest > 0) {
            const Eigen::VectorXcd tau = a.row(k).tail(rest).transpose() / a(k, k + 1);
            const Eigen::VectorXcd col = a.col(k + 1).tail(rest);
            a.bottomRightCorner(rest, rest) += tau * col.transpose() - col * tau.transpose();
        }
    }
    return result;
}

cplx hafnian(const SymMatrix& matrix, int max_pairs) {
    const auto n = static_cast<int>(matrix.dim());
    if (n / 2 > max_pairs) {
        throw CapacityError("hafnian: " + std::to_string(n / 2) + " pairs exceeds cap of " +
                            std::to_string(max_pairs));
    }
    if (n > 30) {
        throw CapacityError("hafnian: dimension " + std::to_string(n) + " too large for subset table");
    }

    // table[mask] = hafnian of the principal submatrix on the set bits of mask.
    // Every mask reachable from the full set by removing the lowest element and
    // a partner is smaller than its parent, so a forward sweep suffices.
    const std::size_t size = std::size_t{1} << n;
    std::vector<cplx> table(size, cplx{0.0});
    table[0] = 1.0;
    for (std::size_t mask = 3; mask < size; ++mask) {
        if (std::popcount(mask) % 2 != 0) continue;
        const int first = std::countr_zero(mask);
        const std::size_t without_first = mask & ~(std::size_t{1} << first);
        cplx sum = 0.0;
        for (std::size_t rest = without_first; rest != 0; rest &= rest - 1) {
            const int partner = std::countr_zero(rest);
            sum += matrix(first, partner) * table[without_first & ~(std::size_t{1} << partner)];
        }
        table[mask] = sum;
    }
    return table[size - 1];
}

double det(const Eigen::MatrixXd& matrix) {
    require_square(matrix, "det");
    require_finite(matrix, "det");
    if (matrix.rows() == 0) return 1.0;
    return Eigen::PartialPivLU<Eigen::MatrixXd>(matrix).determinant();
}

cplx det(const Eigen::MatrixXcd& matrix) {
    require_square(matrix, "det");
    require_finite(matrix, "det");
    if (matrix.rows() == 0) return 1.0;
    return Eigen::PartialPivLU<Eigen::MatrixXcd>(matrix).determinant();
}

Eigen::MatrixXd inverse(const Eigen::MatrixXd& matrix) { return checked_lu(matrix, "inverse").inverse(); }

Eigen::MatrixXcd inverse(const Eigen::MatrixXcd& matrix) {
    return checked_lu(matrix, "inverse").inverse();
}

Eigen::VectorXd solve(const Eigen::MatrixXd& matrix, const Eigen::VectorXd& rhs) {
    if (rhs.size() != matrix.rows()) throw StructuralError("solve: right-hand side has wrong length");
    return checked_lu(matrix, "solve").solve(rhs);
}

Eigen::VectorXcd solve(const Eigen::MatrixXcd& matrix, const Eigen::VectorXcd& rhs) {
    if (rhs.size() != matrix.rows()) throw StructuralError("solve: right-hand side has wrong length");
    return checked_lu(matrix, "solve").solve(rhs);
}

double rcond(const Eigen::MatrixXd& matrix) { return rcond_impl(matrix); }
double rcond(const Eigen::MatrixXcd& matrix) { return rcond_impl(matrix); }

Eigen::MatrixXd cholesky(const Eigen::MatrixXd& spd) {
    require_square(spd, "cholesky");
    require_finite(spd, "cholesky");
    const double scale = spd.cwiseAbs().maxCoeff();
    if ((spd - spd.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
        throw StructuralError("cholesky: matrix is not symmetric");
    }
    Eigen::LLT<Eigen::MatrixXd> llt(spd);
    if (llt.info() != Eigen::Success) {
        throw SingularityError("cholesky: matrix is not positive definite", INFINITY);
    }
    return llt.matrixL();
}

}  // namespace kacpf
