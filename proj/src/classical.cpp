#include "kacpf/classical.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "kacpf/ensembles.hpp"
#include "kacpf/errors.hpp"
#include "kacpf/parallel.hpp"
#include "kacpf/skewlin.hpp"

namespace kacpf {
namespace {

using std::numbers::pi;

constexpr double kEdgeDistance = 1e-6;
constexpr std::size_t kDrawsPerBatch = 1 << 16;
constexpr double kMaxHermitianCondition = 1e10;

// Running mean and squared deviation; merges exactly across partitions.
struct Moments {
    double count = 0.0;
    double mean = 0.0;
    double m2 = 0.0;

    void add(double v) {
        count += 1.0;
        const double d = v - mean;
        mean += d / count;
        m2 += d * (v - mean);
    }
    void merge(const Moments& o) {
        if (o.count == 0.0) return;
        const double n = count + o.count;
        const double d = o.mean - mean;
        mean += d * o.count / n;
        m2 += o.m2 + d * d * count * o.count / n;
        count = n;
    }
};

void validate_real_points(std::span<const double> xs) {
    if (xs.empty()) throw InputError("bleher_di_rho: need at least one point");
    for (double x : xs) {
        if (!std::isfinite(x) || !(std::abs(x) < 1.0 - kEdgeDistance))
            throw DomainError("bleher_di_rho: point " + std::to_string(x) + " not inside (-1+1e-6, 1-1e-6)");
    }
    for (std::size_t a = 0; a < xs.size(); ++a)
        for (std::size_t b = a + 1; b < xs.size(); ++b)
            if (xs[a] == xs[b])
                throw SingularityError("bleher_di_rho: coincident points at " + std::to_string(xs[a]), INFINITY);
}

}  // namespace

Eigen::MatrixXd delta_matrix(std::span<const double> xs) {
    const auto k = static_cast<Eigen::Index>(xs.size());
    Eigen::MatrixXd delta(2 * k, 2 * k);
    for (Eigen::Index j = 0; j < k; ++j) {
        for (Eigen::Index l = 0; l < k; ++l) {
            const double xj = xs[j];
            const double xl = xs[l];
            const double t = 1.0 - xj * xl;
            delta(2 * j, 2 * l) = 1.0 / t;
            delta(2 * j, 2 * l + 1) = xj / (t * t);
            delta(2 * j + 1, 2 * l) = xl / (t * t);
            delta(2 * j + 1, 2 * l + 1) = (1.0 + xj * xl) / (t * t * t);
        }
    }
    return delta;
}

Eigen::MatrixXd omega_matrix(const Eigen::MatrixXd& delta) {
    if (delta.rows() != delta.cols() || delta.rows() % 2 != 0)
        throw StructuralError("omega_matrix: Δ must be square with even dimension");
    const Eigen::MatrixXd inv = inverse(delta);
    const Eigen::Index k = delta.rows() / 2;
    Eigen::MatrixXd omega(k, k);
    for (Eigen::Index j = 0; j < k; ++j)
        for (Eigen::Index l = 0; l < k; ++l) omega(j, l) = inv(2 * j + 1, 2 * l + 1);
    return 0.5 * (omega + omega.transpose());
}

BleherDiResult bleher_di_rho(std::span<const double> xs, const BleherDiOptions& options) {
    validate_real_points(xs);
    const auto k = static_cast<int>(xs.size());
    const Eigen::MatrixXd delta = delta_matrix(xs);

    Eigen::LLT<Eigen::MatrixXd> delta_llt(delta);
    const double delta_rcond = rcond(delta);
    if (delta_llt.info() != Eigen::Success || delta_rcond < kSingularRcond) {
        throw SingularityError("bleher_di_rho: covariance matrix is numerically singular",
                               delta_rcond > 0.0 ? 1.0 / delta_rcond : INFINITY);
    }

    // Σ = Ω⁻¹ is the conditional covariance of the derivatives given f = 0,
    // formed directly as the Schur complement of the value block of Δ.
    Eigen::MatrixXd dff(k, k), dfd(k, k), ddd(k, k);
    for (Eigen::Index j = 0; j < k; ++j) {
        for (Eigen::Index l = 0; l < k; ++l) {
            dff(j, l) = delta(2 * j, 2 * l);
            dfd(j, l) = delta(2 * j, 2 * l + 1);
            ddd(j, l) = delta(2 * j + 1, 2 * l + 1);
        }
    }
    const Eigen::LLT<Eigen::MatrixXd> value_llt(dff);
    const Eigen::MatrixXd half = value_llt.matrixL().solve(dfd);
    Eigen::MatrixXd sigma = ddd - half.transpose() * half;
    sigma = 0.5 * (sigma + sigma.transpose());
    Eigen::LLT<Eigen::MatrixXd> sigma_llt(sigma);
    if (value_llt.info() != Eigen::Success || sigma_llt.info() != Eigen::Success) {
        throw ConsistencyError("bleher_di_rho: Ω is not positive definite for these points");
    }
    const Eigen::MatrixXd chol = sigma_llt.matrixL();
    const double sqrt_det_values = value_llt.matrixL().toDenseMatrix().diagonal().prod();

    // det Δ = det Δ_ff · det Σ, so (2π)^{-k}/√det Δ · (2π)^{k/2} √det Σ reduces to
    // (2π)^{-k/2}/√det Δ_ff; E|∏Y| with Y ~ N(0, Σ) carries the rest.
    const double prefactor = std::pow(2.0 * pi, -0.5 * k) / sqrt_det_values;

    BleherDiResult result;
    if (k == 1) {
        result.value = prefactor * std::sqrt(2.0 / pi) * std::sqrt(sigma(0, 0));
        return result;
    }
    if (k == 2) {
        const double s11 = sigma(0, 0);
        const double s22 = sigma(1, 1);
        const double s12 = sigma(0, 1);
        const double det = std::max(0.0, s11 * s22 - s12 * s12);
        const double corr = std::clamp(s12 / std::sqrt(s11 * s22), -1.0, 1.0);
        const double expected_abs_product = 2.0 / pi * (std::sqrt(det) + s12 * std::asin(corr));
        result.value = prefactor * expected_abs_product;
        return result;
    }

    result.method = EvaluationMethod::MonteCarlo;
    Moments total;
    std::size_t next_partition = 0;
    const std::size_t max_partitions = std::max<std::size_t>(1, options.max_draws / kDrawsPerBatch);
    const std::size_t min_partitions =
        std::min(max_partitions, std::max<std::size_t>(1, options.min_draws / kDrawsPerBatch));
    std::size_t target = min_partitions;
    while (true) {
        const std::size_t first = next_partition;
        auto batches = run_partitions<Moments>(target - first, options.threads, [&](std::size_t offset) {
            Rng rng = partition_rng(options.seed, first + offset);
            std::normal_distribution<double> normal;
            Eigen::VectorXd z(k);
            Moments m;
            for (std::size_t d = 0; d < kDrawsPerBatch; ++d) {
                for (int i = 0; i < k; ++i) z(i) = normal(rng);
                m.add(std::abs((chol * z).prod()));
            }
            return m;
        });
        for (const Moments& m : batches) total.merge(m);
        next_partition = target;

        const double mean = total.mean;
        const double se = std::sqrt(total.m2 / (total.count - 1.0) / total.count);
        result.value = prefactor * mean;
        result.std_error = prefactor * se;
        result.draws = static_cast<std::size_t>(total.count);
        result.tolerance_met = se <= options.rel_tol * mean;
        if (result.tolerance_met || next_partition >= max_partitions) break;
        // Grow geometrically towards the budget.
        target = std::min(max_partitions, 2 * next_partition);
    }
    return result;
}

GeneratorValues g_kac(cplx u) {
    if (!(std::abs(u) < 1.0 - 1e-12)) throw DomainError("g_kac: need |u| < 1 - 1e-12");
    const cplx r = 1.0 / (1.0 - u);
    return {r, r * r, 2.0 * r * r * r};
}

ProsenMatrices prosen_matrices(std::span<const cplx> zs, const Generator& g) {
    const auto k = static_cast<Eigen::Index>(zs.size());
    std::vector<cplx> w(static_cast<std::size_t>(2 * k));
    for (Eigen::Index s = 0; s < k; ++s) {
        w[s] = zs[s];
        w[k + s] = std::conj(zs[s]);
    }
    ProsenMatrices m{Eigen::MatrixXcd(2 * k, 2 * k), Eigen::MatrixXcd(2 * k, 2 * k), Eigen::MatrixXcd(2 * k, 2 * k)};
    for (Eigen::Index j = 0; j < 2 * k; ++j) {
        for (Eigen::Index l = 0; l < 2 * k; ++l) {
            const cplx u = w[j] * std::conj(w[l]);
            const GeneratorValues v = g(u);
            m.A(j, l) = v.g;
            m.B(j, l) = w[j] * v.dg;
            m.C(j, l) = v.dg + u * v.d2g;
        }
    }
    return m;
}

ProsenResult prosen_rho_detailed(std::span<const cplx> zs, const Generator& g) {
    if (zs.empty()) throw InputError("prosen_rho: need at least one point");
    for (cplx z : zs) {
        if (!(std::abs(z) < 1.0) || !(z.imag() > 0.0))
            throw DomainError("prosen_rho: points must lie in the open upper half disk");
    }
    const auto k = static_cast<Eigen::Index>(zs.size());
    const ProsenMatrices m = prosen_matrices(zs, g);

    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> spectrum(m.A, Eigen::EigenvaluesOnly);
    const double lo = spectrum.eigenvalues().minCoeff();
    const double hi = spectrum.eigenvalues().maxCoeff();
    if (!(lo > 0.0) || hi / lo > kMaxHermitianCondition) {
        throw SingularityError("prosen_rho: points (or a point and a conjugate) nearly coincide",
                               lo > 0.0 ? hi / lo : INFINITY);
    }
    const Eigen::LLT<Eigen::MatrixXcd> llt(m.A);
    if (llt.info() != Eigen::Success) throw SingularityError("prosen_rho: A is not positive definite", INFINITY);
    const Eigen::MatrixXcd conditional = m.C - m.B.adjoint() * llt.solve(m.B);

    // Column j of the bilinear covariance is column σ(j) of the Hermitian one,
    // where σ swaps w_j and w̄_j.
    Eigen::MatrixXcd bilinear(2 * k, 2 * k);
    for (Eigen::Index j = 0; j < 2 * k; ++j) bilinear.col(j) = conditional.col(j < k ? j + k : j - k);
    const double scale = std::max(1.0, bilinear.cwiseAbs().maxCoeff());
    if ((bilinear - bilinear.transpose()).cwiseAbs().maxCoeff() > 1e-8 * scale)
        throw ConsistencyError("prosen_rho: conditional covariance is not symmetric");

    const cplx hf = hafnian(SymMatrix(bilinear));
    double log_sqrt_det = 0.0;
    for (Eigen::Index i = 0; i < 2 * k; ++i) log_sqrt_det += std::log(std::abs(llt.matrixLLT()(i, i)));
    const cplx rho = hf * std::exp(-log_sqrt_det) / std::pow(pi, static_cast<double>(k));

    ProsenResult out{rho.real(), std::abs(rho.imag())};
    if (out.imag_residue > 1e-10 * std::max(1.0, std::abs(out.value)))
        throw ConsistencyError("prosen_rho: density has a non-negligible imaginary part");
    return out;
}

double prosen_rho(std::span<const cplx> zs, const Generator& g) { return prosen_rho_detailed(zs, g).value; }

}  // namespace kacpf
