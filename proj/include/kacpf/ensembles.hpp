#pragma once

// Seeded samplers for truncated Haar-orthogonal blocks, Kac polynomials and
// matrix-valued Kac series, plus the block determinant identity check.

#include <complex>
#include <cstdint>
#include <iosfwd>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace kacpf {

using cplx = std::complex<double>;
using Rng = std::mt19937_64;

enum class EnsembleKind { TruncatedOrthogonal, Kac, MatrixKac };

std::string_view to_string(EnsembleKind kind);
/// Accepts "truncated", "truncated-orthogonal", "kac", "matrix-kac".
EnsembleKind parse_ensemble_kind(std::string_view name);

struct EnsembleConfig {
    EnsembleKind kind = EnsembleKind::TruncatedOrthogonal;
    int L = 1;
    int M = 2;
    int N = 1;
    std::size_t samples = 1;
    std::uint64_t seed = 0;
    // Matrix-Kac zeros are kept only for |x| < 1 - disk_margin.
    double disk_margin = 0.05;
    // Kac only: locate real zeros directly instead of the full companion spectrum.
    bool real_only = false;

    /// Throws InputError naming the offending field.
    void validate() const;
};

/// Independent generator for one partition of the sample index space.
Rng partition_rng(std::uint64_t seed, std::uint64_t partition);

inline constexpr std::size_t kDrawsPerPartition = 64;

struct SpectrumMeta {
    EnsembleKind kind = EnsembleKind::TruncatedOrthogonal;
    std::size_t draw_index = 0;
    // Draws discarded before this one (solver failure, degenerate coefficients).
    std::size_t rejections = 0;
    // Points with modulus >= 1 (retained) or removed by the disk filter (matrix-Kac).
    std::size_t outside_unit_disk = 0;
};

/// One ensemble draw: real points plus one upper-half-plane representative
/// per complex-conjugate pair.
struct Spectrum {
    std::vector<double> real;
    std::vector<cplx> upper;
    SpectrumMeta meta;

    /// Size of the full multiset, counting both members of each pair.
    std::size_t multiset_size() const noexcept { return real.size() + 2 * upper.size(); }
    /// Copy keeping only points with modulus < radius.
    Spectrum within(double radius) const;
};

inline constexpr double kRealClassificationTol = 1e-8;

/// Splits the eigenvalues of a real matrix into real points (|Im λ| < tol·max(1,|λ|))
/// and conjugate pairs; each pair is matched to its nearest conjugate and averaged.
/// Throws SolverError when the non-real eigenvalues do not pair up.
Spectrum classify_eigenvalues(const Eigen::VectorXcd& eigenvalues, double tol = kRealClassificationTol);

/// Haar-distributed n×n orthogonal matrix: QR of a Gaussian matrix with the
/// columns of Q multiplied by sign(R_jj).
Eigen::MatrixXd haar_orthogonal(int n, Rng& rng);

/// Eigenvalues of the bottom-right M×M block of an (L+M)×(L+M) Haar draw.
Spectrum truncated_block_spectrum(int L, int M, Rng& rng);

/// a_0..a_N, i.i.d. standard normal.
std::vector<double> kac_coefficients(int N, Rng& rng);

/// All roots of Σ c_p x^p via the balanced companion matrix of the monic rescaling.
Spectrum polynomial_spectrum(std::span<const double> coefficients);

/// Real roots of Σ c_p x^p, sorted. Roots in [-1, 1] are found by sign-change
/// scanning on a grid refined towards ±1 (with a derivative check for close
/// root pairs) and polished by bracketing; roots outside come from the
/// reversed polynomial. Cost O(N log N) per call, independent of conditioning
/// of the companion matrix.
std::vector<double> polynomial_real_roots(std::span<const double> coefficients);

/// Real roots inside [lo, hi] ⊆ [-1, 1].
std::vector<double> polynomial_real_roots_in(std::span<const double> coefficients, double lo, double hi);

/// Roots of a degree-N Kac polynomial (companion eigenvalues).
Spectrum kac_spectrum(int N, Rng& rng);

/// Real roots only of a degree-N Kac polynomial; `upper` is left empty.
Spectrum kac_real_spectrum(int N, Rng& rng);

/// A_0..A_N, i.i.d. standard normal L×L, entries drawn row-major per block.
std::vector<Eigen::MatrixXd> matrix_kac_coefficients(int L, int N, Rng& rng);

inline constexpr double kMaxLeadingBlockCondition = 1e10;

/// Zeros of det(Σ A_p x^p) via the block companion linearization of the monic
/// matrix polynomial. Throws SingularityError when the leading block's
/// condition exceeds kMaxLeadingBlockCondition.
Spectrum matrix_polynomial_spectrum(std::span<const Eigen::MatrixXd> coefficients);

/// Zeros of the truncated matrix Kac series, filtered to |x| < 1 - disk_margin.
Spectrum matrix_kac_spectrum(int L, int N, Rng& rng, double disk_margin = 0.05);

/// One draw for the configured ensemble (resampling on solver failure).
Spectrum sample_one(const EnsembleConfig& config, Rng& rng);

/// config.samples draws, partitioned in blocks of kDrawsPerPartition with one
/// generator per block; the result is independent of `threads`.
std::vector<Spectrum> sample_spectra(const EnsembleConfig& config, int threads = 1);

/// Relative difference between the two sides of
///   det(zI - Vᵀ)/det(I - zV) = (-1)^M det U · det(A + zB(I - zV)⁻¹C)
/// for a given orthogonal U split with top-left block L×L.
/// Throws SingularityError when the linear solve residual exceeds 1e-8.
double determinant_identity_residual(const Eigen::MatrixXd& U, int L, cplx z);

/// Samples U and evaluates determinant_identity_residual. Requires |z| < 1.
double verify_determinant_identity(int L, int M, cplx z, Rng& rng);

/// Spectrum CSV: draw_index,kind,re,im with kind in {real, complex}.
void write_spectrum_csv_header(std::ostream& out);
void write_spectrum_csv_rows(std::ostream& out, const Spectrum& spectrum);

}  // namespace kacpf
