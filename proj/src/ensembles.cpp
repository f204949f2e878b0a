#include "kacpf/ensembles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <string>
#include <utility>

#include <boost/math/tools/toms748_solve.hpp>
#include <Eigen/Eigenvalues>

#include "kacpf/csv.hpp"
#include "kacpf/errors.hpp"
#include "kacpf/parallel.hpp"
#include "kacpf/skewlin.hpp"

namespace kacpf {
namespace {

constexpr std::size_t kMaxRejections = 1000;

Eigen::MatrixXd gaussian_matrix(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
    std::normal_distribution<double> normal;
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = normal(rng);
    return m;
}

// Parlett–Reinsch balancing with radix 2; similarity transform, so the
// spectrum is unchanged while the norm is reduced.
void balance(Eigen::MatrixXd& a) {
    constexpr double radix = 2.0;
    constexpr double radix_sq = radix * radix;
    const Eigen::Index n = a.rows();
    bool done = false;
    while (!done) {
        done = true;
        for (Eigen::Index i = 0; i < n; ++i) {
            double c = a.col(i).cwiseAbs().sum() - std::abs(a(i, i));
            double r = a.row(i).cwiseAbs().sum() - std::abs(a(i, i));
            if (c == 0.0 || r == 0.0) continue;
            const double s = c + r;
            double f = 1.0;
            double g = r / radix;
            while (c < g) {
                f *= radix;
                c *= radix_sq;
            }
            g = r * radix;
            while (c > g) {
                f /= radix;
                c /= radix_sq;
            }
            if ((c + r) / f < 0.95 * s) {
                done = false;
                a.row(i) /= f;
                a.col(i) *= f;
            }
        }
    }
}

Eigen::VectorXcd eigenvalues_of(const Eigen::MatrixXd& a) {
    Eigen::EigenSolver<Eigen::MatrixXd> solver(a, /*computeEigenvectors=*/false);
    if (solver.info() != Eigen::Success) throw SolverError("eigenvalue iteration did not converge");
    return solver.eigenvalues();
}

int sign_of(double v) { return (v > 0.0) - (v < 0.0); }

struct PolyValue {
    double value;
    double derivative;
};

PolyValue horner(std::span<const double> c, double x) {
    double p = c.back();
    double dp = 0.0;
    for (std::size_t k = c.size() - 1; k-- > 0;) {
        dp = dp * x + p;
        p = p * x + c[k];
    }
    return {p, dp};
}

// Grid on [-1, 1]: geometric in 1 - |x| down to 32/N, then uniform with
// spacing 1/(16N) up to the endpoint. Real zeros of a degree-N Gaussian
// polynomial have density ~ 1/(2π(1-|x|)) away from the edge and spacing
// ~ 1/N at the edge, so every cell holds far fewer than one zero on average.
std::vector<double> scan_grid(std::size_t degree) {
    const double n = static_cast<double>(std::max<std::size_t>(degree, 1));
    const double s_edge = std::min(1.0, 32.0 / n);
    std::vector<double> s_values;
    constexpr double log_step = 1.0 / 48.0;
    for (double s = 1.0; s > s_edge; s *= std::exp(-log_step)) s_values.push_back(s);
    const double linear_step = 1.0 / (16.0 * n);
    for (double s = s_edge; s > 0.0; s -= linear_step) s_values.push_back(s);
    s_values.push_back(0.0);

    std::vector<double> grid;
    grid.reserve(2 * s_values.size());
    for (double s : s_values) grid.push_back(-(1.0 - s));
    for (auto it = s_values.rbegin(); it != s_values.rend(); ++it) grid.push_back(1.0 - *it);
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
    return grid;
}

double bracket_root(const auto& f, double lo, double hi, double f_lo, double f_hi) {
    boost::uintmax_t iterations = 200;
    const auto [a, b] = boost::math::tools::toms748_solve(
        f, lo, hi, f_lo, f_hi, boost::math::tools::eps_tolerance<double>(52), iterations);
    return 0.5 * (a + b);
}

// Real zeros of the polynomial in [lo, hi] ⊆ [-1, 1].
std::vector<double> scan_interval(std::span<const double> c, double lo, double hi) {
    std::vector<double> roots;
    if (c.size() < 2) return roots;
    std::vector<double> grid;
    for (double x : scan_grid(c.size() - 1))
        if (x > lo && x < hi) grid.push_back(x);
    grid.insert(grid.begin(), lo);
    grid.push_back(hi);

    auto value = [&](double x) { return horner(c, x).value; };
    auto slope = [&](double x) { return horner(c, x).derivative; };

    std::vector<PolyValue> v(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) v[i] = horner(c, grid[i]);

    for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
        const double a = grid[i];
        const double b = grid[i + 1];
        const int sa = sign_of(v[i].value);
        const int sb = sign_of(v[i + 1].value);
        if (sa == 0) {
            roots.push_back(a);
            continue;
        }
        if (sb == 0) continue;  // recorded as the left end of the next cell
        if (sa != sb) {
            roots.push_back(bracket_root(value, a, b, v[i].value, v[i + 1].value));
            continue;
        }
        // No sign change: a close pair of zeros shows up as an interior
        // extremum on the other side of the axis.
        if (sign_of(v[i].derivative) * sign_of(v[i + 1].derivative) < 0) {
            const double crit = bracket_root(slope, a, b, v[i].derivative, v[i + 1].derivative);
            const double fc = value(crit);
            if (sign_of(fc) == -sa) {
                roots.push_back(bracket_root(value, a, crit, v[i].value, fc));
                roots.push_back(bracket_root(value, crit, b, fc, v[i + 1].value));
            } else if (fc == 0.0) {
                roots.push_back(crit);
                roots.push_back(crit);
            }
        }
    }
    if (!grid.empty() && sign_of(v.back().value) == 0) roots.push_back(hi);
    return roots;
}

}  // namespace

std::string_view to_string(EnsembleKind kind) {
    switch (kind) {
        case EnsembleKind::TruncatedOrthogonal:
            return "truncated-orthogonal";
        case EnsembleKind::Kac:
            return "kac";
        case EnsembleKind::MatrixKac:
            return "matrix-kac";
    }
    return "unknown";
}

EnsembleKind parse_ensemble_kind(std::string_view name) {
    if (name == "truncated" || name == "truncated-orthogonal") return EnsembleKind::TruncatedOrthogonal;
    if (name == "kac") return EnsembleKind::Kac;
    if (name == "matrix-kac") return EnsembleKind::MatrixKac;
    throw InputError("unknown ensemble '" + std::string(name) +
                     "' (expected truncated, kac or matrix-kac)");
}

void EnsembleConfig::validate() const {
    if (L < 1) throw InputError("L must be >= 1");
    if (N < 1) throw InputError("N must be >= 1");
    if (samples < 1) throw InputError("samples must be >= 1");
    if (kind == EnsembleKind::TruncatedOrthogonal) {
        if (M < 2) throw InputError("M must be >= 2");
        if (M % 2 != 0) throw InputError("M must be even");
    }
    if (!(disk_margin >= 0.0 && disk_margin < 1.0)) throw InputError("disk margin must lie in [0, 1)");
}

Rng partition_rng(std::uint64_t seed, std::uint64_t partition) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(partition), static_cast<std::uint32_t>(partition >> 32),
                      0x6b6163u};
    return Rng(seq);
}

Spectrum Spectrum::within(double radius) const {
    Spectrum out;
    out.meta = meta;
    for (double x : real)
        if (std::abs(x) < radius) out.real.push_back(x);
    for (cplx z : upper)
        if (std::abs(z) < radius) out.upper.push_back(z);
    return out;
}

Spectrum classify_eigenvalues(const Eigen::VectorXcd& eigenvalues, double tol) {
    Spectrum out;
    std::vector<cplx> upper;
    std::vector<cplx> lower;
    for (const cplx& lambda : eigenvalues) {
        if (!std::isfinite(lambda.real()) || !std::isfinite(lambda.imag()))
            throw SolverError("non-finite eigenvalue");
        if (std::abs(lambda.imag()) < tol * std::max(1.0, std::abs(lambda))) {
            out.real.push_back(lambda.real());
        } else if (lambda.imag() > 0.0) {
            upper.push_back(lambda);
        } else {
            lower.push_back(lambda);
        }
    }
    if (upper.size() != lower.size()) throw SolverError("complex eigenvalues do not pair up");

    std::vector<bool> used(lower.size(), false);
    for (const cplx& u : upper) {
        std::size_t best = lower.size();
        double best_distance = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < lower.size(); ++j) {
            if (used[j]) continue;
            const double d = std::abs(u - std::conj(lower[j]));
            if (d < best_distance) {
                best_distance = d;
                best = j;
            }
        }
        if (best_distance > 1e-6 * std::max(1.0, std::abs(u)))
            throw SolverError("conjugate pairing residual too large");
        used[best] = true;
        out.upper.push_back(0.5 * (u + std::conj(lower[best])));
    }
    std::sort(out.real.begin(), out.real.end());
    std::sort(out.upper.begin(), out.upper.end(),
              [](cplx a, cplx b) { return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag(); });
    return out;
}

Eigen::MatrixXd haar_orthogonal(int n, Rng& rng) {
    if (n < 1) throw InputError("haar_orthogonal: n must be >= 1");
    const Eigen::MatrixXd g = gaussian_matrix(n, n, rng);
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
    Eigen::MatrixXd q = qr.householderQ();
    const auto& r = qr.matrixQR();
    for (int j = 0; j < n; ++j)
        if (r(j, j) < 0.0) q.col(j) = -q.col(j);
    return q;
}

Spectrum truncated_block_spectrum(int L, int M, Rng& rng) {
    if (L < 1 || M < 1) throw InputError("truncated_block_spectrum: L and M must be >= 1");
    std::size_t rejections = 0;
    while (true) {
        const Eigen::MatrixXd u = haar_orthogonal(L + M, rng);
        try {
            const Eigen::VectorXcd lambda = eigenvalues_of(u.bottomRightCorner(M, M));
            if (lambda.cwiseAbs().maxCoeff() > 1.0 + 1e-10) throw SolverError("eigenvalue outside unit disk");
            Spectrum s = classify_eigenvalues(lambda);
            s.meta.kind = EnsembleKind::TruncatedOrthogonal;
            s.meta.rejections = rejections;
            return s;
        } catch (const SolverError&) {
            if (++rejections > kMaxRejections) throw;
        }
    }
}

std::vector<double> kac_coefficients(int N, Rng& rng) {
    if (N < 1) throw InputError("kac_coefficients: N must be >= 1");
    std::normal_distribution<double> normal;
    std::vector<double> a(static_cast<std::size_t>(N) + 1);
    for (double& v : a) v = normal(rng);
    return a;
}

Spectrum polynomial_spectrum(std::span<const double> coefficients) {
    if (coefficients.size() < 2) throw InputError("polynomial_spectrum: degree must be >= 1");
    const double lead = coefficients.back();
    if (!(std::abs(lead) > 1e-300)) throw InputError("polynomial_spectrum: leading coefficient vanishes");
    const auto n = static_cast<Eigen::Index>(coefficients.size() - 1);
    Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index i = 1; i < n; ++i) companion(i, i - 1) = 1.0;
    for (Eigen::Index i = 0; i < n; ++i) companion(i, n - 1) = -coefficients[static_cast<std::size_t>(i)] / lead;
    balance(companion);
    Spectrum s = classify_eigenvalues(eigenvalues_of(companion));
    for (double x : s.real) s.meta.outside_unit_disk += std::abs(x) >= 1.0;
    for (cplx z : s.upper) s.meta.outside_unit_disk += 2 * (std::abs(z) >= 1.0);
    return s;
}

std::vector<double> polynomial_real_roots_in(std::span<const double> coefficients, double lo, double hi) {
    if (!(lo >= -1.0 && hi <= 1.0 && lo < hi)) throw DomainError("polynomial_real_roots_in: need -1 <= lo < hi <= 1");
    return scan_interval(coefficients, lo, hi);
}

std::vector<double> polynomial_real_roots(std::span<const double> coefficients) {
    std::vector<double> roots = scan_interval(coefficients, -1.0, 1.0);
    // |x| > 1  <=>  y = 1/x is a zero of the reversed polynomial with |y| < 1.
    std::vector<double> reversed(coefficients.rbegin(), coefficients.rend());
    for (double y : scan_interval(reversed, -1.0, 1.0))
        if (y != 0.0 && std::abs(y) < 1.0) roots.push_back(1.0 / y);
    std::sort(roots.begin(), roots.end());
    return roots;
}

Spectrum kac_spectrum(int N, Rng& rng) {
    std::size_t rejections = 0;
    while (true) {
        const std::vector<double> a = kac_coefficients(N, rng);
        if (std::abs(a.back()) < 1e-300) {
            ++rejections;
            continue;
        }
        try {
            Spectrum s = polynomial_spectrum(a);
            s.meta.kind = EnsembleKind::Kac;
            s.meta.rejections = rejections;
            return s;
        } catch (const SolverError&) {
            if (++rejections > kMaxRejections) throw;
        }
    }
}

Spectrum kac_real_spectrum(int N, Rng& rng) {
    std::size_t rejections = 0;
    std::vector<double> a = kac_coefficients(N, rng);
    while (std::abs(a.back()) < 1e-300) {
        ++rejections;
        a = kac_coefficients(N, rng);
    }
    Spectrum s;
    s.real = polynomial_real_roots(a);
    s.meta.kind = EnsembleKind::Kac;
    s.meta.rejections = rejections;
    for (double x : s.real) s.meta.outside_unit_disk += std::abs(x) >= 1.0;
    return s;
}

std::vector<Eigen::MatrixXd> matrix_kac_coefficients(int L, int N, Rng& rng) {
    if (L < 1 || N < 1) throw InputError("matrix_kac_coefficients: L and N must be >= 1");
    std::vector<Eigen::MatrixXd> blocks;
    blocks.reserve(static_cast<std::size_t>(N) + 1);
    for (int p = 0; p <= N; ++p) blocks.push_back(gaussian_matrix(L, L, rng));
    return blocks;
}

Spectrum matrix_polynomial_spectrum(std::span<const Eigen::MatrixXd> coefficients) {
    if (coefficients.size() < 2) throw InputError("matrix_polynomial_spectrum: degree must be >= 1");
    const Eigen::Index l = coefficients.front().rows();
    const auto degree = static_cast<Eigen::Index>(coefficients.size() - 1);
    const Eigen::MatrixXd& lead = coefficients.back();
    const double rc = rcond(lead);
    if (!(rc * kMaxLeadingBlockCondition >= 1.0)) {
        throw SingularityError("matrix_polynomial_spectrum: leading block is ill-conditioned",
                               rc > 0.0 ? 1.0 / rc : INFINITY);
    }
    const Eigen::PartialPivLU<Eigen::MatrixXd> lu(lead);

    const Eigen::Index n = l * degree;
    Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index b = 0; b + 1 < degree; ++b)
        companion.block(b * l, (b + 1) * l, l, l).setIdentity();
    for (Eigen::Index p = 0; p < degree; ++p)
        companion.block((degree - 1) * l, p * l, l, l) = -lu.solve(coefficients[static_cast<std::size_t>(p)]);
    balance(companion);
    Spectrum s = classify_eigenvalues(eigenvalues_of(companion));
    for (double x : s.real) s.meta.outside_unit_disk += std::abs(x) >= 1.0;
    for (cplx z : s.upper) s.meta.outside_unit_disk += 2 * (std::abs(z) >= 1.0);
    return s;
}

Spectrum matrix_kac_spectrum(int L, int N, Rng& rng, double disk_margin) {
    std::size_t rejections = 0;
    while (true) {
        const std::vector<Eigen::MatrixXd> a = matrix_kac_coefficients(L, N, rng);
        try {
            const Spectrum full = matrix_polynomial_spectrum(a);
            Spectrum s = full.within(1.0 - disk_margin);
            s.meta.kind = EnsembleKind::MatrixKac;
            s.meta.rejections = rejections;
            s.meta.outside_unit_disk = full.multiset_size() - s.multiset_size();
            return s;
        } catch (const SingularityError&) {
            if (++rejections > kMaxRejections) throw;
        } catch (const SolverError&) {
            if (++rejections > kMaxRejections) throw;
        }
    }
}

Spectrum sample_one(const EnsembleConfig& config, Rng& rng) {
    switch (config.kind) {
        case EnsembleKind::TruncatedOrthogonal:
            return truncated_block_spectrum(config.L, config.M, rng);
        case EnsembleKind::Kac:
            return config.real_only ? kac_real_spectrum(config.N, rng) : kac_spectrum(config.N, rng);
        case EnsembleKind::MatrixKac:
            return matrix_kac_spectrum(config.L, config.N, rng, config.disk_margin);
    }
    throw InputError("sample_one: unknown ensemble");
}

std::vector<Spectrum> sample_spectra(const EnsembleConfig& config, int threads) {
    config.validate();
    const std::size_t partitions = (config.samples + kDrawsPerPartition - 1) / kDrawsPerPartition;
    auto blocks = run_partitions<std::vector<Spectrum>>(partitions, threads, [&](std::size_t p) {
        Rng rng = partition_rng(config.seed, p);
        const std::size_t first = p * kDrawsPerPartition;
        const std::size_t last = std::min(config.samples, first + kDrawsPerPartition);
        std::vector<Spectrum> out;
        out.reserve(last - first);
        for (std::size_t d = first; d < last; ++d) {
            out.push_back(sample_one(config, rng));
            out.back().meta.draw_index = d;
        }
        return out;
    });
    std::vector<Spectrum> spectra;
    spectra.reserve(config.samples);
    for (auto& block : blocks)
        for (auto& s : block) spectra.push_back(std::move(s));
    return spectra;
}

double determinant_identity_residual(const Eigen::MatrixXd& U, int L, cplx z) {
    const Eigen::Index n = U.rows();
    if (U.cols() != n || L < 1 || L >= n) throw StructuralError("determinant_identity_residual: bad block split");
    const Eigen::Index m = n - L;
    const Eigen::MatrixXcd a = U.topLeftCorner(L, L).cast<cplx>();
    const Eigen::MatrixXcd b = U.topRightCorner(L, m).cast<cplx>();
    const Eigen::MatrixXcd c = U.bottomLeftCorner(m, L).cast<cplx>();
    const Eigen::MatrixXcd v = U.bottomRightCorner(m, m).cast<cplx>();
    const Eigen::MatrixXcd eye = Eigen::MatrixXcd::Identity(m, m);

    const Eigen::MatrixXcd resolvent_arg = eye - z * v;
    const Eigen::PartialPivLU<Eigen::MatrixXcd> lu(resolvent_arg);
    const Eigen::MatrixXcd x = lu.solve(c);
    const double solve_residual = (resolvent_arg * x - c).norm() / std::max(1.0, c.norm());
    if (!(solve_residual <= 1e-8)) {
        throw SingularityError("determinant identity: I - zV is too close to singular", 1.0 / lu.rcond());
    }

    const cplx lhs = det(Eigen::MatrixXcd(z * eye - v.transpose())) / lu.determinant();
    const double sign = (m % 2 == 0) ? 1.0 : -1.0;
    const cplx rhs = sign * det(U) * det(Eigen::MatrixXcd(a + z * b * x));
    return std::abs(lhs - rhs) / std::max(std::abs(lhs), std::numeric_limits<double>::min());
}

double verify_determinant_identity(int L, int M, cplx z, Rng& rng) {
    if (L < 1 || M < 1) throw InputError("verify_determinant_identity: L and M must be >= 1");
    if (!(std::abs(z) < 1.0)) throw DomainError("verify_determinant_identity: need |z| < 1");
    return determinant_identity_residual(haar_orthogonal(L + M, rng), L, z);
}

void write_spectrum_csv_header(std::ostream& out) { out << "draw_index,kind,re,im\n"; }

void write_spectrum_csv_rows(std::ostream& out, const Spectrum& spectrum) {
    for (double x : spectrum.real)
        out << spectrum.meta.draw_index << ",real," << csv_number(x) << ',' << csv_number(0.0) << '\n';
    for (cplx z : spectrum.upper)
        out << spectrum.meta.draw_index << ",complex," << csv_number(z.real()) << ',' << csv_number(z.imag())
            << '\n';
}

}  // namespace kacpf
