#include "kacpf/verify.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>

#include "kacpf/classical.hpp"
#include "kacpf/csv.hpp"
#include "kacpf/ensembles.hpp"
#include "kacpf/errors.hpp"
#include "kacpf/kernels.hpp"
#include "kacpf/stats.hpp"

namespace kacpf {
namespace {

double rel_diff(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

std::vector<double> linspace_open(double lo, double hi, int n) {
    std::vector<double> out;
    for (int i = 0; i < n; ++i) out.push_back(lo + (hi - lo) * (i + 0.5) / n);
    return out;
}

std::vector<cplx> upper_disk_points(int n) {
    // Polar grid with |z| <= 0.9 and Im z >= 0.05.
    std::vector<cplx> out;
    const int rings = std::max(1, static_cast<int>(std::sqrt(static_cast<double>(n))));
    const int per_ring = (n + rings - 1) / rings;
    for (int a = 0; a < rings && static_cast<int>(out.size()) < n; ++a) {
        const double r = 0.1 + 0.8 * (a + 1) / rings;
        const double t0 = std::asin(std::min(1.0, 0.05 / r));
        for (int b = 0; b < per_ring && static_cast<int>(out.size()) < n; ++b) {
            const double t = t0 + (std::numbers::pi - 2.0 * t0) * (b + 0.5) / per_ring;
            out.push_back(std::polar(r, t));
        }
    }
    return out;
}

CheckResult make_check(std::string name, double achieved, double tolerance, std::string detail = {}) {
    return {std::move(name), achieved, tolerance, achieved <= tolerance, std::move(detail)};
}

SuiteReport identity_suite(const VerifyOptions& o) {
    SuiteReport report{"identity", {}};
    Rng rng = partition_rng(o.seed, 0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int t = 0; t < o.trials; ++t) {
        const cplx z = std::polar(0.9 * std::sqrt(unit(rng)), 2.0 * std::numbers::pi * unit(rng));
        const double residual = verify_determinant_identity(o.L, o.M, z, rng);
        std::ostringstream name;
        name << "trial " << t + 1 << " z=" << csv_number(z.real()) << (z.imag() < 0 ? "" : "+")
             << csv_number(z.imag()) << "i";
        report.checks.push_back(make_check(name.str(), residual, 1e-10));
    }
    return report;
}

SuiteReport skew_orth_suite(const VerifyOptions& o) {
    SuiteReport report{"skew-orth", {}};
    for (int j = 0; j <= o.jmax; ++j) {
        for (int k = j + 1; k <= o.jmax; ++k) {
            const double expected = (j % 2 == 0 && k == j + 1) ? skew_norm_r(j / 2, o.L) : 0.0;
            const InnerProductResult ip = skew_inner_product(j, k, o.L);
            std::ostringstream name;
            name << "<p" << j << ",p" << k << "> L=" << o.L;
            report.checks.push_back(make_check(name.str(), std::abs(ip.value - expected), 1e-5,
                                               "expected " + csv_number(expected)));
        }
    }
    return report;
}

// Kernel differences below this are rounding noise; successive values there
// need not decrease.
constexpr double kRoundoffFloor = 1e-13;

// Largest |finite - limiting| over S, D and Ĩ on a real grid in [-0.8, 0.8]².
double kernel_sup_error(const KernelSet& finite, const KernelSet& limit, const std::vector<double>& grid) {
    double sup = 0.0;
    for (double x : grid) {
        for (double y : grid) {
            const Point u = Point::real(x);
            const Point v = Point::real(y);
            sup = std::max(sup, std::abs(finite.S(u, v) - limit.S(u, v)));
            sup = std::max(sup, std::abs(finite.D(u, v) - limit.D(u, v)));
            if (x != y) sup = std::max(sup, std::abs(finite.I(u, v) - limit.I(u, v)));
        }
    }
    return sup;
}

SuiteReport convergence_suite(const VerifyOptions& o) {
    SuiteReport report{"convergence", {}};
    const int n = o.grid == "fine" ? 17 : 9;
    std::vector<double> grid;
    for (int i = 0; i < n; ++i) grid.push_back(-0.8 + 1.6 * i / (n - 1));
    const LimitingKernelSet limit(o.L);
    double previous = INFINITY;
    bool monotone = true;
    std::ostringstream trail;
    for (int M : {20, 50, 100, 200}) {
        const double err = kernel_sup_error(FiniteKernelSet(o.L, M), limit, grid);
        monotone = monotone && (err < previous || err < kRoundoffFloor);
        previous = err;
        trail << "M=" << M << ":" << csv_number(err) << " ";
    }
    report.checks.push_back(make_check("sup error at M=200, L=" + std::to_string(o.L), previous, 1e-6, trail.str()));
    report.checks.push_back({"monotone decrease over M", monotone ? 0.0 : 1.0, 0.0, monotone, trail.str()});
    return report;
}

SuiteReport equivalence_suite(const VerifyOptions& o) {
    SuiteReport report{"equivalence", {}};
    const bool fine = o.grid == "fine";
    const LimitingKernelSet K(1);

    double worst = 0.0;
    for (double x : linspace_open(-0.9, 0.9, fine ? 50 : 10))
        worst = std::max(worst, rel_diff(rho_pfaffian({{x}, {}}, K), rho1_real_closed(x)));
    report.checks.push_back(make_check("rho1 real: pfaffian vs closed form", worst, 1e-12));

    double worst_closed = 0.0;
    double worst_bd = 0.0;
    const auto axis = linspace_open(-0.9, 0.9, fine ? 20 : 6);
    for (double x1 : axis) {
        for (double x2 : axis) {
            if (x1 == x2) continue;
            const double pf = rho_pfaffian({{x1, x2}, {}}, K);
            const std::vector<double> xs{x1, x2};
            worst_closed = std::max(worst_closed, rel_diff(pf, rho2_real_closed(x1, x2)));
            worst_bd = std::max(worst_bd, rel_diff(pf, bleher_di_rho(xs).value));
        }
    }
    report.checks.push_back(make_check("rho2 real: pfaffian vs closed form", worst_closed, 1e-10));
    report.checks.push_back(make_check("rho2 real: pfaffian vs gaussian integral", worst_bd, 1e-10));

    double worst_c = 0.0;
    double worst_p = 0.0;
    for (cplx z : upper_disk_points(fine ? 50 : 10)) {
        const double pf = rho_pfaffian({{}, {z}}, K);
        const std::vector<cplx> zs{z};
        worst_c = std::max(worst_c, rel_diff(pf, rho1_complex_closed(z)));
        worst_p = std::max(worst_p, rel_diff(pf, prosen_rho(zs)));
    }
    report.checks.push_back(make_check("rho1 complex: pfaffian vs closed form", worst_c, 1e-10));
    report.checks.push_back(make_check("rho1 complex: pfaffian vs hafnian", worst_p, 1e-10));

    double worst_p2 = 0.0;
    const auto pts = upper_disk_points(fine ? 8 : 4);
    for (std::size_t a = 0; a < pts.size(); ++a) {
        for (std::size_t b = a + 1; b < pts.size(); ++b) {
            const std::vector<cplx> zs{pts[a], pts[b]};
            worst_p2 = std::max(worst_p2, rel_diff(prosen_rho(zs), rho_pfaffian({{}, zs}, K)));
        }
    }
    report.checks.push_back(make_check("rho2 complex: pfaffian vs hafnian", worst_p2, 1e-8));
    return report;
}

SuiteReport empirical_suite(const VerifyOptions& o) {
    SuiteReport report{"empirical", {}};
    EnsembleConfig config;
    config.kind = EnsembleKind::TruncatedOrthogonal;
    config.L = o.L;
    config.M = o.M;
    config.samples = o.samples;
    config.seed = o.seed;
    const auto spectra = sample_spectra(config, o.threads);

    const HistogramSpec spec{-0.9, 0.9, 18};
    const BinnedEstimate est = real_density_histogram(spectra, spec);
    const FiniteKernelSet K(o.L, o.M);
    const auto density = [&](double x) { return rho_pfaffian({{x}, {}}, K); };
    const ComparisonReport cmp =
        compare(est, [&](const Cell& c) { return cell_average(density, c.x_lo, c.x_hi); });
    std::ostringstream detail;
    detail << est.draws << " draws, " << cmp.compared << " bins, chi2 " << csv_number(cmp.chi_square) << "/"
           << cmp.dof;
    report.checks.push_back(make_check("real density vs finite-M pfaffian (sigma)", cmp.sup_sigma,
                                       cmp.sigma_multiple, detail.str()));
    return report;
}

}  // namespace

bool SuiteReport::pass() const noexcept {
    return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.pass; });
}

std::size_t SuiteReport::passed() const noexcept {
    return static_cast<std::size_t>(std::count_if(checks.begin(), checks.end(), [](const CheckResult& c) { return c.pass; }));
}

std::vector<std::string_view> suite_names() { return {"identity", "skew-orth", "convergence", "equivalence", "empirical"}; }

SuiteReport run_suite(std::string_view suite, const VerifyOptions& options) {
    if (options.grid != "coarse" && options.grid != "fine") throw InputError("verify: grid must be coarse or fine");
    if (suite == "identity") return identity_suite(options);
    if (suite == "skew-orth") return skew_orth_suite(options);
    if (suite == "convergence") return convergence_suite(options);
    if (suite == "equivalence") return equivalence_suite(options);
    if (suite == "empirical") return empirical_suite(options);
    throw InputError("verify: unknown suite '" + std::string(suite) +
                     "' (expected identity, skew-orth, convergence, equivalence or empirical)");
}

void write_suite_csv(std::ostream& out, const SuiteReport& report) {
    out << "check,achieved,tolerance,pass,detail\n";
    for (const CheckResult& c : report.checks)
        out << '"' << c.name << "\"," << csv_number(c.achieved) << ',' << csv_number(c.tolerance) << ','
            << (c.pass ? "true" : "false") << ",\"" << c.detail << "\"\n";
}

void write_suite_text(std::ostream& out, const SuiteReport& report) {
    for (const CheckResult& c : report.checks) {
        out << (c.pass ? "PASS " : "FAIL ") << c.name << ": " << csv_number(c.achieved) << " (tol "
            << csv_number(c.tolerance) << ")";
        if (!c.detail.empty()) out << "  " << c.detail;
        out << '\n';
    }
    out << report.suite << ": " << report.passed() << "/" << report.checks.size() << " passed\n";
}

}  // namespace kacpf
