#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cli_parse.hpp"
#include "kacpf/classical.hpp"
#include "kacpf/csv.hpp"
#include "kacpf/ensembles.hpp"
#include "kacpf/errors.hpp"
#include "kacpf/kernels.hpp"
#include "kacpf/parallel.hpp"
#include "kacpf/stats.hpp"
#include "kacpf/verify.hpp"

namespace {

using namespace kacpf;

struct RunConfig {
    std::string ensemble = "truncated";
    int L = 1;
    int M = 100;
    int N = 100;
    std::size_t samples = 1000;
    std::uint64_t seed = 0;
    int threads = 0;
    std::string out;

    // sample
    double disk_margin = 0.05;
    bool real_only = false;

    // eval
    std::string method = "pfaffian";
    std::vector<double> reals;
    std::vector<std::string> complexes;
    bool finite = false;
    std::size_t mc_draws = 10'000'000;
    double rel_tol = 1e-3;
    std::vector<double> grid_range;  // lo hi n, 1-point real grid

    // verify
    std::string suite;
    int trials = 20;
    int jmax = 3;
    std::string grid = "coarse";

    // density / pair
    std::string kind = "real";
    double lo = -0.9;
    double hi = 0.9;
    int bins = 18;
    int im_bins = 10;
    double pair_lo = -0.6;
    double pair_hi = 0.6;
    int pair_bins = 6;
    double sigma = kDefaultSigmaMultiple;
    std::string report;
};

// Output stream that is either a file or stdout.
class Output {
public:
    explicit Output(const std::string& path) {
        if (!path.empty() && path != "-") {
            file_ = std::make_unique<std::ofstream>(path);
            if (!*file_) throw Error("cannot open '" + path + "' for writing");
        }
    }
    std::ostream& stream() { return file_ ? *file_ : std::cout; }
    void close(const std::string& path) {
        stream().flush();
        if (!stream()) throw Error("write failed for '" + (path.empty() ? std::string("stdout") : path) + "'");
    }

private:
    std::unique_ptr<std::ofstream> file_;
};

EnsembleConfig ensemble_config(const RunConfig& rc) {
    EnsembleConfig c;
    c.kind = parse_ensemble_kind(rc.ensemble);
    c.L = rc.L;
    c.M = rc.M;
    c.N = rc.N;
    c.samples = rc.samples;
    c.seed = rc.seed;
    c.disk_margin = rc.disk_margin;
    c.real_only = rc.real_only;
    c.validate();
    return c;
}

int threads_of(const RunConfig& rc) { return rc.threads > 0 ? rc.threads : default_thread_count(); }

int cmd_sample(const RunConfig& rc) {
    const EnsembleConfig config = ensemble_config(rc);
    const auto spectra = sample_spectra(config, threads_of(rc));
    Output out(rc.out);
    write_spectrum_csv_header(out.stream());
    std::size_t rejections = 0;
    std::size_t outside = 0;
    for (const Spectrum& s : spectra) {
        write_spectrum_csv_rows(out.stream(), s);
        rejections += s.meta.rejections;
        outside += s.meta.outside_unit_disk;
    }
    out.close(rc.out);
    std::cerr << "draws=" << spectra.size() << " rejections=" << rejections << " outside_unit_disk=" << outside
              << '\n';
    return 0;
}

PointConfig point_config(const RunConfig& rc) {
    PointConfig p;
    p.xs = rc.reals;
    for (const std::string& s : rc.complexes) p.zs.push_back(cli::parse_complex(s));
    return p;
}

struct EvalValue {
    double value;
    std::optional<double> std_error;
};

EvalValue evaluate(const RunConfig& rc, const PointConfig& p) {
    if (p.size() == 0) throw InputError("eval: give at least one --real or --complex point");
    if (rc.method == "pfaffian") {
        p.validate();
        if (rc.finite) return {rho_pfaffian(p, FiniteKernelSet(rc.L, rc.M)), {}};
        return {rho_pfaffian(p, LimitingKernelSet(rc.L)), {}};
    }
    if (rc.L != 1) throw InputError("eval: method '" + rc.method + "' is defined for L = 1 only");
    if (rc.method == "bleher-di") {
        if (!p.zs.empty()) throw InputError("eval: bleher-di takes real points only");
        BleherDiOptions o;
        o.seed = rc.seed;
        o.max_draws = rc.mc_draws;
        o.min_draws = std::min(o.min_draws, rc.mc_draws);
        o.rel_tol = rc.rel_tol;
        o.threads = threads_of(rc);
        const BleherDiResult r = bleher_di_rho(p.xs, o);
        if (!r.tolerance_met)
            std::cerr << "warning: Monte Carlo relative error " << csv_number(r.std_error / r.value)
                      << " above requested " << csv_number(rc.rel_tol) << '\n';
        if (r.method == EvaluationMethod::MonteCarlo) return {r.value, r.std_error};
        return {r.value, {}};
    }
    if (rc.method == "prosen") {
        if (!p.xs.empty()) throw InputError("eval: prosen takes complex points only");
        return {prosen_rho(p.zs), {}};
    }
    if (rc.method == "closed-form") {
        p.validate();
        if (p.xs.size() == 1 && p.zs.empty()) return {rho1_real_closed(p.xs[0]), {}};
        if (p.xs.size() == 2 && p.zs.empty()) return {rho2_real_closed(p.xs[0], p.xs[1]), {}};
        if (p.xs.empty() && p.zs.size() == 1) return {rho1_complex_closed(p.zs[0]), {}};
        throw InputError("eval: closed forms exist for one real, two real or one complex point");
    }
    throw InputError("eval: unknown method '" + rc.method + "' (pfaffian, bleher-di, prosen, closed-form)");
}

int cmd_eval(const RunConfig& rc) {
    std::vector<PointConfig> configs;
    if (!rc.grid_range.empty()) {
        if (!rc.reals.empty() || !rc.complexes.empty()) throw InputError("eval: --grid replaces explicit points");
        const int n = static_cast<int>(rc.grid_range[2]);
        if (n < 1 || rc.grid_range[2] != n || !(rc.grid_range[0] <= rc.grid_range[1]))
            throw InputError("eval: --grid expects lo hi n with lo <= hi and integer n >= 1");
        for (int i = 0; i < n; ++i) {
            const double x =
                n == 1 ? rc.grid_range[0] : rc.grid_range[0] + (rc.grid_range[1] - rc.grid_range[0]) * i / (n - 1);
            configs.push_back({{x}, {}});
        }
    } else {
        configs.push_back(point_config(rc));
    }

    std::vector<EvalValue> values;
    for (const PointConfig& p : configs) values.push_back(evaluate(rc, p));
    const bool with_error = values.front().std_error.has_value();

    Output out(rc.out);
    std::ostream& os = out.stream();
    const PointConfig& shape = configs.front();
    for (std::size_t i = 0; i < shape.xs.size(); ++i) os << 'x' << i + 1 << ',';
    for (std::size_t i = 0; i < shape.zs.size(); ++i) os << 'z' << i + 1 << "_re,z" << i + 1 << "_im,";
    os << "value" << (with_error ? ",stderr" : "") << '\n';
    for (std::size_t r = 0; r < configs.size(); ++r) {
        for (double x : configs[r].xs) os << csv_number(x) << ',';
        for (cplx z : configs[r].zs) os << csv_number(z.real()) << ',' << csv_number(z.imag()) << ',';
        os << csv_number(values[r].value);
        if (with_error) os << ',' << csv_number(*values[r].std_error);
        os << '\n';
    }
    out.close(rc.out);
    return 0;
}

int cmd_verify(const RunConfig& rc) {
    VerifyOptions o;
    o.L = rc.L;
    o.M = rc.M;
    o.trials = rc.trials;
    o.jmax = rc.jmax;
    o.grid = rc.grid;
    o.seed = rc.seed;
    o.samples = rc.samples;
    o.threads = threads_of(rc);
    const SuiteReport report = run_suite(rc.suite, o);
    write_suite_text(std::cerr, report);
    Output out(rc.out);
    write_suite_csv(out.stream(), report);
    out.close(rc.out);
    return report.pass() ? 0 : 1;
}

// Exact finite-M density for truncated blocks, limiting density for Kac series.
std::unique_ptr<KernelSet> target_kernels(const EnsembleConfig& c) {
    switch (c.kind) {
        case EnsembleKind::TruncatedOrthogonal:
            return std::make_unique<FiniteKernelSet>(c.L, c.M);
        case EnsembleKind::Kac:
            return std::make_unique<LimitingKernelSet>(1);
        case EnsembleKind::MatrixKac:
            return std::make_unique<LimitingKernelSet>(c.L);
    }
    throw InputError("unknown ensemble");
}

void write_report(const RunConfig& rc, const ComparisonReport& cmp) {
    if (rc.report.empty()) {
        std::cerr << "max deviation " << csv_number(cmp.sup_sigma) << " sigma over " << cmp.compared << " cells ("
                  << (cmp.pass ? "pass" : "fail") << "); " << cmp.note << '\n';
        return;
    }
    Output rep(rc.report);
    write_report_csv(rep.stream(), cmp);
    rep.close(rc.report);
}

int cmd_density(const RunConfig& rc) {
    const EnsembleConfig config = ensemble_config(rc);
    if (rc.kind != "real" && rc.kind != "complex") throw InputError("density: --kind must be real or complex");
    if (rc.kind == "complex" && config.real_only) throw InputError("density: --real-only discards complex zeros");
    const auto spectra = sample_spectra(config, threads_of(rc));
    const auto kernels = target_kernels(config);
    Output out(rc.out);
    if (rc.kind == "real") {
        const BinnedEstimate est = real_density_histogram(spectra, {rc.lo, rc.hi, rc.bins});
        const auto rho = [&](double x) { return rho_pfaffian({{x}, {}}, *kernels); };
        write_histogram_csv(out.stream(), est);
        out.close(rc.out);
        write_report(rc, compare(est, [&](const Cell& c) { return cell_average(rho, c.x_lo, c.x_hi); }, rc.sigma));
        return 0;
    }
    const HistogramSpec re{rc.lo, rc.hi, rc.bins};
    const HistogramSpec im{0.0, std::max(std::abs(rc.lo), std::abs(rc.hi)), rc.im_bins};
    const BinnedEstimate est = complex_density_histogram(spectra, re, im);
    write_complex_histogram_csv(out.stream(), est);
    out.close(rc.out);
    const auto rho = [&](double x, double y) {
        if (!(y > 0.0) || std::hypot(x, y) >= 1.0) return 0.0;
        return rho_pfaffian({{}, {cplx(x, y)}}, *kernels);
    };
    write_report(rc, compare(est, [&](const Cell& c) { return cell_average(rho, c); }, rc.sigma));
    return 0;
}

int cmd_pair(const RunConfig& rc) {
    const EnsembleConfig config = ensemble_config(rc);
    const auto spectra = sample_spectra(config, threads_of(rc));
    const auto kernels = target_kernels(config);
    const BinnedEstimate est = pair_correlation_estimate(spectra, {rc.pair_lo, rc.pair_hi, rc.pair_bins});
    if (est.draws < 1000) std::cerr << "note: fewer than 1000 draws; pair estimates will be noisy\n";
    const auto rho2 = [&](double x, double y) { return x == y ? 0.0 : rho_pfaffian({{x, y}, {}}, *kernels); };
    std::vector<double> analytic;
    for (const Cell& c : est.cells) analytic.push_back(cell_average(rho2, c, {1e-10, 1e-7, 20, false}));
    Output out(rc.out);
    write_pair_csv(out.stream(), est, analytic);
    out.close(rc.out);
    write_report(rc, compare(est, analytic, rc.sigma));
    return 0;
}

void add_ensemble_options(CLI::App* sub, RunConfig& rc) {
    sub->add_option("--ensemble", rc.ensemble, "truncated | kac | matrix-kac")->capture_default_str();
    sub->add_option("--disk-margin", rc.disk_margin, "matrix-kac: keep zeros with |z| < 1 - margin")
        ->capture_default_str();
    sub->add_flag("--real-only", rc.real_only, "kac: locate real zeros only");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Correlation functions of truncated orthogonal eigenvalues and Kac zeros"};
    app.require_subcommand(1);
    app.fallthrough();
    app.set_config("--config", "", "key=value file supplying option defaults");

    RunConfig rc;
    app.add_option("--L", rc.L, "truncation rank L")->check(CLI::PositiveNumber)->capture_default_str();
    app.add_option("--M", rc.M, "block size M")->check(CLI::PositiveNumber)->capture_default_str();
    app.add_option("--N", rc.N, "polynomial degree N")->check(CLI::PositiveNumber)->capture_default_str();
    app.add_option("--samples", rc.samples, "number of draws")->capture_default_str();
    app.add_option("--seed", rc.seed, "master seed for all randomness")->capture_default_str();
    app.add_option("--threads", rc.threads, "worker threads (0 = available parallelism)")
        ->envname("KACPF_THREADS")
        ->check(CLI::NonNegativeNumber);
    app.add_option("--out", rc.out, "output path (stdout when omitted)");

    auto* sample = app.add_subcommand("sample", "draw spectra and write them as CSV");
    add_ensemble_options(sample, rc);

    auto* eval = app.add_subcommand("eval", "evaluate correlation functions at given points");
    eval->add_option("--method", rc.method, "pfaffian | bleher-di | prosen | closed-form")->capture_default_str();
    eval->add_option("--real", rc.reals, "real point (repeatable)");
    eval->add_option("--complex", rc.complexes, "complex point a+bi in the upper half disk (repeatable)");
    eval->add_flag("--finite", rc.finite, "pfaffian: use the finite-M kernels");
    eval->add_option("--mc-draws", rc.mc_draws, "bleher-di: Monte Carlo draw budget")->capture_default_str();
    eval->add_option("--rel-tol", rc.rel_tol, "bleher-di: target relative standard error")->capture_default_str();
    eval->add_option("--grid", rc.grid_range, "one-point real grid: lo hi n")->expected(3);

    auto* verify = app.add_subcommand("verify", "run a verification suite");
    verify->add_option("--suite", rc.suite, "identity | skew-orth | convergence | equivalence | empirical")
        ->required();
    verify->add_option("--trials", rc.trials, "identity: random trials")->capture_default_str();
    verify->add_option("--jmax", rc.jmax, "skew-orth: highest polynomial index")->capture_default_str();
    verify->add_option("--grid", rc.grid, "coarse | fine")->capture_default_str();

    auto* density = app.add_subcommand("density", "empirical one-point density against its analytic target");
    add_ensemble_options(density, rc);
    density->add_option("--kind", rc.kind, "real | complex")->capture_default_str();
    density->add_option("--lo", rc.lo)->capture_default_str();
    density->add_option("--hi", rc.hi)->capture_default_str();
    density->add_option("--bins", rc.bins, "bins (real axis)")->capture_default_str();
    density->add_option("--im-bins", rc.im_bins, "bins along Im z for --kind complex")->capture_default_str();
    density->add_option("--sigma", rc.sigma, "pass threshold in standard errors")->capture_default_str();
    density->add_option("--report", rc.report, "comparison report CSV path");

    auto* pair = app.add_subcommand("pair", "empirical two-point function of real points");
    add_ensemble_options(pair, rc);
    pair->add_option("--lo", rc.pair_lo)->capture_default_str();
    pair->add_option("--hi", rc.pair_hi)->capture_default_str();
    pair->add_option("--bins", rc.pair_bins, "bins per axis")->capture_default_str();
    pair->add_option("--sigma", rc.sigma)->capture_default_str();
    pair->add_option("--report", rc.report, "comparison report CSV path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (*sample) return cmd_sample(rc);
        if (*eval) return cmd_eval(rc);
        if (*verify) return cmd_verify(rc);
        if (*density) return cmd_density(rc);
        if (*pair) return cmd_pair(rc);
    } catch (const SingularityError& e) {
        std::cerr << "error: " << e.what() << " (condition " << csv_number(e.condition()) << ")\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 2;
}
