#include "kacpf/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>

#include "kacpf/csv.hpp"
#include "kacpf/errors.hpp"

namespace kacpf {
namespace {

bool touches_boundary(double a, double b) { return std::max(std::abs(a), std::abs(b)) > kBoundaryModulus; }

bool touches_boundary(const Cell& c) {
    const double x = std::max(std::abs(c.x_lo), std::abs(c.x_hi));
    const double y = std::max(std::abs(c.y_lo), std::abs(c.y_hi));
    return std::hypot(x, y) > kBoundaryModulus;
}

BinnedEstimate finish(const BinnedCounts& counts, std::vector<Cell> cells, int dims,
                      const std::function<bool(const Cell&)>& boundary) {
    const std::size_t n = counts.draws();
    if (n == 0) throw InputError("histogram: no draws accumulated");
    const double dn = static_cast<double>(n);

    BinnedEstimate out;
    out.dims = dims;
    out.draws = n;
    out.cells = std::move(cells);
    const std::size_t m = out.cells.size();
    out.estimate.resize(m);
    out.std_error.resize(m);
    out.populated.resize(m);
    out.boundary.resize(m);
    for (std::size_t i = 0; i < m; ++i) {
        const double measure = out.cells[i].measure(dims);
        const double sum = counts.sums()[i];
        const double sumsq = counts.sums_of_squares()[i];
        out.boundary[i] = boundary(out.cells[i]);
        out.populated[i] = sum > 0.0;
        out.estimate[i] = sum / dn / measure;
        if (sum == 0.0) {
            // One count's worth of error.
            out.std_error[i] = 1.0 / dn / measure;
            continue;
        }
        const double var = n > 1 ? std::max(0.0, (sumsq - sum * sum / dn) / (dn - 1.0)) : sumsq;
        out.std_error[i] = std::sqrt(var / dn) / measure;
    }
    return out;
}

std::vector<Cell> cells_1d(const HistogramSpec& s) {
    std::vector<Cell> cells;
    for (int i = 0; i < s.bins; ++i) cells.push_back({s.edge(i), s.edge(i + 1), 0.0, 0.0});
    return cells;
}

std::vector<Cell> cells_2d(const HistogramSpec& x, const HistogramSpec& y) {
    std::vector<Cell> cells;
    for (int i = 0; i < x.bins; ++i)
        for (int j = 0; j < y.bins; ++j) cells.push_back({x.edge(i), x.edge(i + 1), y.edge(j), y.edge(j + 1)});
    return cells;
}

ComparisonReport evaluate(const BinnedEstimate& est, std::span<const double> target,
                          std::span<const double> extra_error, double sigma_multiple) {
    if (!(sigma_multiple > 0.0)) throw InputError("compare: sigma multiple must be positive");
    ComparisonReport r;
    r.sigma_multiple = sigma_multiple;
    r.draws = est.draws;
    r.sigma.assign(est.size(), 0.0);
    r.std_error.assign(est.size(), 0.0);
    for (std::size_t i = 0; i < est.size(); ++i) {
        const double extra = extra_error.empty() ? 0.0 : extra_error[i];
        const double se = std::hypot(est.std_error[i], extra);
        r.std_error[i] = se;
        if (est.boundary[i]) {
            ++r.excluded;
            continue;
        }
        ++r.compared;
        const double diff = est.estimate[i] - target[i];
        double z = 0.0;
        if (se > 0.0) {
            z = diff / se;
        } else if (diff != 0.0) {
            z = std::copysign(std::numeric_limits<double>::infinity(), diff);
        }
        r.sigma[i] = z;
        if (!r.worst_cell || std::abs(z) > r.sup_sigma) {
            r.sup_sigma = std::abs(z);
            r.worst_cell = i;
        }
        if (se > 0.0 && (est.populated[i] || target[i] != 0.0)) {
            r.chi_square += z * z;
            ++r.dof;
        }
        if (!(std::abs(z) <= sigma_multiple)) r.failing.push_back(i);
    }
    r.pass = r.failing.empty();
    std::ostringstream note;
    note << r.compared << " cells tested at " << sigma_multiple
         << " sigma each; no familywise correction (expected chance failures at 3 sigma: "
         << csv_number(0.0027 * static_cast<double>(r.compared)) << ")";
    r.note = note.str();
    return r;
}

}  // namespace

void HistogramSpec::validate() const {
    if (!std::isfinite(lo) || !std::isfinite(hi) || !(lo < hi)) throw InputError("histogram: need lo < hi");
    if (bins < 1) throw InputError("histogram: need at least one bin");
}

int HistogramSpec::bin_of(double x) const noexcept {
    if (!(x >= lo && x < hi)) return -1;
    const int i = static_cast<int>((x - lo) / width());
    return std::min(i, bins - 1);
}

double Cell::measure(int dims) const noexcept {
    return dims == 1 ? x_hi - x_lo : (x_hi - x_lo) * (y_hi - y_lo);
}

void BinnedCounts::add_draw(std::span<const double> counts) {
    if (counts.size() != sum_.size()) throw StructuralError("histogram: count vector size mismatch");
    for (std::size_t i = 0; i < counts.size(); ++i) {
        sum_[i] += counts[i];
        sumsq_[i] += counts[i] * counts[i];
    }
    ++draws_;
}

void BinnedCounts::merge(const BinnedCounts& other) {
    if (other.sum_.size() != sum_.size()) throw StructuralError("histogram: cannot merge different grids");
    for (std::size_t i = 0; i < sum_.size(); ++i) {
        sum_[i] += other.sum_[i];
        sumsq_[i] += other.sumsq_[i];
    }
    draws_ += other.draws_;
}

RealDensityAccumulator::RealDensityAccumulator(HistogramSpec spec)
    : spec_(spec), counts_((spec.validate(), static_cast<std::size_t>(spec.bins))) {}

void RealDensityAccumulator::add(const Spectrum& spectrum) {
    std::vector<double> c(static_cast<std::size_t>(spec_.bins), 0.0);
    for (double x : spectrum.real)
        if (const int b = spec_.bin_of(x); b >= 0) c[b] += 1.0;
    counts_.add_draw(c);
}

void RealDensityAccumulator::merge(const RealDensityAccumulator& other) {
    if (other.spec_.lo != spec_.lo || other.spec_.hi != spec_.hi || other.spec_.bins != spec_.bins)
        throw StructuralError("histogram: cannot merge different grids");
    counts_.merge(other.counts_);
}

BinnedEstimate RealDensityAccumulator::estimate() const {
    return finish(counts_, cells_1d(spec_), 1, [](const Cell& c) { return touches_boundary(c.x_lo, c.x_hi); });
}

ComplexDensityAccumulator::ComplexDensityAccumulator(HistogramSpec re, HistogramSpec im)
    : re_(re), im_(im), counts_((re.validate(), im.validate(), static_cast<std::size_t>(re.bins) * im.bins)) {}

void ComplexDensityAccumulator::add(const Spectrum& spectrum) {
    std::vector<double> c(counts_.size(), 0.0);
    for (cplx z : spectrum.upper) {
        const int i = re_.bin_of(z.real());
        const int j = im_.bin_of(z.imag());
        if (i >= 0 && j >= 0) c[static_cast<std::size_t>(i) * im_.bins + j] += 1.0;
    }
    counts_.add_draw(c);
}

void ComplexDensityAccumulator::merge(const ComplexDensityAccumulator& other) {
    if (other.counts_.size() != counts_.size()) throw StructuralError("histogram: cannot merge different grids");
    counts_.merge(other.counts_);
}

BinnedEstimate ComplexDensityAccumulator::estimate() const {
    return finish(counts_, cells_2d(re_, im_), 2, [](const Cell& c) { return touches_boundary(c); });
}

PairCorrelationAccumulator::PairCorrelationAccumulator(HistogramSpec spec)
    : spec_(spec), counts_((spec.validate(), static_cast<std::size_t>(spec.bins) * spec.bins)) {}

void PairCorrelationAccumulator::add(const Spectrum& spectrum) {
    const auto b = static_cast<std::size_t>(spec_.bins);
    std::vector<double> per_bin(b, 0.0);
    for (double x : spectrum.real)
        if (const int i = spec_.bin_of(x); i >= 0) per_bin[i] += 1.0;
    std::vector<double> c(b * b, 0.0);
    for (std::size_t i = 0; i < b; ++i)
        for (std::size_t j = 0; j < b; ++j) c[i * b + j] = i == j ? per_bin[i] * (per_bin[i] - 1.0) : per_bin[i] * per_bin[j];
    counts_.add_draw(c);
}

void PairCorrelationAccumulator::merge(const PairCorrelationAccumulator& other) {
    if (other.counts_.size() != counts_.size()) throw StructuralError("histogram: cannot merge different grids");
    counts_.merge(other.counts_);
}

BinnedEstimate PairCorrelationAccumulator::estimate() const {
    return finish(counts_, cells_2d(spec_, spec_), 2, [](const Cell& c) {
        return touches_boundary(c.x_lo, c.x_hi) || touches_boundary(c.y_lo, c.y_hi);
    });
}

BinnedEstimate real_density_histogram(std::span<const Spectrum> spectra, const HistogramSpec& spec) {
    if (spectra.empty()) throw InputError("real_density_histogram: empty stream");
    RealDensityAccumulator acc(spec);
    for (const Spectrum& s : spectra) acc.add(s);
    return acc.estimate();
}

BinnedEstimate complex_density_histogram(std::span<const Spectrum> spectra, const HistogramSpec& re,
                                         const HistogramSpec& im) {
    if (spectra.empty()) throw InputError("complex_density_histogram: empty stream");
    ComplexDensityAccumulator acc(re, im);
    for (const Spectrum& s : spectra) acc.add(s);
    return acc.estimate();
}

BinnedEstimate pair_correlation_estimate(std::span<const Spectrum> spectra, const HistogramSpec& spec) {
    if (spectra.empty()) throw InputError("pair_correlation_estimate: empty stream");
    PairCorrelationAccumulator acc(spec);
    for (const Spectrum& s : spectra) acc.add(s);
    return acc.estimate();
}

MeanEstimate mean_of(std::span<const double> values) {
    if (values.empty()) throw InputError("mean: empty sample");
    const double n = static_cast<double>(values.size());
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= n;
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    const double se = values.size() > 1 ? std::sqrt(ss / (n - 1.0) / n) : 0.0;
    return {mean, se, values.size()};
}

MeanEstimate mean_real_count(std::span<const Spectrum> spectra) {
    std::vector<double> counts;
    counts.reserve(spectra.size());
    for (const Spectrum& s : spectra) counts.push_back(static_cast<double>(s.real.size()));
    return mean_of(counts);
}

ComparisonReport compare(const BinnedEstimate& estimate, std::span<const double> analytic, double sigma_multiple) {
    if (analytic.size() != estimate.size()) throw StructuralError("compare: grid mismatch");
    return evaluate(estimate, analytic, {}, sigma_multiple);
}

ComparisonReport compare(const BinnedEstimate& estimate, const std::function<double(const Cell&)>& analytic,
                         double sigma_multiple) {
    std::vector<double> target;
    target.reserve(estimate.size());
    for (std::size_t i = 0; i < estimate.size(); ++i)
        target.push_back(estimate.boundary[i] ? 0.0 : analytic(estimate.cells[i]));
    return evaluate(estimate, target, {}, sigma_multiple);
}

ComparisonReport compare_two_sample(const BinnedEstimate& a, const BinnedEstimate& b, double sigma_multiple) {
    if (a.dims != b.dims || a.cells != b.cells) throw StructuralError("compare: grid mismatch");
    BinnedEstimate merged = a;
    for (std::size_t i = 0; i < a.size(); ++i) {
        merged.boundary[i] = a.boundary[i] || b.boundary[i];
        merged.populated[i] = a.populated[i] || b.populated[i];
    }
    merged.draws = std::min(a.draws, b.draws);
    return evaluate(merged, b.estimate, b.std_error, sigma_multiple);
}

double cell_average(const std::function<double(double)>& f, double lo, double hi, const QuadratureOptions& options) {
    return integrate(f, lo, hi, options).value / (hi - lo);
}

double cell_average(const std::function<double(double, double)>& f, const Cell& cell,
                    const QuadratureOptions& options) {
    QuadratureOptions inner_opts = options;
    inner_opts.abs_tol *= 1e-2;
    inner_opts.rel_tol *= 1e-2;
    // A diagonal this close to an edge leaves a sliver the rule cannot resolve.
    const double margin = 1e-9 * (cell.y_hi - cell.y_lo);
    auto inner = [&](double x) {
        auto g = [&](double y) { return f(x, y); };
        if (x > cell.y_lo + margin && x < cell.y_hi - margin)
            return integrate(g, cell.y_lo, x, inner_opts).value + integrate(g, x, cell.y_hi, inner_opts).value;
        return integrate(g, cell.y_lo, cell.y_hi, inner_opts).value;
    };
    return integrate(inner, cell.x_lo, cell.x_hi, options).value / cell.measure(2);
}

void write_histogram_csv(std::ostream& out, const BinnedEstimate& e) {
    out << "bin_lo,bin_hi,density,stderr\n";
    for (std::size_t i = 0; i < e.size(); ++i)
        out << csv_number(e.cells[i].x_lo) << ',' << csv_number(e.cells[i].x_hi) << ',' << csv_number(e.estimate[i])
            << ',' << csv_number(e.std_error[i]) << '\n';
}

void write_complex_histogram_csv(std::ostream& out, const BinnedEstimate& e) {
    out << "re_lo,re_hi,im_lo,im_hi,density,stderr\n";
    for (std::size_t i = 0; i < e.size(); ++i) {
        const Cell& c = e.cells[i];
        out << csv_number(c.x_lo) << ',' << csv_number(c.x_hi) << ',' << csv_number(c.y_lo) << ','
            << csv_number(c.y_hi) << ',' << csv_number(e.estimate[i]) << ',' << csv_number(e.std_error[i]) << '\n';
    }
}

void write_pair_csv(std::ostream& out, const BinnedEstimate& e, std::span<const double> analytic) {
    if (!analytic.empty() && analytic.size() != e.size()) throw StructuralError("write_pair_csv: grid mismatch");
    out << "x1_lo,x1_hi,x2_lo,x2_hi,estimate,stderr,analytic\n";
    for (std::size_t i = 0; i < e.size(); ++i) {
        const Cell& c = e.cells[i];
        out << csv_number(c.x_lo) << ',' << csv_number(c.x_hi) << ',' << csv_number(c.y_lo) << ','
            << csv_number(c.y_hi) << ',' << csv_number(e.estimate[i]) << ',' << csv_number(e.std_error[i]) << ','
            << (analytic.empty() ? std::string("nan") : csv_number(analytic[i])) << '\n';
    }
}

void write_report_csv(std::ostream& out, const ComparisonReport& r) {
    const char* verdict = r.pass ? "true" : "false";
    out << "metric,value,threshold,pass\n";
    out << "sup_sigma," << csv_number(r.sup_sigma) << ',' << csv_number(r.sigma_multiple) << ',' << verdict << '\n';
    out << "chi_square," << csv_number(r.chi_square) << ",," << '\n';
    out << "dof," << r.dof << ",," << '\n';
    out << "draws," << r.draws << ",," << '\n';
    out << "cells_compared," << r.compared << ",," << '\n';
    out << "cells_excluded," << r.excluded << ",," << '\n';
    out << "cells_failing," << r.failing.size() << ",0," << verdict << '\n';
    if (r.worst_cell) out << "worst_cell," << *r.worst_cell << ",," << '\n';
}

}  // namespace kacpf
