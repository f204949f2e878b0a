#pragma once

// Empirical densities, pair correlations and real-point counts from spectrum
// streams, and their comparison against analytic targets.

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "kacpf/ensembles.hpp"
#include "kacpf/quadrature.hpp"

namespace kacpf {

inline constexpr double kBoundaryModulus = 0.95;
inline constexpr double kDefaultSigmaMultiple = 3.0;

struct HistogramSpec {
    double lo = -1.0;
    double hi = 1.0;
    int bins = 1;

    void validate() const;
    double width() const noexcept { return (hi - lo) / bins; }
    double edge(int i) const noexcept { return i == bins ? hi : lo + i * width(); }
    /// Bin index, or -1 when x is outside [lo, hi).
    int bin_of(double x) const noexcept;
};

/// Rectangle over (x, y); 1D bins leave y_lo = y_hi = 0.
struct Cell {
    double x_lo = 0.0;
    double x_hi = 0.0;
    double y_lo = 0.0;
    double y_hi = 0.0;

    double measure(int dims) const noexcept;
    bool operator==(const Cell&) const = default;
};

/// Per-cell mean count per draw over the cell measure, with standard errors.
struct BinnedEstimate {
    int dims = 1;
    std::vector<Cell> cells;
    std::vector<double> estimate;
    std::vector<double> std_error;
    std::vector<bool> populated;
    std::vector<bool> boundary;  // excluded from pass/fail
    std::size_t draws = 0;

    std::size_t size() const noexcept { return cells.size(); }
};

/// Per-cell sums of counts and squared counts over draws. Sums of integers are
/// exact in double precision, so merging is associative and order-free.
class BinnedCounts {
public:
    BinnedCounts() = default;
    explicit BinnedCounts(std::size_t cells) : sum_(cells, 0.0), sumsq_(cells, 0.0) {}

    void add_draw(std::span<const double> counts);
    void merge(const BinnedCounts& other);

    std::size_t draws() const noexcept { return draws_; }
    std::size_t size() const noexcept { return sum_.size(); }
    const std::vector<double>& sums() const noexcept { return sum_; }
    const std::vector<double>& sums_of_squares() const noexcept { return sumsq_; }

private:
    std::size_t draws_ = 0;
    std::vector<double> sum_;
    std::vector<double> sumsq_;
};

/// Real points per unit length per draw.
class RealDensityAccumulator {
public:
    explicit RealDensityAccumulator(HistogramSpec spec);

    void add(const Spectrum& spectrum);
    void merge(const RealDensityAccumulator& other);
    BinnedEstimate estimate() const;
    std::size_t draws() const noexcept { return counts_.draws(); }

private:
    HistogramSpec spec_;
    BinnedCounts counts_;
};

/// Upper-half-plane points per unit area per draw on a Re × Im grid.
class ComplexDensityAccumulator {
public:
    ComplexDensityAccumulator(HistogramSpec re, HistogramSpec im);

    void add(const Spectrum& spectrum);
    void merge(const ComplexDensityAccumulator& other);
    BinnedEstimate estimate() const;
    std::size_t draws() const noexcept { return counts_.draws(); }

private:
    HistogramSpec re_;
    HistogramSpec im_;
    BinnedCounts counts_;
};

/// Ordered pairs (j ≠ l) of real points per unit area per draw on spec × spec.
class PairCorrelationAccumulator {
public:
    explicit PairCorrelationAccumulator(HistogramSpec spec);

    void add(const Spectrum& spectrum);
    void merge(const PairCorrelationAccumulator& other);
    BinnedEstimate estimate() const;
    std::size_t draws() const noexcept { return counts_.draws(); }

private:
    HistogramSpec spec_;
    BinnedCounts counts_;
};

BinnedEstimate real_density_histogram(std::span<const Spectrum> spectra, const HistogramSpec& spec);
BinnedEstimate complex_density_histogram(std::span<const Spectrum> spectra, const HistogramSpec& re,
                                         const HistogramSpec& im);
BinnedEstimate pair_correlation_estimate(std::span<const Spectrum> spectra, const HistogramSpec& spec);

struct MeanEstimate {
    double mean = 0.0;
    double std_error = 0.0;
    std::size_t draws = 0;
};

MeanEstimate mean_of(std::span<const double> values);
MeanEstimate mean_real_count(std::span<const Spectrum> spectra);

struct ComparisonReport {
    double sup_sigma = 0.0;
    std::optional<std::size_t> worst_cell;
    double chi_square = 0.0;
    std::size_t dof = 0;
    double sigma_multiple = kDefaultSigmaMultiple;
    bool pass = true;
    std::size_t draws = 0;
    std::size_t compared = 0;
    std::size_t excluded = 0;
    std::vector<double> sigma;      // signed deviation per cell, 0 for excluded cells
    std::vector<double> std_error;  // combined per-cell error
    std::vector<std::size_t> failing;
    std::string note;
};

/// Deviation of each non-boundary cell from the target in units of its standard
/// error; passes iff every such cell is within sigma_multiple.
ComparisonReport compare(const BinnedEstimate& estimate, std::span<const double> analytic,
                         double sigma_multiple = kDefaultSigmaMultiple);
/// Same, with the target given as a per-cell function (usually a cell average).
/// Boundary cells are not evaluated.
ComparisonReport compare(const BinnedEstimate& estimate, const std::function<double(const Cell&)>& analytic,
                         double sigma_multiple = kDefaultSigmaMultiple);
/// Two estimates on the same grid, errors added in quadrature.
ComparisonReport compare_two_sample(const BinnedEstimate& a, const BinnedEstimate& b,
                                    double sigma_multiple = kDefaultSigmaMultiple);

/// Far tighter than any sampling error a cell average is compared against.
inline constexpr QuadratureOptions kCellAverageOptions{1e-10, 1e-8, 20, true};

/// Mean of f over [lo, hi].
double cell_average(const std::function<double(double)>& f, double lo, double hi,
                    const QuadratureOptions& options = kCellAverageOptions);
/// Mean of f over a 2D cell; the inner integral is split on the diagonal so a
/// kink at x = y does not stall the adaptive rule.
double cell_average(const std::function<double(double, double)>& f, const Cell& cell,
                    const QuadratureOptions& options = kCellAverageOptions);

void write_histogram_csv(std::ostream& out, const BinnedEstimate& estimate);
void write_complex_histogram_csv(std::ostream& out, const BinnedEstimate& estimate);
void write_pair_csv(std::ostream& out, const BinnedEstimate& estimate, std::span<const double> analytic);
void write_report_csv(std::ostream& out, const ComparisonReport& report);

}  // namespace kacpf
