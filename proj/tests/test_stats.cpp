#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "kacpf/ensembles.hpp"
#include "kacpf/errors.hpp"
#include "kacpf/kernels.hpp"
#include "kacpf/stats.hpp"

using kacpf::cplx;
using kacpf::Spectrum;
using std::numbers::pi;

namespace {

Spectrum reals(std::vector<double> xs) {
    Spectrum s;
    s.real = std::move(xs);
    return s;
}

std::vector<Spectrum> random_stream(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::uniform_int_distribution<int> count(0, 5);
    std::vector<Spectrum> out;
    for (std::size_t i = 0; i < n; ++i) {
        Spectrum s;
        for (int k = count(rng); k > 0; --k) s.real.push_back(u(rng));
        for (int k = count(rng); k > 0; --k) s.upper.push_back(cplx(u(rng), 0.5 * (u(rng) + 1.0)));
        out.push_back(s);
    }
    return out;
}

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    return v[v.size() / 2];
}

}  // namespace

TEST_CASE("delta stream lands in one bin") {
    const std::vector<Spectrum> stream(50, reals({0.5}));
    const auto est = kacpf::real_density_histogram(stream, {0.0, 1.0, 10});
    for (std::size_t i = 0; i < est.size(); ++i) {
        if (i == 5) {
            CHECK(est.estimate[i] == doctest::Approx(10.0));
            CHECK(est.std_error[i] == 0.0);
        } else {
            CHECK(est.estimate[i] == 0.0);
            CHECK_FALSE(est.populated[i]);
            CHECK(est.std_error[i] > 0.0);  // conservative error for empty bins
        }
    }
    CHECK(est.boundary[9]);
    CHECK_FALSE(est.boundary[5]);
}

TEST_CASE("complex delta stream lands in one cell") {
    Spectrum s;
    s.upper = {cplx(0.0, 0.3)};
    const std::vector<Spectrum> stream(10, s);
    const auto est = kacpf::complex_density_histogram(stream, {-1.0, 1.0, 4}, {0.0, 1.0, 4});
    double total = 0.0;
    std::size_t hits = 0;
    for (std::size_t i = 0; i < est.size(); ++i) {
        total += est.estimate[i] * est.cells[i].measure(2);
        hits += est.populated[i];
    }
    CHECK(hits == 1);
    CHECK(total == doctest::Approx(1.0));
}

TEST_CASE("property: histogram mass equals the mean in-range count") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto stream = random_stream(100 + seed * 7, seed);
        const kacpf::HistogramSpec spec{-0.8, 0.7, 1 + static_cast<int>(seed % 13)};
        const auto est = kacpf::real_density_histogram(stream, spec);
        double mass = 0.0;
        for (std::size_t i = 0; i < est.size(); ++i) mass += est.estimate[i] * est.cells[i].measure(1);
        double in_range = 0.0;
        for (const auto& s : stream)
            for (double x : s.real) in_range += (x >= spec.lo && x < spec.hi);
        CHECK(mass == doctest::Approx(in_range / stream.size()).epsilon(1e-13));
    }
}

TEST_CASE("property: accumulators merge associatively and ignore draw order") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        auto stream = random_stream(120, 100 + seed);
        const kacpf::HistogramSpec spec{-1.0, 1.0, 7};
        kacpf::RealDensityAccumulator whole(spec);
        kacpf::PairCorrelationAccumulator pair_whole(spec);
        for (const auto& s : stream) {
            whole.add(s);
            pair_whole.add(s);
        }

        std::mt19937_64 rng(seed);
        std::shuffle(stream.begin(), stream.end(), rng);
        const std::size_t cut1 = 1 + seed * 5, cut2 = 60 + seed;
        kacpf::RealDensityAccumulator a(spec), b(spec), c(spec);
        kacpf::PairCorrelationAccumulator pa(spec), pb(spec);
        for (std::size_t i = 0; i < stream.size(); ++i) {
            (i < cut1 ? a : i < cut2 ? b : c).add(stream[i]);
            (i < cut2 ? pa : pb).add(stream[i]);
        }
        kacpf::RealDensityAccumulator left = a;  // (a + b) + c
        left.merge(b);
        left.merge(c);
        kacpf::RealDensityAccumulator right = b;  // a + (b + c)
        right.merge(c);
        kacpf::RealDensityAccumulator right_total = a;
        right_total.merge(right);
        pa.merge(pb);

        const auto e0 = whole.estimate(), e1 = left.estimate(), e2 = right_total.estimate();
        CHECK(e0.estimate == e1.estimate);
        CHECK(e0.std_error == e1.std_error);
        CHECK(e1.estimate == e2.estimate);
        CHECK(pa.estimate().estimate == pair_whole.estimate().estimate);
    }
}

TEST_CASE("pair correlation excludes self pairs") {
    const std::vector<Spectrum> stream(30, reals({0.1}));
    const auto est = kacpf::pair_correlation_estimate(stream, {-0.6, 0.6, 6});
    for (double v : est.estimate) CHECK(v == 0.0);

    // Two points in distinct cells: one ordered pair each way.
    const std::vector<Spectrum> two(4, reals({-0.5, 0.5}));
    const auto e2 = kacpf::pair_correlation_estimate(two, {-1.0, 1.0, 2});
    CHECK(e2.estimate[1] == doctest::Approx(1.0));
    CHECK(e2.estimate[2] == doctest::Approx(1.0));
    CHECK(e2.estimate[0] == 0.0);
}

TEST_CASE("mean real count") {
    const std::vector<Spectrum> stream(25, reals({0.1, -0.2}));
    const auto m = kacpf::mean_real_count(stream);
    CHECK(m.mean == 2.0);
    CHECK(m.std_error == 0.0);
    CHECK(m.draws == 25);
    CHECK_THROWS_AS(kacpf::mean_real_count(std::vector<Spectrum>{}), kacpf::InputError);
}

TEST_CASE("comparison report") {
    const auto stream = random_stream(400, 7);
    const auto est = kacpf::real_density_histogram(stream, {-0.9, 0.9, 9});

    const auto exact = kacpf::compare(est, est.estimate);
    CHECK(exact.sup_sigma == 0.0);
    CHECK(exact.pass);
    CHECK(exact.dof == 9);

    std::vector<double> shifted = est.estimate;
    shifted[4] -= 10.0 * est.std_error[4];
    const auto off = kacpf::compare(est, shifted);
    CHECK_FALSE(off.pass);
    REQUIRE(off.worst_cell.has_value());
    CHECK(*off.worst_cell == 4);
    CHECK(off.sup_sigma == doctest::Approx(10.0));
    REQUIRE(off.failing.size() == 1);
    CHECK(off.failing[0] == 4);

    CHECK_THROWS_AS(kacpf::compare(est, std::vector<double>(3, 0.0)), kacpf::StructuralError);
    const auto other = kacpf::real_density_histogram(stream, {-0.9, 0.9, 10});
    CHECK_THROWS_AS(kacpf::compare_two_sample(est, other), kacpf::StructuralError);
    CHECK(kacpf::compare_two_sample(est, est).sup_sigma == 0.0);

    std::ostringstream out;
    kacpf::write_report_csv(out, off);
    CHECK(out.str().rfind("metric,value,threshold,pass\nsup_sigma,", 0) == 0);
}

TEST_CASE("boundary bins are excluded from pass/fail") {
    const auto stream = random_stream(200, 9);
    const auto est = kacpf::real_density_histogram(stream, {-1.0, 1.0, 20});
    CHECK(est.boundary.front());
    CHECK(est.boundary.back());
    std::vector<double> target = est.estimate;
    target.front() += 100.0;
    const auto r = kacpf::compare(est, target);
    CHECK(r.pass);
    CHECK(r.excluded == 2);
}

TEST_CASE("histogram validation") {
    CHECK_THROWS_AS(kacpf::RealDensityAccumulator({1.0, 0.0, 3}), kacpf::InputError);
    CHECK_THROWS_AS(kacpf::RealDensityAccumulator({0.0, 1.0, 0}), kacpf::InputError);
    CHECK_THROWS_AS(kacpf::real_density_histogram(std::vector<Spectrum>{}, {0.0, 1.0, 2}), kacpf::InputError);
}

TEST_CASE("cell averages") {
    CHECK(kacpf::cell_average([](double x) { return x * x; }, 0.0, 3.0) == doctest::Approx(3.0));
    const kacpf::Cell cell{0.0, 1.0, 0.0, 1.0};
    CHECK(kacpf::cell_average([](double x, double y) { return std::abs(x - y); }, cell) ==
          doctest::Approx(1.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("doubling the draws shrinks the median standard error by about √2") {
    kacpf::EnsembleConfig c;
    c.kind = kacpf::EnsembleKind::TruncatedOrthogonal;
    c.L = 1;
    c.M = 20;
    c.samples = 4000;
    c.seed = 17;
    const auto spectra = kacpf::sample_spectra(c, 1);
    const kacpf::HistogramSpec spec{-0.9, 0.9, 12};
    const std::span<const Spectrum> all(spectra);
    const auto half = kacpf::real_density_histogram(all.first(2000), spec);
    const auto full = kacpf::real_density_histogram(all, spec);
    const double ratio = median(half.std_error) / median(full.std_error);
    CHECK(ratio >= 1.3);
    CHECK(ratio <= 1.5);
}

TEST_CASE("truncated real density matches the finite-M pfaffian density") {
    kacpf::EnsembleConfig c;
    c.kind = kacpf::EnsembleKind::TruncatedOrthogonal;
    c.L = 2;
    c.M = 16;
    c.samples = 4000;
    c.seed = 23;
    const auto spectra = kacpf::sample_spectra(c, 1);
    const auto est = kacpf::real_density_histogram(spectra, {-0.9, 0.9, 12});
    const kacpf::FiniteKernelSet k(2, 16);
    const auto rho = [&](double x) { return kacpf::rho_pfaffian({{x}, {}}, k); };
    const auto r = kacpf::compare(est, [&](const kacpf::Cell& cell) { return kacpf::cell_average(rho, cell.x_lo, cell.x_hi); });
    CHECK(r.pass);
}

TEST_CASE("truncated mean real count grows with M") {
    double previous = 0.0;
    for (int M : {20, 50, 100, 200}) {
        kacpf::EnsembleConfig c;
        c.kind = kacpf::EnsembleKind::TruncatedOrthogonal;
        c.L = 1;
        c.M = M;
        c.samples = M == 200 ? 600 : 1000;
        c.seed = 31;
        const auto m = kacpf::mean_real_count(kacpf::sample_spectra(c, 0));
        CHECK(m.mean > previous);
        previous = m.mean;
    }
}

TEST_CASE("matrix Kac complex density matches the limiting pfaffian at L = 2") {
    kacpf::EnsembleConfig c;
    c.kind = kacpf::EnsembleKind::MatrixKac;
    c.L = 2;
    c.N = 80;
    c.samples = 1000;
    c.seed = 41;
    const auto spectra = kacpf::sample_spectra(c, 0);
    const auto est = kacpf::complex_density_histogram(spectra, {-0.8, 0.8, 4}, {0.0, 0.8, 2});
    const kacpf::LimitingKernelSet k(2);
    const auto rho = [&](double x, double y) {
        if (!(y > 0.0) || std::hypot(x, y) >= 1.0) return 0.0;
        return kacpf::rho_pfaffian({{}, {cplx(x, y)}}, k);
    };
    const auto r = kacpf::compare(est, [&](const kacpf::Cell& cell) { return kacpf::cell_average(rho, cell); });
    // Cells next to the axis hold few points, so they are kept large enough
    // for the sample variance to be a usable error estimate.
    CHECK(r.compared == 6);
    CHECK(r.pass);
}
