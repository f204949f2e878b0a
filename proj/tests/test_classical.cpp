#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "kacpf/classical.hpp"
#include "kacpf/errors.hpp"
#include "kacpf/kernels.hpp"

using kacpf::cplx;
using std::numbers::pi;

namespace {

// Covariances of f(x) = Σ a_n xⁿ and f' by direct summation of the series.
Eigen::MatrixXd delta_oracle(const std::vector<double>& xs) {
    const auto k = static_cast<Eigen::Index>(xs.size());
    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(2 * k, 2 * k);
    for (Eigen::Index a = 0; a < k; ++a) {
        for (Eigen::Index b = 0; b < k; ++b) {
            const double x = xs[a], y = xs[b];
            for (int n = 0; n < 4000; ++n) {
                d(2 * a, 2 * b) += std::pow(x * y, n);
                if (n >= 1) {
                    d(2 * a, 2 * b + 1) += n * std::pow(x, n) * std::pow(y, n - 1);
                    d(2 * a + 1, 2 * b) += n * std::pow(x, n - 1) * std::pow(y, n);
                    d(2 * a + 1, 2 * b + 1) += static_cast<double>(n) * n * std::pow(x * y, n - 1);
                }
            }
        }
    }
    return d;
}

// Scaled Kac generator: the zeros of √c f are those of f.
kacpf::GeneratorValues scaled_kac(cplx u) {
    const kacpf::GeneratorValues v = kacpf::g_kac(u);
    return {2.5 * v.g, 2.5 * v.dg, 2.5 * v.d2g};
}

}  // namespace

TEST_CASE("covariance matrix matches the power series") {
    const std::vector<double> xs{0.3, -0.5, 0.1};
    const Eigen::MatrixXd d = kacpf::delta_matrix(xs);
    CHECK((d - delta_oracle(xs)).cwiseAbs().maxCoeff() < 1e-10);
    CHECK((d - d.transpose()).norm() < 1e-14);
}

TEST_CASE("omega is the derivative block of the inverse") {
    const std::vector<double> xs{0.2, -0.4};
    const Eigen::MatrixXd d = kacpf::delta_matrix(xs);
    const Eigen::MatrixXd inv = d.inverse();
    const Eigen::MatrixXd o = kacpf::omega_matrix(d);
    CHECK(o(0, 0) == doctest::Approx(inv(1, 1)));
    CHECK(o(0, 1) == doctest::Approx(inv(1, 3)));
    CHECK(o(1, 1) == doctest::Approx(inv(3, 3)));
}

TEST_CASE("gaussian integral reproduces the one- and two-point closed forms") {
    for (double x : {-0.9, -0.3, 0.0, 0.55, 0.99}) {
        const std::vector<double> xs{x};
        const auto r = kacpf::bleher_di_rho(xs);
        CHECK(r.method == kacpf::EvaluationMethod::ClosedForm);
        CHECK(r.value == doctest::Approx(1.0 / (pi * (1.0 - x * x))).epsilon(1e-12));
    }
    for (auto [x, y] : {std::pair{0.2, -0.4}, {0.8, 0.7}, {-0.85, 0.6}, {0.1, 0.19}}) {
        const std::vector<double> xs{x, y};
        CHECK(kacpf::bleher_di_rho(xs).value == doctest::Approx(kacpf::rho2_real_closed(x, y)).epsilon(1e-10));
    }
    // Δ has condition ~ spacing⁻⁴, so close pairs lose digits.
    const std::vector<double> close{0.01, 0.02};
    CHECK(kacpf::bleher_di_rho(close).value == doctest::Approx(kacpf::rho2_real_closed(0.01, 0.02)).epsilon(1e-6));
}

TEST_CASE("three-point Monte Carlo agrees with the pfaffian") {
    const std::vector<double> xs{0.0, 0.3, -0.3};
    kacpf::BleherDiOptions o;
    o.min_draws = 1 << 20;
    o.max_draws = 1 << 20;
    o.seed = 4;
    const auto r = kacpf::bleher_di_rho(xs, o);
    CHECK(r.method == kacpf::EvaluationMethod::MonteCarlo);
    CHECK(r.draws == (1u << 20));
    const double pf = kacpf::rho_pfaffian({xs, {}}, kacpf::LimitingKernelSet(1));
    CHECK(std::abs(r.value - pf) < 4.0 * r.std_error);
    CHECK(r.std_error / r.value < 5e-3);
}

TEST_CASE("Monte Carlo is reproducible across thread counts") {
    const std::vector<double> xs{-0.5, 0.1, 0.6};
    kacpf::BleherDiOptions o;
    o.min_draws = 1 << 18;
    o.max_draws = 1 << 18;
    o.threads = 1;
    const auto a = kacpf::bleher_di_rho(xs, o);
    o.threads = 3;
    const auto b = kacpf::bleher_di_rho(xs, o);
    CHECK(a.value == b.value);
    CHECK(a.std_error == b.std_error);
}

TEST_CASE("Monte Carlo reports a missed tolerance") {
    const std::vector<double> xs{-0.5, 0.1, 0.6, 0.8};
    kacpf::BleherDiOptions o;
    o.min_draws = 1 << 16;
    o.max_draws = 1 << 16;
    o.rel_tol = 1e-6;
    const auto r = kacpf::bleher_di_rho(xs, o);
    CHECK_FALSE(r.tolerance_met);
    CHECK(r.std_error > 0.0);
}

TEST_CASE("gaussian integral input guards") {
    const std::vector<double> same{0.1, 0.1};
    CHECK_THROWS_AS(kacpf::bleher_di_rho(same), kacpf::SingularityError);
    const std::vector<double> edge{0.9999999};
    CHECK_THROWS_AS(kacpf::bleher_di_rho(edge), kacpf::DomainError);
    const std::vector<double> close{0.1, 0.1 + 1e-9};
    CHECK_THROWS_AS(kacpf::bleher_di_rho(close), kacpf::SingularityError);
    CHECK_THROWS_AS(kacpf::bleher_di_rho(std::vector<double>{}), kacpf::InputError);
}

TEST_CASE("hafnian form reproduces the complex one-point density") {
    for (cplx z : {cplx(0.0, 0.3), cplx(0.5, 0.1), cplx(-0.7, 0.6), cplx(0.05, 0.05)}) {
        const std::vector<cplx> zs{z};
        CHECK(kacpf::prosen_rho(zs) == doctest::Approx(kacpf::rho1_complex_closed(z)).epsilon(1e-10));
    }
}

TEST_CASE("hafnian form agrees with the pfaffian for two and three complex points") {
    const kacpf::LimitingKernelSet k(1);
    const std::vector<cplx> two{cplx(0.0, 0.3), cplx(0.2, 0.4)};
    CHECK(kacpf::prosen_rho(two) == doctest::Approx(0.005066082546236882).epsilon(1e-10));
    const std::vector<cplx> three{cplx(0.1, 0.5), cplx(-0.4, 0.2), cplx(0.6, 0.3)};
    CHECK(kacpf::prosen_rho(three) == doctest::Approx(kacpf::rho_pfaffian({{}, three}, k)).epsilon(1e-9));
    const auto detail = kacpf::prosen_rho_detailed(three);
    CHECK(detail.imag_residue < 1e-12);
}

TEST_CASE("hafnian form is invariant under scaling the generator") {
    const std::vector<cplx> zs{cplx(0.1, 0.5), cplx(-0.4, 0.2)};
    CHECK(kacpf::prosen_rho(zs, scaled_kac) == doctest::Approx(kacpf::prosen_rho(zs)).epsilon(1e-12));
}

TEST_CASE("hafnian form input guards") {
    CHECK_THROWS_AS(kacpf::prosen_rho(std::vector<cplx>{cplx(0.3, 0.0)}), kacpf::DomainError);
    CHECK_THROWS_AS(kacpf::prosen_rho(std::vector<cplx>{cplx(0.3, 1.0)}), kacpf::DomainError);
    CHECK_THROWS_AS(kacpf::prosen_rho(std::vector<cplx>{cplx(0.3, 0.2), cplx(0.3, 0.2 + 1e-9)}),
                    kacpf::SingularityError);
    CHECK_THROWS_AS(kacpf::g_kac(cplx(1.0, 0.0)), kacpf::DomainError);
}
