#pragma once

// Gaussian-integral (real zeros) and Hafnian (complex zeros) formulations of
// the limiting Kac correlation functions.

#include <complex>
#include <cstdint>
#include <functional>
#include <span>

#include <Eigen/Dense>

namespace kacpf {

using cplx = std::complex<double>;

// --- real zeros: Kac–Rice Gaussian integral ---------------------------------

/// 2k×2k covariance of (f(x_j), f'(x_j)) for the limiting Kac series, built
/// from 2×2 blocks [[1/(1-xy), x/(1-xy)²], [y/(1-xy)², (1+xy)/(1-xy)³]].
Eigen::MatrixXd delta_matrix(std::span<const double> xs);

/// Δ⁻¹ restricted to the derivative coordinates (0-based indices 1, 3, 5, …).
Eigen::MatrixXd omega_matrix(const Eigen::MatrixXd& delta);

struct BleherDiOptions {
    std::uint64_t seed = 0x6b61632d6264ULL;
    std::size_t min_draws = 1'000'000;
    std::size_t max_draws = 10'000'000;
    double rel_tol = 1e-3;
    int threads = 1;
};

enum class EvaluationMethod { ClosedForm, MonteCarlo };

struct BleherDiResult {
    double value = 0.0;
    double std_error = 0.0;  // zero for the closed forms
    EvaluationMethod method = EvaluationMethod::ClosedForm;
    bool tolerance_met = true;
    std::size_t draws = 0;
};

/// ρ_k(x_1..x_k) = (2π)^{-k} det(Δ)^{-1/2} ∫ |y_1⋯y_k| exp(-½ yᵀΩy) dy.
///
/// Closed form for k = 1, 2; importance-sampled Monte Carlo (y ~ N(0, Ω⁻¹))
/// for k >= 3, drawn in fixed-size partitions until the relative standard
/// error reaches rel_tol or max_draws is spent. Points must be distinct and
/// at least 1e-6 away from ±1.
BleherDiResult bleher_di_rho(std::span<const double> xs, const BleherDiOptions& options = {});

// --- complex zeros: Hafnian form --------------------------------------------

struct GeneratorValues {
    cplx g;
    cplx dg;
    cplx d2g;
};

/// Covariance generator g(u) = Σ b_n uⁿ and its first two derivatives.
using Generator = std::function<GeneratorValues(cplx)>;

/// g(u) = 1/(1-u): every coefficient variance equal to one, N → ∞.
GeneratorValues g_kac(cplx u);

struct ProsenMatrices {
    Eigen::MatrixXcd A;  // g(w_j w̄_l)
    Eigen::MatrixXcd B;  // w_j g'(w_j w̄_l)
    Eigen::MatrixXcd C;  // g'(w_j w̄_l) + w_j w̄_l g''(w_j w̄_l)
};

/// A, B, C over the 2k points w = (z_1..z_k, z̄_1..z̄_k).
ProsenMatrices prosen_matrices(std::span<const cplx> zs, const Generator& g = g_kac);

struct ProsenResult {
    double value = 0.0;
    double imag_residue = 0.0;
};

/// ρ_k(z_1..z_k) = Hf(X P) / (π^k √det A), X = C - B†A⁻¹B the conditional
/// covariance of the derivatives and P the permutation pairing w_j with w̄_j.
/// A is factored by Cholesky; condition numbers above 1e10 are rejected.
ProsenResult prosen_rho_detailed(std::span<const cplx> zs, const Generator& g = g_kac);
double prosen_rho(std::span<const cplx> zs, const Generator& g = g_kac);

}  // namespace kacpf
