#pragma once

#include <complex>
#include <vector>

#include "docalc/quadrature.hpp"
#include "docalc/weights.hpp"

namespace docalc {

using Complex = std::complex<double>;

class KernelEvaluator;

// Quadrature in the spectral variable for integrals of the form
// int_0^inf F(lambda) beta(lambda) dlambda: log-spaced Gauss panels on
// [lambda_min, lambda_max], with closed-form moments of beta supplied for
// both truncated tails (beta decays only like (ln lambda)^-2, so bare
// truncation would lose ~1/ln(lambda_max) of the integral).
struct StieltjesRule {
    std::vector<double> lambda;
    std::vector<double> weight; // quadrature weight times beta(lambda)
    double lambda_min = 1e-8;
    double lambda_max = 1e8;
    bool tail_correction = true;
    // int_0^lmin beta, int_0^lmin lambda*beta, int_lmax^inf beta/lambda,
    // int_lmax^inf beta/lambda^2 (all exact alpha-integrals).
    double low0 = 0.0, low1 = 0.0, high1 = 0.0, high2 = 0.0;

    std::size_t size() const { return lambda.size(); }
};

StieltjesRule make_stieltjes_rule(const KernelEvaluator& ke, double lambda_min = 1e-8,
                                  double lambda_max = 1e8, int panels_per_decade = 4,
                                  int points_per_panel = 8, bool tail_correction = true);

struct MonotoneReport {
    bool increasing = false;   // strictly increasing along the grid
    bool above_start = false;  // min over the grid >= value at tau = 0
    double min_value = 0.0;
    double start_value = 0.0;
    bool ok() const { return increasing && above_start; }
};

// Evaluates the convolution kernel k, its derivative, the symbols K and L,
// and the spectral density beta for a fixed weight. All integrals over the
// order variable use one cached Gauss rule; every operation is pure and the
// object is immutable, so concurrent use is safe.
class KernelEvaluator {
public:
    explicit KernelEvaluator(WeightFunction w, int alpha_points = 64);

    const WeightFunction& weight() const { return weight_; }

    // k(s) = int_0^1 s^-alpha / Gamma(1-alpha) mu(alpha) dalpha, s > 0.
    double eval_k(double s) const;
    // k'(s) = -int_0^1 alpha s^(-alpha-1) / Gamma(1-alpha) mu dalpha (< 0).
    double eval_k_prime(double s) const;
    // int_{t0}^{t1} s^m k(s) ds via the closed alpha-form; finite at t0 = 0.
    double k_power_moment(int m, double t0, double t1) const;
    // int_{t0}^{t1} k(s) ds.
    double cell_mass(double t0, double t1) const;
    // int_{t0}^{t1} (s - t0) k(s) ds.
    double cell_moment1(double t0, double t1) const;
    // int_{t0}^{t1} t^m (-k'(t)) dt for m >= 1, t0 >= 0.
    double kprime_power_moment(int m, double t0, double t1) const;

    // K(z) = int_0^1 z^(alpha-1) mu dalpha and L(z) = z K(z), principal
    // branch; z on (-inf, 0] is rejected. Accurate for |ln z| up to ~40.
    Complex eval_K(Complex z) const;
    Complex eval_L(Complex z) const;
    Complex eval_L_prime(Complex z) const;
    Complex eval_L_second(Complex z) const;

    // Spectral density beta(lambda) = int_0^1 lambda^-alpha sin(alpha pi)/pi
    // * mu(alpha) dalpha, lambda > 0.
    double eval_beta(double lambda) const;
    // Closed tail moments of beta (see StieltjesRule).
    double beta_tail_low0(double eps) const;
    double beta_tail_low1(double eps) const;
    double beta_tail_high1(double cap) const;
    double beta_tail_high2(double cap) const;

    // | L(x) - sum_i w_i x/(1 + lambda_i x) | for real x > 0, including the
    // rule's tail corrections when enabled.
    double stieltjes_identity_residual(double x, const StieltjesRule& rule) const;

    // | -int_0^inf t k'(t)/(1+t) dt  -  pi int_0^1 alpha mu /(sin(alpha pi)
    // Gamma(1-alpha)) dalpha |, both sides evaluated independently.
    double moment_identity_residual() const;

    // int_0^inf e^{-x t} k(t) dt for x > 0 (series near 0 + panels + tail).
    double laplace_of_k(double x) const;

    // Monotonicity of tau -> Re L(sigma + i tau) along a positive grid.
    MonotoneReport check_real_part_monotone(double sigma,
                                            const std::vector<double>& tau_grid) const;

private:
    WeightFunction weight_;
    // cached per-node data of the alpha rule
    std::vector<double> alpha_, muw_;       // node, weight * mu(node)
    std::vector<double> inv_gamma1_;        // 1 / Gamma(1 - alpha)
    std::vector<double> sin_over_pi_;       // sin(alpha pi) / pi
};

} // namespace docalc
