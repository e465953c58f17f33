#include <cmath>
#include <complex>
#include <stdexcept>

#include <doctest.h>

#include "docalc/kernels.hpp"
#include "oracles.hpp"

using docalc::Complex;
using docalc::KernelEvaluator;
using docalc::WeightFunction;

namespace {

// Reference values precomputed once with 50-digit arithmetic.
constexpr double kK1 = 0.54123573432867053;           // k(1), flat weight
constexpr double kIntK01 = 1.08514266435747008;       // int_0^1 k, flat weight
constexpr double kKPrime1 = 0.18372071190507562;      // -k'(1), flat weight
constexpr double kSmallS = 1.0789782374369194;        // k(1e-4) * 1e-4 * ln^2(1e-4)
constexpr double kBeta1 = 0.202642367284675543;       // beta(1) = 2/pi^2, flat weight
constexpr double kCellMass = 0.35662773655784638;     // int_{0.25}^{0.75} k, flat weight
constexpr double kMomentFlat = 0.92274595068063061;   // first spectral moment, flat weight
constexpr double kMomentLinear = 0.46253543146601897; // first spectral moment, mu = alpha

const KernelEvaluator& flat() {
    static const KernelEvaluator ke(WeightFunction::one());
    return ke;
}

const KernelEvaluator& linear() {
    static const KernelEvaluator ke(WeightFunction::linear());
    return ke;
}

} // namespace

TEST_CASE("kernel point values match the reference constants") {
    CHECK(flat().eval_k(1.0) == doctest::Approx(kK1).epsilon(1e-12));
    CHECK(-flat().eval_k_prime(1.0) == doctest::Approx(kKPrime1).epsilon(1e-12));
    const double s = 1e-4;
    const double l = std::log(s);
    CHECK(flat().eval_k(s) * s * l * l == doctest::Approx(kSmallS).epsilon(1e-11));
    CHECK(flat().cell_mass(0.0, 1.0) == doctest::Approx(kIntK01).epsilon(1e-12));
    CHECK(flat().cell_mass(0.25, 0.75) == doctest::Approx(kCellMass).epsilon(1e-12));
    CHECK(flat().eval_beta(1.0) == doctest::Approx(kBeta1).epsilon(1e-13));
    CHECK(flat().eval_beta(1.0) == doctest::Approx(2.0 / (M_PI * M_PI)).epsilon(1e-13));
}

TEST_CASE("kernel domain guards") {
    CHECK_THROWS_AS(flat().eval_k(0.0), std::domain_error);
    CHECK_THROWS_AS(flat().eval_k(-1.0), std::domain_error);
    CHECK_THROWS_AS(flat().eval_beta(0.0), std::domain_error);
    CHECK_THROWS_AS(flat().eval_L(Complex(-1.0, 0.0)), std::domain_error);
    CHECK_THROWS_AS(flat().eval_K(Complex(0.0, 0.0)), std::domain_error);
}

TEST_CASE("flat-weight symbol has the closed form (z-1)/ln z") {
    for (Complex z : {Complex(2.0, 0.0), Complex(4.0, 0.0), Complex(10.0, 0.0), Complex(1.0, 1.0)}) {
        const Complex want = (z - 1.0) / std::log(z);
        CHECK(std::abs(flat().eval_L(z) - want) <= 1e-12 * std::abs(want));
    }
    // removable point z = 1: the order integral is exactly the weight mass
    CHECK(flat().eval_L(Complex(1.0, 0.0)).real() == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(std::abs(flat().eval_L(Complex(1.0, 0.0)).imag()) <= 1e-15);
}

TEST_CASE("linear-weight symbol has the closed form (z ln z - z + 1)/ln^2 z") {
    const double e = std::exp(1.0);
    // int_0^1 alpha e^alpha dalpha = 1 exactly
    CHECK(linear().eval_L(Complex(e, 0.0)).real() == doctest::Approx(1.0).epsilon(1e-12));
    const double l4 = std::log(4.0);
    const double want = 4.0 / l4 - 3.0 / (l4 * l4);
    CHECK(linear().eval_L(Complex(4.0, 0.0)).real() == doctest::Approx(want).epsilon(1e-12));
}

TEST_CASE("symbol tends to mu(1)/ln z") {
    for (int k : {2, 4, 6, 8}) {
        const double lz = k * std::log(10.0);
        const double val = flat().eval_K(Complex(std::pow(10.0, k), 0.0)).real();
        CHECK(std::abs(val * lz - 1.0) * lz <= 5.0);
    }
}

TEST_CASE("symbol derivatives agree with finite differences") {
    const auto realL = [&](double x) { return flat().eval_L(Complex(x, 0.0)).real(); };
    const auto realLp = [&](double x) { return flat().eval_L_prime(Complex(x, 0.0)).real(); };
    for (double x : {0.7, 2.0, 5.0}) {
        const double fd1 = oracles::fd_derivative(realL, x, 1e-3 * x);
        CHECK(flat().eval_L_prime(Complex(x, 0.0)).real() == doctest::Approx(fd1).epsilon(1e-9));
        const double fd2 = oracles::fd_derivative(realLp, x, 1e-3 * x);
        CHECK(flat().eval_L_second(Complex(x, 0.0)).real() == doctest::Approx(fd2).epsilon(1e-9));
    }
}

TEST_CASE("spectral density matches direct order-integrals") {
    for (double lam : {1e-5, 0.3, 2.0, 1e4}) {
        const double want = oracles::integrate(
            [&](double a) { return std::pow(lam, -a) * std::sin(a * M_PI) / M_PI; }, 0.0, 1.0,
            1e-13 * std::max(1.0, std::pow(lam, -1.0)));
        CHECK(flat().eval_beta(lam) == doctest::Approx(want).epsilon(1e-9));
        CHECK(flat().eval_beta(lam) > 0.0);
    }
}

TEST_CASE("tail moments integrate beta over finite windows") {
    const auto& ke = flat();
    // difference of two tail values isolates a finite integral
    const auto on = [&](double lo, double hi, const std::function<double(double)>& f,
                        double got) {
        const double want = oracles::integrate([&](double u) {
            const double lam = std::exp(u);
            return lam * f(lam);
        }, std::log(lo), std::log(hi), 1e-14);
        CHECK(got == doctest::Approx(want).epsilon(1e-9));
    };
    on(1e-4, 1e-3, [&](double l) { return ke.eval_beta(l); },
       ke.beta_tail_low0(1e-3) - ke.beta_tail_low0(1e-4));
    on(1e-4, 1e-3, [&](double l) { return l * ke.eval_beta(l); },
       ke.beta_tail_low1(1e-3) - ke.beta_tail_low1(1e-4));
    on(1e4, 1e5, [&](double l) { return ke.eval_beta(l) / l; },
       ke.beta_tail_high1(1e4) - ke.beta_tail_high1(1e5));
    on(1e4, 1e5, [&](double l) { return ke.eval_beta(l) / (l * l); },
       ke.beta_tail_high2(1e4) - ke.beta_tail_high2(1e5));
}

TEST_CASE("stieltjes representation reproduces the symbol") {
    const auto rule = docalc::make_stieltjes_rule(flat());
    for (double x : {0.5, 1.0, 5.0})
        CHECK(flat().stieltjes_identity_residual(x, rule) <= 1e-5);
    // without the tail corrections the truncated window loses visible mass
    const auto bare = docalc::make_stieltjes_rule(flat(), 1e-8, 1e8, 4, 8, false);
    CHECK(flat().stieltjes_identity_residual(1.0, bare) >= 1e-3);
}

TEST_CASE("stieltjes rule structure") {
    const auto rule = docalc::make_stieltjes_rule(flat(), 1e-6, 1e6, 3, 5);
    CHECK(rule.size() == 12u * 3u * 5u);
    for (std::size_t i = 0; i < rule.size(); ++i) {
        CHECK(rule.lambda[i] >= 1e-6);
        CHECK(rule.lambda[i] <= 1e6);
        CHECK(rule.weight[i] > 0.0);
        if (i) CHECK(rule.lambda[i] > rule.lambda[i - 1]);
    }
    CHECK(rule.low0 > 0.0);
    CHECK(rule.high1 > 0.0);
    CHECK_THROWS_AS(docalc::make_stieltjes_rule(flat(), 1.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(docalc::make_stieltjes_rule(flat(), -1.0, 10.0), std::invalid_argument);
}

TEST_CASE("first spectral moment identity") {
    CHECK(flat().moment_identity_residual() <= 1e-8);
    CHECK(linear().moment_identity_residual() <= 1e-8);
    // anchor the right-hand side against an independent integrator; by the
    // reflection formula the integrand is Gamma(1 + alpha) mu(alpha), smooth
    // on the whole order interval
    const auto rhs = [](const WeightFunction& w) {
        return oracles::integrate([&](double a) { return std::tgamma(1.0 + a) * w(a); }, 0.0, 1.0,
                                  1e-12);
    };
    CHECK(rhs(WeightFunction::one()) == doctest::Approx(kMomentFlat).epsilon(1e-8));
    CHECK(rhs(WeightFunction::linear()) == doctest::Approx(kMomentLinear).epsilon(1e-8));
}

TEST_CASE("laplace transform of k is the symbol K") {
    for (double x : {0.7, 2.0, 10.0})
        CHECK(flat().laplace_of_k(x) ==
              doctest::Approx(flat().eval_K(Complex(x, 0.0)).real()).epsilon(1e-7));
}

TEST_CASE("cell moments agree with adaptive quadrature") {
    const auto& ke = flat();
    CHECK(ke.cell_mass(0.25, 0.75) ==
          doctest::Approx(oracles::integrate([&](double s) { return ke.eval_k(s); }, 0.25, 0.75))
              .epsilon(1e-10));
    CHECK(ke.cell_moment1(0.25, 0.75) ==
          doctest::Approx(
              oracles::integrate([&](double s) { return (s - 0.25) * ke.eval_k(s); }, 0.25, 0.75))
              .epsilon(1e-10));
    CHECK(ke.k_power_moment(1, 1e-12, 1.0) ==
          doctest::Approx(oracles::integrate([&](double s) { return s * ke.eval_k(s); }, 1e-12, 1.0,
                                             1e-13))
              .epsilon(1e-8));
    CHECK(ke.kprime_power_moment(1, 0.5, 2.0) ==
          doctest::Approx(oracles::integrate([&](double s) { return -s * ke.eval_k_prime(s); }, 0.5,
                                             2.0))
              .epsilon(1e-9));
    // additivity across a shared edge
    CHECK(ke.cell_mass(0.1, 0.4) + ke.cell_mass(0.4, 0.9) ==
          doctest::Approx(ke.cell_mass(0.1, 0.9)).epsilon(1e-13));
    CHECK_THROWS_AS(ke.cell_mass(0.5, 0.5), std::domain_error);
}

TEST_CASE("real part of the symbol rises along vertical lines") {
    const auto taus = oracles::log_grid(1.0, 100.0, 50);
    for (double sigma : {1.0, 2.0}) {
        CHECK(flat().check_real_part_monotone(sigma, taus).ok());
        CHECK(linear().check_real_part_monotone(sigma, taus).ok());
    }
    CHECK_THROWS_AS(flat().check_real_part_monotone(1.0, {}), std::invalid_argument);
    CHECK_THROWS_AS(flat().check_real_part_monotone(1.0, {-1.0, 2.0}), std::invalid_argument);
}
