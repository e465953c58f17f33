#include "docalc/kernels.hpp"

#include <cmath>
#include <stdexcept>

namespace docalc {

namespace {
const double kPi = std::acos(-1.0);

void require_positive(double v, const char* what) {
    if (!(v > 0.0)) throw std::domain_error(std::string(what) + " must be positive");
}
} // namespace

KernelEvaluator::KernelEvaluator(WeightFunction w, int alpha_points) : weight_(std::move(w)) {
    if (alpha_points < 4) throw std::invalid_argument("KernelEvaluator: too few alpha points");
    QuadratureRule rule;
    if (weight_.zero_behavior().power_law && weight_.zero_behavior().nu > 0.0) {
        // alpha^nu with fractional nu is not analytic at 0; shrink panels
        // toward the endpoint so each panel sees a smooth relative variation.
        rule = QuadratureRule::geometric_toward(0.0, 1.0, 24, 0.5,
                                                std::max(8, alpha_points / 8));
    } else {
        rule = QuadratureRule::gauss_legendre(alpha_points, 0.0, 1.0);
    }
    const std::size_t n = rule.size();
    alpha_.resize(n);
    muw_.resize(n);
    inv_gamma1_.resize(n);
    sin_over_pi_.resize(n);
    for (std::size_t q = 0; q < n; ++q) {
        const double a = rule.nodes[q];
        alpha_[q] = a;
        muw_[q] = rule.weights[q] * weight_(a);
        // 1/Gamma is entire; tgamma(1-a) is safe for a in (0,1).
        inv_gamma1_[q] = 1.0 / std::tgamma(1.0 - a);
        sin_over_pi_[q] = std::sin(kPi * a) / kPi;
    }
}

double KernelEvaluator::eval_k(double s) const {
    require_positive(s, "kernel argument s");
    const double ls = std::log(s);
    double acc = 0.0;
    for (std::size_t q = 0; q < alpha_.size(); ++q)
        acc += muw_[q] * inv_gamma1_[q] * std::exp(-alpha_[q] * ls);
    return acc;
}

double KernelEvaluator::eval_k_prime(double s) const {
    require_positive(s, "kernel argument s");
    const double ls = std::log(s);
    double acc = 0.0;
    for (std::size_t q = 0; q < alpha_.size(); ++q)
        acc += muw_[q] * inv_gamma1_[q] * alpha_[q] * std::exp(-(alpha_[q] + 1.0) * ls);
    return -acc;
}

double KernelEvaluator::k_power_moment(int m, double t0, double t1) const {
    if (m < 0) throw std::invalid_argument("k_power_moment: m must be >= 0");
    if (!(t0 >= 0.0) || !(t1 > t0)) throw std::domain_error("k_power_moment: need 0 <= t0 < t1");
    double acc = 0.0;
    for (std::size_t q = 0; q < alpha_.size(); ++q) {
        const double p = m + 1.0 - alpha_[q]; // > 0
        const double hi = std::pow(t1, p);
        const double lo = t0 > 0.0 ? std::pow(t0, p) : 0.0;
        acc += muw_[q] * inv_gamma1_[q] * (hi - lo) / p;
    }
    return acc;
}

double KernelEvaluator::cell_mass(double t0, double t1) const { return k_power_moment(0, t0, t1); }

double KernelEvaluator::cell_moment1(double t0, double t1) const {
    return k_power_moment(1, t0, t1) - t0 * k_power_moment(0, t0, t1);
}

double KernelEvaluator::kprime_power_moment(int m, double t0, double t1) const {
    if (m < 1) throw std::invalid_argument("kprime_power_moment: m must be >= 1");
    if (!(t0 >= 0.0) || !(t1 > t0))
        throw std::domain_error("kprime_power_moment: need 0 <= t0 < t1");
    double acc = 0.0;
    for (std::size_t q = 0; q < alpha_.size(); ++q) {
        const double p = m - alpha_[q]; // > 0 for m >= 1
        const double hi = std::pow(t1, p);
        const double lo = t0 > 0.0 ? std::pow(t0, p) : 0.0;
        acc += muw_[q] * inv_gamma1_[q] * alpha_[q] * (hi - lo) / p;
    }
    return acc;
}

Complex KernelEvaluator::eval_L(Complex z) const {
    if (z.imag() == 0.0 && z.real() <= 0.0)
        throw std::domain_error("symbol evaluated on the branch cut (-inf, 0]");
    const Complex lz = std::log(z);
    Complex acc = 0.0;
    for (std::size_t q = 0; q < alpha_.size(); ++q)
        acc += muw_[q] * std::exp(alpha_[q] * lz);
    return acc;
}

Complex KernelEvaluator::eval_K(Complex z) const { return eval_L(z) / z; }

Complex KernelEvaluator::eval_L_prime(Complex z) const {
    if (z.imag() == 0.0 && z.real() <= 0.0)
        throw std::domain_error("symbol evaluated on the branch cut (-inf, 0]");
    const Complex lz = std::log(z);
    Complex acc = 0.0;
    for (std::size_t q = 0; q < alpha_.size(); ++q)
        acc += muw_[q] * alpha_[q] * std::exp(alpha_[q] * lz);
    return acc / z;
}

Complex KernelEvaluator::eval_L_second(Complex z) const {
    if (z.imag() == 0.0 && z.real() <= 0.0)
        throw std::domain_error("symbol evaluated on the branch cut (-inf, 0]");
    const Complex lz = std::log(z);
    Complex acc = 0.0;
    for (std::size_t q = 0; q < alpha_.size(); ++q)
        acc += muw_[q] * alpha_[q] * (alpha_[q] - 1.0) * std::exp(alpha_[q] * lz);
    return acc / (z * z);
}

double KernelEvaluator::eval_beta(double lambda) const {
    require_positive(lambda, "spectral argument lambda");
    const double ll = std::log(lambda);
    double acc = 0.0;
    for (std::size_t q = 0; q < alpha_.size(); ++q)
        acc += muw_[q] * sin_over_pi_[q] * std::exp(-alpha_[q] * ll);
    return acc;
}

double KernelEvaluator::beta_tail_low0(double eps) const {
    require_positive(eps, "tail cutoff");
    double acc = 0.0;
    for (std::size_t q = 0; q < alpha_.size(); ++q)
        acc += muw_[q] * sin_over_pi_[q] * std::pow(eps, 1.0 - alpha_[q]) / (1.0 - alpha_[q]);
    return acc;
}

double KernelEvaluator::beta_tail_low1(double eps) const {
    require_positive(eps, "tail cutoff");
    double acc = 0.0;
    for (std::size_t q = 0; q < alpha_.size(); ++q)
        acc += muw_[q] * sin_over_pi_[q] * std::pow(eps, 2.0 - alpha_[q]) / (2.0 - alpha_[q]);
    return acc;
}

double KernelEvaluator::beta_tail_high1(double cap) const {
    require_positive(cap, "tail cutoff");
    double acc = 0.0;
    for (std::size_t q = 0; q < alpha_.size(); ++q)
        acc += muw_[q] * sin_over_pi_[q] * std::pow(cap, -alpha_[q]) / alpha_[q];
    return acc;
}

double KernelEvaluator::beta_tail_high2(double cap) const {
    require_positive(cap, "tail cutoff");
    double acc = 0.0;
    for (std::size_t q = 0; q < alpha_.size(); ++q)
        acc += muw_[q] * sin_over_pi_[q] * std::pow(cap, -alpha_[q] - 1.0) / (1.0 + alpha_[q]);
    return acc;
}

StieltjesRule make_stieltjes_rule(const KernelEvaluator& ke, double lambda_min, double lambda_max,
                                  int panels_per_decade, int points_per_panel,
                                  bool tail_correction) {
    if (!(lambda_min > 0.0) || !(lambda_max > lambda_min))
        throw std::invalid_argument("make_stieltjes_rule: need 0 < lambda_min < lambda_max");
    if (panels_per_decade < 1 || points_per_panel < 2)
        throw std::invalid_argument("make_stieltjes_rule: degenerate rule");
    StieltjesRule r;
    r.lambda_min = lambda_min;
    r.lambda_max = lambda_max;
    r.tail_correction = tail_correction;
    const double u0 = std::log(lambda_min), u1 = std::log(lambda_max);
    const int panels =
        std::max(1, static_cast<int>(std::ceil((u1 - u0) / std::log(10.0) * panels_per_decade)));
    // Integrate in u = ln(lambda): d lambda = lambda du keeps the integrand
    // O(1)-smooth per panel.
    for (int p = 0; p < panels; ++p) {
        const double a = u0 + (u1 - u0) * p / panels;
        const double b = u0 + (u1 - u0) * (p + 1) / panels;
        QuadratureRule g = QuadratureRule::gauss_legendre(points_per_panel, a, b);
        for (std::size_t i = 0; i < g.size(); ++i) {
            const double lam = std::exp(g.nodes[i]);
            r.lambda.push_back(lam);
            r.weight.push_back(g.weights[i] * lam * ke.eval_beta(lam));
        }
    }
    if (tail_correction) {
        r.low0 = ke.beta_tail_low0(lambda_min);
        r.low1 = ke.beta_tail_low1(lambda_min);
        r.high1 = ke.beta_tail_high1(lambda_max);
        r.high2 = ke.beta_tail_high2(lambda_max);
    }
    return r;
}

double KernelEvaluator::stieltjes_identity_residual(double x, const StieltjesRule& rule) const {
    require_positive(x, "symbol argument x");
    if (rule.lambda.empty())
        throw std::invalid_argument("stieltjes_identity_residual: empty quadrature rule");
    double acc = 0.0;
    for (std::size_t i = 0; i < rule.lambda.size(); ++i)
        acc += rule.weight[i] * x / (1.0 + rule.lambda[i] * x);
    if (rule.tail_correction) {
        // x/(1+lambda x) ~ x - lambda x^2 near 0; ~ 1/lambda - 1/(lambda^2 x)
        // at infinity.
        acc += x * rule.low0 - x * x * rule.low1;
        acc += rule.high1 - rule.high2 / x;
    }
    const double lx = eval_L(Complex(x, 0.0)).real();
    return std::abs(lx - acc);
}

double KernelEvaluator::moment_identity_residual() const {
    // Left side: -int_0^inf t k'(t)/(1+t) dt with geometric series expansions
    // of t/(1+t) on [0, eps] and [cap, inf), and direct panels between.
    const double eps = 0.5, cap = 2.0;
    const int terms = 48;
    double lhs = 0.0;
    double sign = 1.0;
    for (int m = 1; m <= terms; ++m) {
        lhs += sign * kprime_power_moment(m, 0.0, eps);
        sign = -sign;
    }
    QuadratureRule window = QuadratureRule::composite({eps, 1.0, 1.5, cap}, 24);
    lhs += window.integrate([this](double t) { return t / (1.0 + t) * (-eval_k_prime(t)); });
    // J_m = int_cap^inf t^-m (-k') dt, m >= 0; J_0 = k(cap).
    sign = 1.0;
    for (int m = 0; m <= terms; ++m) {
        double jm = 0.0;
        for (std::size_t q = 0; q < alpha_.size(); ++q)
            jm += muw_[q] * inv_gamma1_[q] * alpha_[q] * std::pow(cap, -m - alpha_[q]) /
                  (m + alpha_[q]);
        lhs += sign * jm;
        sign = -sign;
    }
    // Right side: pi int_0^1 alpha mu / (sin(alpha pi) Gamma(1-alpha)) dalpha;
    // sin_over_pi_ already divides the sine by pi, which supplies the factor.
    double rhs = 0.0;
    for (std::size_t q = 0; q < alpha_.size(); ++q)
        rhs += muw_[q] * alpha_[q] * inv_gamma1_[q] / sin_over_pi_[q];
    return std::abs(lhs - rhs);
}

double KernelEvaluator::laplace_of_k(double x) const {
    require_positive(x, "transform argument x");
    // Series near 0 (x*t small), panels through the bulk, negligible tail.
    const double eps = 0.5 / std::max(1.0, x);
    const double top = 46.0 / x;
    double acc = 0.0;
    double factor = 1.0; // (-x)^m / m!
    for (int m = 0; m <= 40; ++m) {
        acc += factor * k_power_moment(m, 0.0, eps);
        factor *= -x / (m + 1);
    }
    std::vector<double> breaks{eps};
    while (breaks.back() < top) breaks.push_back(std::min(top, breaks.back() * 1.7));
    QuadratureRule bulk = QuadratureRule::composite(breaks, 16);
    acc += bulk.integrate([this, x](double t) { return std::exp(-x * t) * eval_k(t); });
    return acc;
}

MonotoneReport KernelEvaluator::check_real_part_monotone(
    double sigma, const std::vector<double>& tau_grid) const {
    require_positive(sigma, "abscissa sigma");
    if (tau_grid.empty()) throw std::invalid_argument("check_real_part_monotone: empty grid");
    MonotoneReport rep;
    rep.start_value = eval_L(Complex(sigma, 0.0)).real();
    rep.increasing = true;
    double prev = -1e300;
    rep.min_value = 1e300;
    for (std::size_t i = 0; i < tau_grid.size(); ++i) {
        if (!(tau_grid[i] > 0.0) || (i > 0 && !(tau_grid[i] > tau_grid[i - 1])))
            throw std::invalid_argument("check_real_part_monotone: grid must be positive and "
                                        "strictly increasing");
        const double g = eval_L(Complex(sigma, tau_grid[i])).real();
        if (!(g > prev)) rep.increasing = false;
        prev = g;
        rep.min_value = std::min(rep.min_value, g);
    }
    rep.above_start = rep.min_value >= rep.start_value - 1e-12 * std::abs(rep.start_value);
    return rep;
}

} // namespace docalc
