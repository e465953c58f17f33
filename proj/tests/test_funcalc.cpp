#include <doctest.h>

#include <cmath>
#include <vector>

#include "docalc/funcalc.hpp"
#include "docalc/kernels.hpp"
#include "docalc/weights.hpp"

using namespace docalc;

namespace {

const KernelEvaluator& flat() {
    static KernelEvaluator ke(WeightFunction::one());
    return ke;
}

double max_abs_diff(const TriangularMatrix& x, const TriangularMatrix& y) {
    double worst = 0.0;
    for (size_t i = 0; i < x.a.size(); ++i) worst = std::max(worst, std::abs(x.a[i] - y.a[i]));
    return worst;
}

TriangularMatrix dense_stieltjes_sum(const TriangularMatrix& v, const StieltjesRule& rule) {
    TriangularMatrix id = TriangularMatrix::identity(v.n, v.h);
    TriangularMatrix acc = TriangularMatrix::zero(v.n, v.h);
    for (size_t q = 0; q < rule.lambda.size(); ++q) {
        TriangularMatrix shift = mat_add(id, v, rule.lambda[q]);
        TriangularMatrix term = mat_mul(v, tri_inverse(shift));
        acc = mat_add(acc, term, rule.weight[q]);
    }
    if (rule.tail_correction) {
        acc = mat_add(acc, v, rule.low0);
        acc = mat_add(acc, mat_mul(v, v), -rule.low1);
        acc = mat_add(acc, id, rule.high1);
        acc = mat_add(acc, tri_inverse(v), -rule.high2);
    }
    return acc;
}

} // namespace

TEST_CASE("backward difference matrix on two cells") {
    TriangularMatrix a = build_A(Grid{1.0, 2});
    REQUIRE(a.n == 2);
    CHECK(a.at(0, 0) == doctest::Approx(-2.0).epsilon(1e-15));
    CHECK(a.at(0, 1) == 0.0);
    CHECK(a.at(1, 0) == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(a.at(1, 1) == doctest::Approx(-2.0).epsilon(1e-15));
}

TEST_CASE("rectangle quadrature is the exact inverse of the difference matrix") {
    for (int n : {2, 16, 128}) {
        Grid g{1.0, n};
        TriangularMatrix p = mat_mul(scaled(build_A(g), -1.0), build_J(g));
        CHECK(max_abs_diff(p, TriangularMatrix::identity(n, g.h())) <= 1e-13);
    }
}

TEST_CASE("trapezoid quadrature integrates linear functions exactly") {
    Grid g{1.0, 32};
    TriangularMatrix j = build_J(g, true);
    std::vector<double> v(g.n);
    for (int i = 0; i < g.n; ++i) v[i] = g.node(i + 1);
    auto integ = mat_vec(j, v);
    for (int i = 0; i < g.n; ++i) {
        double t = g.node(i + 1);
        CHECK(integ[i] == doctest::Approx(t * t / 2.0).epsilon(1e-14));
    }
}

TEST_CASE("resolvent kernel matches the algebraic inverse to first order") {
    Grid g{1.0, 256};
    const double lambda = 1.0;
    TriangularMatrix kern = resolvent_A_kernel(lambda, g);
    TriangularMatrix alg =
        tri_inverse(mat_add(build_A(g), TriangularMatrix::identity(g.n, g.h()), -lambda));
    CHECK(max_abs_diff(kern, alg) <= 5.0 * g.h());
    // spot check the closed form of the kernel entries
    CHECK(kern.at(10, 10) == doctest::Approx(-g.h()).epsilon(1e-14));
    CHECK(kern.at(12, 10) ==
          doctest::Approx(-g.h() * std::exp(-lambda * g.h() * 2.0)).epsilon(1e-14));
}

TEST_CASE("toeplitz assembly from cell masses") {
    Grid g{1.0, 4};
    std::vector<double> mass(4, g.h());
    TriangularMatrix m = conv_toeplitz(mass, g);
    CHECK(max_abs_diff(m, build_J(g)) == 0.0);
    CHECK_THROWS_AS(conv_toeplitz(std::vector<double>(3, 0.1), g), std::invalid_argument);
}

TEST_CASE("norms and eigen bounds on closed forms") {
    TriangularMatrix m = TriangularMatrix::zero(2, 1.0);
    m.at(0, 0) = 3.0;
    m.at(1, 0) = 4.0;
    m.at(1, 1) = 3.0;
    CHECK(frobenius_norm(m) == doctest::Approx(std::sqrt(34.0)).epsilon(1e-14));
    // largest singular value of [[3,0],[4,3]]
    CHECK(operator_norm(m) == doctest::Approx(std::sqrt((34.0 + std::sqrt(832.0)) / 2.0))
                                  .epsilon(1e-12));
    CHECK(operator_norm(TriangularMatrix::identity(5, 0.3)) == doctest::Approx(1.0).epsilon(1e-12));

    TriangularMatrix d = TriangularMatrix::zero(2, 1.0);
    d.at(0, 0) = 1.0;
    d.at(1, 1) = 2.0;
    CHECK(min_symmetric_eigenvalue(d) == doctest::Approx(2.0).epsilon(1e-12));

    // the cumulative quadrature is accretive: its symmetrization stays psd
    CHECK(min_symmetric_eigenvalue(build_J(Grid{1.0, 64})) >= -1e-12);
}

TEST_CASE("matrix exponential against closed forms") {
    TriangularMatrix s = TriangularMatrix::zero(1, 1.0);
    s.at(0, 0) = 0.8;
    CHECK(mat_exp_neg(s, 2.5).at(0, 0) == doctest::Approx(std::exp(-2.0)).epsilon(1e-12));

    TriangularMatrix g2 = TriangularMatrix::zero(2, 1.0);
    g2.at(0, 0) = 1.0;
    g2.at(1, 1) = 1.0;
    g2.at(1, 0) = 3.0;
    TriangularMatrix e = mat_exp_neg(g2, 0.7);
    const double f = std::exp(-0.7);
    CHECK(e.at(0, 0) == doctest::Approx(f).epsilon(1e-12));
    CHECK(e.at(1, 1) == doctest::Approx(f).epsilon(1e-12));
    CHECK(e.at(1, 0) == doctest::Approx(-2.1 * f).epsilon(1e-12));
    CHECK(e.at(0, 1) == 0.0);

    CHECK(max_abs_diff(mat_exp_neg(g2, 0.0), TriangularMatrix::identity(2, 1.0)) <= 1e-15);
}

TEST_CASE("triangular solve and inverse") {
    const int n = 16;
    TriangularMatrix m = TriangularMatrix::zero(n, 1.0);
    for (int i = 0; i < n; ++i) {
        m.at(i, i) = 2.0 + (i % 3);
        for (int j = 0; j < i; ++j) m.at(i, j) = 1.0 / (1.0 + i + j);
    }
    TriangularMatrix minv = tri_inverse(m);
    CHECK(max_abs_diff(mat_mul(m, minv), TriangularMatrix::identity(n, 1.0)) <= 1e-11);

    std::vector<double> b(n);
    for (int i = 0; i < n; ++i) b[i] = std::sin(1.0 + i);
    auto x = tri_solve(m, b);
    auto x2 = mat_vec(minv, b);
    for (int i = 0; i < n; ++i) CHECK(x[i] == doctest::Approx(x2[i]).epsilon(1e-11));

    TriangularMatrix sing = m;
    sing.at(7, 7) = 0.0;
    CHECK_THROWS_AS(tri_solve(sing, b), std::runtime_error);
    CHECK_THROWS_AS(tri_inverse(sing), std::runtime_error);

    CHECK_THROWS_AS(mat_mul(m, TriangularMatrix::identity(4, 1.0)), std::invalid_argument);
}

TEST_CASE("functional calculus matches a dense evaluation of the rule") {
    Grid g{1.0, 16};
    StieltjesRule rule = make_stieltjes_rule(flat(), 1e-4, 1e4, 2, 4);

    // bidiagonal fast path
    TriangularMatrix b = scaled(build_A(g), -1.0);
    CHECK(max_abs_diff(hirsch_apply(b, rule), dense_stieltjes_sum(b, rule)) <= 1e-9);

    // uniform triangle fast path
    TriangularMatrix j = build_J(g);
    CHECK(max_abs_diff(hirsch_apply(j, rule), dense_stieltjes_sum(j, rule)) <= 1e-9);

    // general lower-triangular path
    TriangularMatrix w = TriangularMatrix::zero(8, 1.0);
    for (int i = 0; i < 8; ++i) {
        w.at(i, i) = 1.0 + 0.1 * i;
        for (int k = 0; k < i; ++k) w.at(i, k) = 0.05 * (1 + ((i + k) % 4));
    }
    CHECK(max_abs_diff(hirsch_apply(w, rule), dense_stieltjes_sum(w, rule)) <= 1e-9);
}

TEST_CASE("scalar functional calculus reproduces the symbol") {
    StieltjesRule rule = make_stieltjes_rule(flat());
    for (double x : {0.5, 1.0, 2.0}) {
        TriangularMatrix v = TriangularMatrix::zero(1, 1.0);
        v.at(0, 0) = x;
        double sym = flat().eval_L(Complex(x, 0.0)).real();
        CHECK(hirsch_apply(v, rule).at(0, 0) == doctest::Approx(sym).epsilon(2e-5));
    }
}

TEST_CASE("functional calculus guards") {
    TriangularMatrix v = TriangularMatrix::identity(2, 1.0);
    StieltjesRule bad;
    bad.lambda = {0.0};
    bad.weight = {1.0};
    CHECK_THROWS_AS(hirsch_apply(v, bad), std::invalid_argument);

    StieltjesRule one_node;
    one_node.lambda = {1.0};
    one_node.weight = {1.0};
    one_node.tail_correction = false;
    TriangularMatrix neg = TriangularMatrix::zero(1, 1.0);
    neg.at(0, 0) = -1.0;  // I + lambda V vanishes at lambda = 1
    CHECK_THROWS_AS(hirsch_apply(neg, one_node), std::runtime_error);
}

TEST_CASE("inversion identity residual stays small") {
    Grid g{1.0, 64};
    StieltjesRule rule = make_stieltjes_rule(flat());
    ResidualReport rep = verify_inversion_identity(flat(), g, rule, InverterConfig{});
    CHECK(rep.n == 64);
    CHECK(rep.rule_nodes == int(rule.size()));
    CHECK(rep.denominator > 0.0);
    CHECK(rep.residual <= 0.15);
}

TEST_CASE("semigroup norms decay faster than exponentially") {
    Grid g{1.0, 32};
    StieltjesRule rule = make_stieltjes_rule(flat());
    DecayReport rep = semigroup_decay_report(g, rule, {5.0, 10.0, 20.0});
    REQUIRE(rep.t.size() == 3);
    REQUIRE(rep.log_norm_over_t.size() == 3);
    CHECK(rep.strictly_decreasing);
    for (double v : rep.log_norm_over_t) CHECK(v < 0.0);
    CHECK(rep.log_norm_over_t[1] < rep.log_norm_over_t[0]);
    CHECK(rep.log_norm_over_t[2] < rep.log_norm_over_t[1]);
}
