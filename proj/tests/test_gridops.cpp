#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <vector>

#include "docalc/contour.hpp"
#include "docalc/gridops.hpp"
#include "docalc/kernels.hpp"
#include "docalc/weights.hpp"
#include "oracles.hpp"

using namespace docalc;

namespace {

const KernelEvaluator& flat() {
    static KernelEvaluator ke(WeightFunction::one());
    return ke;
}

const ContourInverter& inv() {
    static ContourInverter ci(flat(), InverterConfig{});
    return ci;
}

// Exact distributed derivative of f(t) = t under the flat weight:
// integral over orders of t^(1-a) / Gamma(2-a).
double exact_deriv_of_t(double t) {
    return oracles::integrate(
        [t](double a) { return std::pow(t, 1.0 - a) / std::tgamma(2.0 - a); }, 0.0, 1.0, 1e-13);
}

} // namespace

TEST_CASE("manual cell table reproduces exact convolutions") {
    Grid g{1.0, 4};
    const double h = g.h();
    ConvolutionOperator op;
    op.grid = g;
    op.mass.assign(4, h);                  // kernel identically one
    op.moment1.assign(4, h * h / 2.0);
    op.kernel_tag = "unit";

    SampledFunction f = sample(g, [](double t) { return t; });
    auto conv = op.apply_linear(f.values);
    auto dconv = op.apply_to_derivative(f.values);
    REQUIRE(conv.size() == 5);
    CHECK(conv[0] == 0.0);
    CHECK(dconv[0] == 0.0);
    for (int i = 1; i <= 4; ++i) {
        double t = g.node(i);
        // (1 * f)(t) = t^2/2 and (1 * f')(t) = t, both exact for linear f
        CHECK(conv[i] == doctest::Approx(t * t / 2.0).epsilon(1e-14));
        CHECK(dconv[i] == doctest::Approx(t).epsilon(1e-14));
    }

    std::vector<double> wrong(3, 0.0);
    CHECK_THROWS_AS(op.apply_linear(wrong), std::invalid_argument);
}

TEST_CASE("caputo derivative is exact on linear input") {
    Grid g{1.0, 64};
    SampledFunction f = sample(g, [](double t) { return t; });
    auto d = caputo_derivative(0.5, f);
    const double g15 = std::tgamma(1.5);
    for (int i = 1; i <= g.n; ++i) {
        double t = g.node(i);
        CHECK(d[i] == doctest::Approx(std::pow(t, 0.5) / g15).epsilon(1e-12));
    }

    SampledFunction c = sample(g, [](double) { return 3.25; });
    auto dc = caputo_derivative(0.7, c);
    for (double v : dc) CHECK(std::abs(v) <= 1e-14);

    CHECK_THROWS_AS(caputo_derivative(1.0, f), std::invalid_argument);
    CHECK_THROWS_AS(caputo_derivative(-0.1, f), std::invalid_argument);
}

TEST_CASE("convolution form matches the order-integral on linear input") {
    Grid g{1.0, 512};
    SampledFunction f = sample(g, [](double t) { return t; });
    auto d = dist_derivative_conv(flat(), f);
    for (int i : {64, 128, 256, 512}) {
        double t = g.node(i);
        CHECK(d[i] == doctest::Approx(exact_deriv_of_t(t)).epsilon(1e-8));
    }
}

TEST_CASE("the four derivative forms agree away from the endpoints") {
    Grid g{1.0, 512};
    SampledFunction f = sample(g, [](double t) { return t * t; });
    std::vector<std::vector<double>> forms;
    forms.push_back(dist_derivative_conv(flat(), f));
    forms.push_back(dist_derivative_spectral(flat(), f, 48));
    forms.push_back(dist_derivative_bp(flat(), f));
    forms.push_back(dist_derivative_def4(flat(), f));

    double worst = 0.0;
    for (int i = 0; i <= g.n; ++i) {
        double t = g.node(i);
        if (t < 0.1 || t > 0.9) continue;
        for (size_t a = 0; a < forms.size(); ++a)
            for (size_t b = a + 1; b < forms.size(); ++b) {
                double denom = std::max(std::abs(forms[a][i]), std::abs(forms[b][i]));
                worst = std::max(worst, std::abs(forms[a][i] - forms[b][i]) / denom);
            }
    }
    CHECK(worst <= 2e-2);
}

TEST_CASE("derivative form guards") {
    Grid g{1.0, 8};
    SampledFunction shifted = sample(g, [](double t) { return t + 1.0; });
    CHECK_THROWS_AS(dist_derivative_bp(flat(), shifted), std::domain_error);

    SampledFunction f = sample(g, [](double t) { return t; });
    QuadratureRule bad;
    bad.nodes = {0.5, 1.0};
    bad.weights = {0.5, 0.5};
    CHECK_THROWS_AS(dist_derivative_spectral(flat(), f, bad), std::invalid_argument);
    CHECK_THROWS_AS(dist_derivative_spectral(flat(), f, 0), std::invalid_argument);

    Grid tiny{1.0, 3};
    SampledFunction small = sample(tiny, [](double t) { return t; });
    CHECK_THROWS_AS(dist_derivative_def4(flat(), small), std::invalid_argument);

    SampledFunction mismatched;
    mismatched.grid = g;
    mismatched.values.assign(4, 0.0);
    CHECK_THROWS_AS(dist_derivative_conv(flat(), mismatched), std::invalid_argument);
}

TEST_CASE("integration inverts differentiation up to f(0)") {
    Grid g{1.0, 256};
    auto check_one = [&](auto fn) {
        SampledFunction f = sample(g, fn);
        SampledFunction d;
        d.grid = g;
        d.values = dist_derivative_conv(flat(), f);
        auto back = dist_integral(inv(), d);
        double worst = 0.0;
        for (int i = g.n / 10; i <= g.n; ++i)
            worst = std::max(worst, std::abs(back[i] - (f.values[i] - f.values[0])));
        CHECK(worst <= 3e-2);
    };
    check_one([](double t) { return t; });
    check_one([](double t) { return std::sin(t); });
    check_one([](double) { return 1.0; });
}

TEST_CASE("laplace transform pins the integral of one") {
    // At x = 1 the transform of the distributed integral of the constant one
    // equals 1/(x L(x)) = 1 exactly under the flat weight.
    Grid g{30.0, 2048};
    SampledFunction ones = sample(g, [](double) { return 1.0; });
    auto integ = dist_integral(inv(), ones);
    double h = g.h();
    double acc = 0.0;
    for (int i = 0; i <= g.n; ++i) {
        double w = (i == 0 || i == g.n) ? 0.5 : 1.0;
        acc += w * h * std::exp(-g.node(i)) * integ[i];
    }
    CHECK(acc == doctest::Approx(1.0).epsilon(2e-3));
}

TEST_CASE("eigen solver marches the convolution identity") {
    Grid g{1.0, 256};
    const double lambda = -0.5;
    SampledFunction u = solve_eigen(flat(), g, lambda, 1.0);
    REQUIRE(int(u.values.size()) == g.n + 1);
    CHECK(u.values[0] == 1.0);

    // cross-check against the integrated form u = u0 + lambda * (kappa * u)
    auto kop = kappa_convolution(inv(), g);
    auto conv = kop.apply_linear(u.values);
    double worst = 0.0;
    for (int i = 0; i <= g.n; ++i)
        worst = std::max(worst, std::abs(u.values[i] - (1.0 + lambda * conv[i])));
    CHECK(worst <= 1e-2);
}

TEST_CASE("eigen solver limit behaviours") {
    Grid g{1.0, 64};
    SampledFunction flat_u = solve_eigen(flat(), g, 0.0, 1.0);
    for (double v : flat_u.values) CHECK(v == doctest::Approx(1.0).epsilon(1e-13));

    SampledFunction dec = solve_eigen(flat(), g, -1.0, 1.0);
    for (int i = 1; i <= g.n; ++i) {
        CHECK(dec.values[i] < dec.values[i - 1]);
        CHECK(dec.values[i] > 0.0);
    }

    SampledFunction grow = solve_eigen(flat(), g, 1.0, 1.0);
    for (int i = 1; i <= g.n; ++i) CHECK(grow.values[i] > grow.values[i - 1]);

    // The implicit pivot is mass[0]/h - lambda; placing lambda exactly on the
    // discrete diagonal makes the update division degenerate and must throw.
    Grid tiny{1.0, 4};
    double diag = flat().cell_mass(0.0, tiny.h()) / tiny.h();
    CHECK_THROWS_AS(solve_eigen(flat(), tiny, diag, 1.0), std::runtime_error);
    CHECK_THROWS_AS(solve_eigen(flat(), g, 0.0, 1.0, std::vector<double>(3, 0.0)),
                    std::invalid_argument);
}

TEST_CASE("duhamel kernel solves the forced equation") {
    Grid g{1.0, 256};
    const double lambda = -0.5;
    SampledFunction f = sample(g, [](double t) { return std::sin(3.141592653589793 * t); });
    auto u = resolvent_apply(inv(), lambda, f);
    REQUIRE(int(u.size()) == g.n + 1);
    CHECK(u[0] == 0.0);

    // integrated form of D u = lambda u + f with u(0) = 0:
    // u = lambda * (kappa * u) + kappa * f
    auto kop = kappa_convolution(inv(), g);
    SampledFunction us;
    us.grid = g;
    us.values = u;
    auto ku = kop.apply_linear(u);
    auto kf = kop.apply_linear(f.values);
    double worst = 0.0;
    for (int i = 0; i <= g.n; ++i)
        worst = std::max(worst, std::abs(u[i] - (lambda * ku[i] + kf[i])));
    CHECK(worst <= 1e-2);
}

TEST_CASE("integral resolvent satisfies its defining identity") {
    Grid g{1.0, 128};
    const double lambda = -0.5;
    SampledFunction f = sample(g, [](double t) { return std::sin(3.141592653589793 * t); });
    auto w = integral_resolvent_apply(inv(), lambda, f);
    REQUIRE(int(w.size()) == g.n + 1);

    SampledFunction ws;
    ws.grid = g;
    ws.values = w;
    auto jw = dist_integral(inv(), ws);
    double worst = 0.0;
    for (int i = 0; i <= g.n; ++i)
        worst = std::max(worst, std::abs(jw[i] - lambda * w[i] - f.values[i]));
    CHECK(worst <= 2e-2);

    CHECK_THROWS_AS(integral_resolvent_apply(inv(), 0.0, f), std::domain_error);
}

TEST_CASE("finite difference weights reproduce classic stencils") {
    auto c3 = fd_weights_d1({-1.0, 0.0, 1.0});
    CHECK(c3[0] == doctest::Approx(-0.5).epsilon(1e-14));
    CHECK(c3[1] == doctest::Approx(0.0).scale(1.0).epsilon(1e-14));
    CHECK(c3[2] == doctest::Approx(0.5).epsilon(1e-14));

    auto c5 = fd_weights_d1({-2.0, -1.0, 0.0, 1.0, 2.0});
    CHECK(c5[0] == doctest::Approx(1.0 / 12.0).epsilon(1e-13));
    CHECK(c5[1] == doctest::Approx(-2.0 / 3.0).epsilon(1e-13));
    CHECK(std::abs(c5[2]) <= 1e-13);
    CHECK(c5[3] == doctest::Approx(2.0 / 3.0).epsilon(1e-13));
    CHECK(c5[4] == doctest::Approx(-1.0 / 12.0).epsilon(1e-13));

    auto fwd = fd_weights_d1({0.0, 1.0, 2.0});
    CHECK(fwd[0] == doctest::Approx(-1.5).epsilon(1e-13));
    CHECK(fwd[1] == doctest::Approx(2.0).epsilon(1e-13));
    CHECK(fwd[2] == doctest::Approx(-0.5).epsilon(1e-13));

    CHECK_THROWS_AS(fd_weights_d1({0.0}), std::invalid_argument);
}

TEST_CASE("csv io round trips bitwise") {
    Grid g{0.7, 7};
    SampledFunction f = sample(g, [](double t) { return std::sqrt(2.0) * t + 1.0 / 3.0; });
    const std::string path = "gridops_roundtrip_test.csv";
    save_csv(path, f);
    SampledFunction back = load_csv(path);
    std::remove(path.c_str());
    REQUIRE(back.values.size() == f.values.size());
    CHECK(back.grid.n == g.n);
    CHECK(back.grid.T == f.grid.T);
    for (size_t i = 0; i < f.values.size(); ++i) CHECK(back.values[i] == f.values[i]);
}

TEST_CASE("csv loader rejects malformed input") {
    auto write_file = [](const std::string& path, const std::string& body) {
        std::ofstream out(path);
        out << body;
    };
    const std::string path = "gridops_malformed_test.csv";

    write_file(path, "time,value\n0,1\n0.5,2\n");
    CHECK_THROWS_AS(load_csv(path), std::invalid_argument);

    write_file(path, "t,value\n0,1\n0.5,abc\n");
    CHECK_THROWS_AS(load_csv(path), std::invalid_argument);

    write_file(path, "t,value\n0,1\n0.5,2\n0.7,3\n");
    CHECK_THROWS_AS(load_csv(path), std::invalid_argument);

    write_file(path, "t,value\n0,1\n");
    CHECK_THROWS_AS(load_csv(path), std::invalid_argument);

    std::remove(path.c_str());
    CHECK_THROWS_AS(load_csv("no_such_file_anywhere.csv"), std::invalid_argument);
}
