#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>

#include <doctest.h>

#include "docalc/weights.hpp"

using docalc::WeightFunction;

namespace {

bool has_violation(const std::vector<docalc::WeightViolation>& v, const std::string& code) {
    for (const auto& x : v)
        if (x.code == code) return true;
    return false;
}

} // namespace

TEST_CASE("constant weight") {
    const auto w = WeightFunction::constant(2.5);
    CHECK(w(0.0) == 2.5);
    CHECK(w(0.7) == 2.5);
    CHECK(w.mu_at_one() == 2.5);
    CHECK(w.validate().empty());
    CHECK(has_violation(WeightFunction::constant(-1.0).validate(), "negative"));
    CHECK(has_violation(WeightFunction::constant(0.0).validate(), "mu(1)=0"));
}

TEST_CASE("bundled presets") {
    const auto one = WeightFunction::one();
    CHECK(one(0.3) == 1.0);
    CHECK(one.validate().empty());

    const auto lin = WeightFunction::linear();
    CHECK(lin(0.25) == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(lin.mu_at_one() == doctest::Approx(1.0));
    CHECK(lin.zero_behavior().power_law);
    CHECK(lin.zero_behavior().nu == doctest::Approx(1.0));
    CHECK(lin.validate().empty());

    const auto bump = WeightFunction::bump(0.05);
    CHECK(bump(0.5) == doctest::Approx(6.0 * 0.25 + 0.05).epsilon(1e-15));
    CHECK(bump.mu_at_one() == doctest::Approx(0.05).epsilon(1e-12));
    CHECK(bump.validate().empty());
    CHECK(has_violation(WeightFunction::bump(0.0).validate(), "mu(1)=0"));
}

TEST_CASE("domain guard") {
    const auto w = WeightFunction::one();
    CHECK_THROWS_AS(w(-0.1), std::domain_error);
    CHECK_THROWS_AS(w(1.1), std::domain_error);
}

TEST_CASE("tabulated weight interpolates its samples") {
    const auto w = WeightFunction::tabulated({{0.0, 1.0}, {0.25, 1.25}, {0.5, 1.5}, {0.75, 1.75}, {1.0, 2.0}});
    // natural cubic spline through collinear points is the line itself
    CHECK(w(0.0) == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(w(0.6) == doctest::Approx(1.6).epsilon(1e-13));
    CHECK(w(1.0) == doctest::Approx(2.0).epsilon(1e-13));
    CHECK(w.validate().empty());

    CHECK_THROWS_AS(WeightFunction::tabulated({{0.0, 1.0}, {1.0, 2.0}}), std::invalid_argument);
    CHECK_THROWS_AS(WeightFunction::tabulated({{0.1, 1.0}, {0.5, 1.0}, {1.0, 2.0}}),
                    std::invalid_argument);
    CHECK_THROWS_AS(WeightFunction::tabulated({{0.0, 1.0}, {0.5, 1.0}, {0.4, 1.0}, {1.0, 2.0}}),
                    std::invalid_argument);
}

TEST_CASE("declared zero behavior is checked") {
    // claims mu ~ alpha but is actually quadratic near zero
    const auto wrong = WeightFunction::power_at_zero(1.0, 1.0, [](double a) { return a * a; });
    CHECK(has_violation(wrong.validate(), "zero_behavior"));
    const auto right = WeightFunction::power_at_zero(1.0, 1.0, [](double a) { return a; });
    CHECK(right.validate().empty());
}

TEST_CASE("json weight specs") {
    CHECK(docalc::weight_from_json(R"({"kind":"one"})")(0.4) == 1.0);
    CHECK(docalc::weight_from_json(R"({"kind":"constant","c":3.0})")(0.9) == 3.0);
    const auto pw = docalc::weight_from_json(R"({"kind":"power_at_zero","a":2.0,"nu":0.5})");
    CHECK(pw(0.25) == doctest::Approx(2.0 * 0.5).epsilon(1e-13));
    const auto tab = docalc::weight_from_json(R"({"kind":"tabulated","samples":[[0,1],[0.5,1.5],[1,2]]})");
    CHECK(tab(1.0) == doctest::Approx(2.0).epsilon(1e-13));
    CHECK(docalc::weight_from_json(R"({"kind":"bump","eps":0.1})")(1.0) ==
          doctest::Approx(0.1).epsilon(1e-12));

    CHECK_THROWS_AS(docalc::weight_from_json("not json"), std::invalid_argument);
    CHECK_THROWS_AS(docalc::weight_from_json(R"({"kind":"mystery"})"), std::invalid_argument);
    CHECK_THROWS_AS(docalc::weight_from_json(R"({"kind":"tabulated"})"), std::invalid_argument);
}

TEST_CASE("weight spec accepts a file path") {
    const std::string path = "weight_spec_test.json";
    {
        std::ofstream out(path);
        out << R"({"kind":"constant","c":1.5})";
    }
    const auto w = docalc::weight_from_spec(path);
    CHECK(w(0.2) == 1.5);
    std::remove(path.c_str());
    CHECK_THROWS_AS(docalc::weight_from_spec("no_such_file_here.json"), std::invalid_argument);
}
