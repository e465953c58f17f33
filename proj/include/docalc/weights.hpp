#pragma once

#include <functional>
#include <string>
#include <utility>
#include <vector>

namespace docalc {

enum class WeightKind { constant, power_at_zero, tabulated };

// Declared behavior of the weight near alpha = 0. When power_law is set the
// weight is expected to satisfy mu(alpha)/(a * alpha^nu) -> 1 as alpha -> 0.
struct ZeroBehavior {
    bool power_law = false;
    double a = 0.0;
    double nu = 0.0;
};

struct WeightViolation {
    std::string code;   // "negative", "mu(1)=0", "zero_behavior"
    std::string detail;
};

// Weight function mu on [0,1] defining the order mixture. Immutable after
// construction; evaluation is pure and safe to call concurrently.
class WeightFunction {
public:
    // mu == c.
    static WeightFunction constant(double c);
    // mu(alpha) = profile(alpha), declared to behave like a * alpha^nu near 0.
    static WeightFunction power_at_zero(double a, double nu,
                                        std::function<double(double)> profile);
    // Natural cubic spline through (alpha, mu) samples; alpha strictly
    // increasing and spanning [0, 1].
    static WeightFunction tabulated(const std::vector<std::pair<double, double>>& samples);

    // Bundled weights used by tests and CLI presets.
    static WeightFunction one();             // mu == 1
    static WeightFunction linear();          // mu(alpha) = alpha
    static WeightFunction bump(double eps);  // mu(alpha) = 6 alpha (1 - alpha) + eps

    // Value at alpha; alpha outside [0,1] is a domain error.
    double operator()(double alpha) const;

    WeightKind kind() const { return kind_; }
    double mu_at_one() const { return mu1_; }
    const ZeroBehavior& zero_behavior() const { return zero_; }

    // Checks nonnegativity on a dense grid, mu(1) > 0, and the declared
    // behavior at 0. Never throws; an admissible weight yields an empty list.
    std::vector<WeightViolation> validate(int sample_count = 10000) const;

private:
    WeightFunction() = default;

    WeightKind kind_ = WeightKind::constant;
    double c_ = 1.0;
    std::function<double(double)> profile_;
    ZeroBehavior zero_;
    double mu1_ = 1.0;

    // natural cubic spline data (tabulated kind)
    std::vector<double> sx_, sy_, sd2_;
    double spline_eval(double x) const;
};

// Parses a weight spec:
//   {"kind":"constant","c":1.0}
//   {"kind":"power_at_zero","a":1.0,"nu":1.0}        (mu = a * alpha^nu)
//   {"kind":"tabulated","samples":[[0,1],[0.5,1.5],[1,2]]}
//   {"kind":"bump","eps":0.05}
//   {"kind":"one"}
WeightFunction weight_from_json(const std::string& text);

// Accepts inline JSON or a path to a JSON file.
WeightFunction weight_from_spec(const std::string& text_or_path);

} // namespace docalc
