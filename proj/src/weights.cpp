#include "docalc/weights.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace docalc {

WeightFunction WeightFunction::constant(double c) {
    WeightFunction w;
    w.kind_ = WeightKind::constant;
    w.c_ = c;
    w.mu1_ = c;
    return w;
}

WeightFunction WeightFunction::power_at_zero(double a, double nu,
                                             std::function<double(double)> profile) {
    if (!profile) throw std::invalid_argument("power_at_zero: profile is empty");
    WeightFunction w;
    w.kind_ = WeightKind::power_at_zero;
    w.profile_ = std::move(profile);
    w.zero_ = ZeroBehavior{true, a, nu};
    w.mu1_ = w.profile_(1.0);
    return w;
}

WeightFunction WeightFunction::tabulated(const std::vector<std::pair<double, double>>& samples) {
    if (samples.size() < 3)
        throw std::invalid_argument("tabulated: need at least three samples");
    const std::size_t n = samples.size();
    if (std::abs(samples.front().first) > 1e-12 || std::abs(samples.back().first - 1.0) > 1e-12)
        throw std::invalid_argument("tabulated: samples must span [0, 1]");
    for (std::size_t i = 0; i + 1 < n; ++i)
        if (!(samples[i + 1].first > samples[i].first))
            throw std::invalid_argument("tabulated: sample abscissas must be strictly increasing");

    WeightFunction w;
    w.kind_ = WeightKind::tabulated;
    w.sx_.resize(n);
    w.sy_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        w.sx_[i] = samples[i].first;
        w.sy_[i] = samples[i].second;
    }
    w.sx_.front() = 0.0;
    w.sx_.back() = 1.0;

    // Natural cubic spline second derivatives via the Thomas algorithm.
    w.sd2_.assign(n, 0.0);
    std::vector<double> c(n, 0.0), d(n, 0.0);
    for (std::size_t i = 1; i + 1 < n; ++i) {
        const double hl = w.sx_[i] - w.sx_[i - 1];
        const double hr = w.sx_[i + 1] - w.sx_[i];
        const double rhs = 6.0 * ((w.sy_[i + 1] - w.sy_[i]) / hr - (w.sy_[i] - w.sy_[i - 1]) / hl);
        const double diag = 2.0 * (hl + hr) - hl * c[i - 1];
        c[i] = hr / diag;
        d[i] = (rhs - hl * d[i - 1]) / diag;
    }
    for (std::size_t i = n - 2; i >= 1; --i) w.sd2_[i] = d[i] - c[i] * w.sd2_[i + 1];

    w.mu1_ = w.sy_.back();
    return w;
}

WeightFunction WeightFunction::one() { return constant(1.0); }

WeightFunction WeightFunction::linear() {
    return power_at_zero(1.0, 1.0, [](double a) { return a; });
}

WeightFunction WeightFunction::bump(double eps) {
    WeightFunction w;
    w.kind_ = WeightKind::power_at_zero;
    w.profile_ = [eps](double a) { return 6.0 * a * (1.0 - a) + eps; };
    w.zero_ = ZeroBehavior{}; // positive at zero (eps > 0 intended)
    w.mu1_ = eps;
    return w;
}

double WeightFunction::spline_eval(double x) const {
    const auto it = std::upper_bound(sx_.begin(), sx_.end(), x);
    std::size_t i = it == sx_.begin() ? 0 : static_cast<std::size_t>(it - sx_.begin()) - 1;
    if (i + 1 >= sx_.size()) i = sx_.size() - 2;
    const double h = sx_[i + 1] - sx_[i];
    const double u = (sx_[i + 1] - x) / h;
    const double v = (x - sx_[i]) / h;
    return u * sy_[i] + v * sy_[i + 1] +
           ((u * u * u - u) * sd2_[i] + (v * v * v - v) * sd2_[i + 1]) * h * h / 6.0;
}

double WeightFunction::operator()(double alpha) const {
    if (!(alpha >= 0.0) || !(alpha <= 1.0))
        throw std::domain_error("weight evaluated outside [0, 1]");
    switch (kind_) {
        case WeightKind::constant: return c_;
        case WeightKind::power_at_zero: return profile_(alpha);
        case WeightKind::tabulated: return spline_eval(alpha);
    }
    return 0.0;
}

std::vector<WeightViolation> WeightFunction::validate(int sample_count) const {
    std::vector<WeightViolation> out;
    if (sample_count < 2) sample_count = 2;

    double min_value = 0.0, min_alpha = 0.0, max_abs = 0.0;
    for (int i = 0; i < sample_count; ++i) {
        const double a = static_cast<double>(i) / (sample_count - 1);
        const double v = (*this)(a);
        max_abs = std::max(max_abs, std::abs(v));
        if (v < min_value) {
            min_value = v;
            min_alpha = a;
        }
    }
    const double scale = max_abs > 0.0 ? max_abs : 1.0;
    if (min_value < -1e-12 * scale) {
        std::ostringstream msg;
        msg << "mu(" << min_alpha << ") = " << min_value << " < 0";
        out.push_back({"negative", msg.str()});
    }
    if (!(mu1_ > 1e-12 * scale)) {
        std::ostringstream msg;
        msg << "mu(1) = " << mu1_ << "; the calculus requires mu(1) > 0";
        out.push_back({"mu(1)=0", msg.str()});
    }
    if (zero_.power_law) {
        for (double a : {1e-2, 1e-3}) {
            const double expect = zero_.a * std::pow(a, zero_.nu);
            const double got = (*this)(a);
            if (!(std::abs(got - expect) <= 0.25 * std::abs(expect))) {
                std::ostringstream msg;
                msg << "declared mu ~ " << zero_.a << " * alpha^" << zero_.nu << " near 0 but mu("
                    << a << ") = " << got << " (expected ~" << expect << ")";
                out.push_back({"zero_behavior", msg.str()});
                break;
            }
        }
    }
    return out;
}

WeightFunction weight_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw std::invalid_argument(std::string("weight spec is not valid JSON: ") + e.what());
    }
    const std::string kind = j.value("kind", "");
    if (kind == "constant") return WeightFunction::constant(j.value("c", 1.0));
    if (kind == "one") return WeightFunction::one();
    if (kind == "linear") return WeightFunction::linear();
    if (kind == "bump") return WeightFunction::bump(j.value("eps", 0.05));
    if (kind == "power_at_zero") {
        const double a = j.value("a", 1.0);
        const double nu = j.value("nu", 1.0);
        return WeightFunction::power_at_zero(
            a, nu, [a, nu](double x) { return a * std::pow(x, nu); });
    }
    if (kind == "tabulated") {
        if (!j.contains("samples") || !j["samples"].is_array())
            throw std::invalid_argument("tabulated weight spec needs a \"samples\" array");
        std::vector<std::pair<double, double>> samples;
        for (const auto& row : j["samples"]) {
            if (!row.is_array() || row.size() != 2)
                throw std::invalid_argument("tabulated samples must be [alpha, value] pairs");
            samples.emplace_back(row[0].get<double>(), row[1].get<double>());
        }
        return WeightFunction::tabulated(samples);
    }
    throw std::invalid_argument("unknown weight kind: \"" + kind + "\"");
}

WeightFunction weight_from_spec(const std::string& text_or_path) {
    const auto first = text_or_path.find_first_not_of(" \t\r\n");
    if (first != std::string::npos && text_or_path[first] == '{')
        return weight_from_json(text_or_path);
    std::ifstream in(text_or_path);
    if (!in) throw std::invalid_argument("cannot open weight file: " + text_or_path);
    std::stringstream buf;
    buf << in.rdbuf();
    return weight_from_json(buf.str());
}

} // namespace docalc
