#include "docalc/verify.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>

#include <json.hpp>

#include "docalc/contour.hpp"
#include "docalc/funcalc.hpp"
#include "docalc/gridops.hpp"
#include "docalc/kernels.hpp"

namespace docalc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::vector<double> log_grid(double lo, double hi, int count) {
    std::vector<double> g(count);
    for (int i = 0; i < count; ++i)
        g[i] = lo * std::pow(hi / lo, count == 1 ? 0.0 : double(i) / (count - 1));
    return g;
}

// Largest adjacent step in the forbidden direction; negative = margin.
double max_increase(const std::vector<double>& v) {
    double worst = -kInf;
    for (size_t i = 1; i < v.size(); ++i) worst = std::max(worst, v[i] - v[i - 1]);
    return worst;
}

struct Battery {
    const VerifyOptions& opt;
    std::vector<CheckResult> results;

    double tol(double base) const { return opt.tol_abs > 0.0 ? opt.tol_abs : base * opt.tol_scale; }

    void run(const std::string& name, double base_tol, const std::function<double(std::string&)>& body) {
        CheckResult r;
        r.name = name;
        r.tolerance = tol(base_tol);
        try {
            r.residual = body(r.note);
            r.passed = r.residual <= r.tolerance;
        } catch (const std::exception& ex) {
            r.residual = kInf;
            r.passed = false;
            r.note = ex.what();
        }
        results.push_back(std::move(r));
    }
};

} // namespace

std::vector<CheckResult> run_verification(const WeightFunction& w, const VerifyOptions& opt) {
    {
        const auto violations = w.validate();
        if (!violations.empty()) {
            std::string msg = "weight is not admissible:";
            for (const auto& v : violations) msg += " [" + v.code + "] " + v.detail + ";";
            throw std::invalid_argument(msg);
        }
    }
    if (opt.grid_n < 8 || opt.grid_n > 512)
        throw std::invalid_argument("verification grid order must lie in [8, 512]");

    const KernelEvaluator ke(w);
    const StieltjesRule rule =
        make_stieltjes_rule(ke, opt.lambda_min, opt.lambda_max, opt.stieltjes_panels);
    const InverterConfig cfg;
    const ContourInverter inv(ke, cfg);
    const int big_n = opt.quick ? 64 : opt.grid_n;
    const int mid_n = opt.quick ? 128 : 256;

    Battery b{opt, {}};

    b.run("kernels.stieltjes-identity", 1e-5, [&](std::string& note) {
        double worst = 0.0;
        for (double x : {0.5, 1.0, 5.0}) worst = std::max(worst, ke.stieltjes_identity_residual(x, rule));
        note = "max |L(x) - Stieltjes sum| over x in {0.5, 1, 5}";
        return worst;
    });

    b.run("kernels.moment-identity", 1e-7, [&](std::string& note) {
        note = "two independent evaluations of the first spectral moment";
        return ke.moment_identity_residual();
    });

    b.run("kernels.k-decreasing", 0.0, [&](std::string& note) {
        const auto grid = log_grid(1e-6, 1e3, 25);
        std::vector<double> k(grid.size());
        for (size_t i = 0; i < grid.size(); ++i) k[i] = ke.eval_k(grid[i]);
        note = "largest adjacent increase of k on a log grid (negative = margin)";
        return max_increase(k);
    });

    b.run("kernels.symbol-log-asymptote", 5.0, [&](std::string& note) {
        const double mu1 = w(1.0);
        double worst = 0.0;
        for (int k = 2; k <= 8; ++k) {
            const double lz = k * std::log(10.0);
            const double val = ke.eval_K(std::pow(10.0, k)).real();
            worst = std::max(worst, std::abs(val * lz - mu1) * lz);
        }
        note = "fitted constant of the 1/log z symbol expansion";
        return worst;
    });

    b.run("kernels.real-part-monotone", 0.5, [&](std::string& note) {
        const auto taus = log_grid(1.0, 100.0, 50);
        bool ok = true;
        for (double sigma : {1.0, 2.0}) ok = ok && ke.check_real_part_monotone(sigma, taus).ok();
        note = "Re L(sigma + i tau) strictly increasing in tau, sigma in {1, 2}";
        return ok ? 0.0 : 1.0;
    });

    b.run("contour.r0-contour-invariance", 1e-6, [&](std::string& note) {
        double lo = kInf, hi = -kInf;
        for (double omega : {0.6, 0.75, 0.9}) {
            for (double gamma : {0.5, 1.0, 2.0}) {
                InverterConfig c = cfg;
                c.omega = omega;
                c.gamma = gamma;
                const double v = ContourInverter(ke, c).eval_kappa(0.5);
                lo = std::min(lo, v);
                hi = std::max(hi, v);
            }
        }
        note = "relative spread of r_0(0.5) over omega x gamma";
        return (hi - lo) / std::abs(hi);
    });

    b.run("contour.closed-loop-defect", 1e-6, [&](std::string& note) {
        double worst = 0.0;
        for (double s : {0.1, 0.5}) worst = std::max(worst, inv.closed_contour_unit_defect(s));
        note = "|truncated closed-loop integral of e^{zs}|";
        return worst;
    });

    b.run("contour.kappa-decreasing", 0.0, [&](std::string& note) {
        const auto kp = inv.eval_kappa_batch(log_grid(1e-6, 0.5, 20));
        double pos_margin = kInf;
        for (double v : kp) pos_margin = std::min(pos_margin, v);
        note = pos_margin > 0.0 ? "largest adjacent increase (negative = margin)"
                                : "kappa lost positivity";
        return pos_margin > 0.0 ? max_increase(kp) : kInf;
    });

    b.run("contour.kappa-log-bound", 10.0, [&](std::string& note) {
        const auto ts = log_grid(1e-6, 1e-3, 10);
        const auto kp = inv.eval_kappa_batch(ts);
        double lo = kInf, hi = -kInf;
        for (size_t i = 0; i < ts.size(); ++i) {
            const double c = kp[i] / std::log(1.0 / ts[i]);
            lo = std::min(lo, c);
            hi = std::max(hi, c);
        }
        note = "spread of the fitted constant kappa(t)/ln(1/t) on [1e-6, 1e-3]";
        return hi / lo;
    });

    b.run("gridops.left-inverse", 3e-2, [&](std::string& note) {
        const Grid g{1.0, mid_n};
        const auto integ = kappa_convolution(inv, g);
        double worst = 0.0;
        const auto probe = [&](const std::function<double(double)>& f) {
            SampledFunction sf = sample(g, f);
            SampledFunction integrated{g, integ.apply_linear(sf.values)};
            const auto back = dist_derivative_conv(ke, integrated);
            double scale = 0.0;
            for (double v : sf.values) scale = std::max(scale, std::abs(v));
            for (int i = g.n / 10; i <= g.n; ++i)
                worst = std::max(worst, std::abs(back[i] - sf.values[i]) / scale);
        };
        probe([](double) { return 1.0; });
        probe([](double t) { return t; });
        probe([](double t) { return std::sin(t); });
        note = "max interior error of D(I f) - f over f in {1, t, sin t}";
        return worst;
    });

    b.run("gridops.derivative-agreement", 2e-2, [&](std::string& note) {
        const Grid g{1.0, opt.quick ? 256 : 512};
        const SampledFunction f = sample(g, [](double t) { return t * t; });
        const std::vector<std::vector<double>> outs = {
            dist_derivative_conv(ke, f), dist_derivative_spectral(ke, f),
            dist_derivative_bp(ke, f), dist_derivative_def4(ke, f)};
        double worst = 0.0;
        for (int i = 0; i <= g.n; ++i) {
            const double t = g.node(i);
            if (t < 0.1 || t > 0.9) continue;
            for (size_t a = 0; a < outs.size(); ++a)
                for (size_t c = a + 1; c < outs.size(); ++c)
                    worst = std::max(worst, std::abs(outs[a][i] - outs[c][i]) /
                                                std::max(std::abs(outs[a][i]), 1e-12));
        }
        note = "pairwise relative deviation of the four derivative forms, phi = t^2";
        return worst;
    });

    b.run("gridops.caputo-annihilates-constants", 1e-14, [&](std::string& note) {
        const Grid g{1.0, 64};
        const auto out = caputo_derivative(0.5, sample(g, [](double) { return 3.5; }));
        double worst = 0.0;
        for (double v : out) worst = std::max(worst, std::abs(v));
        note = "single-order derivative of a constant";
        return worst;
    });

    b.run("gridops.relaxation-monotone", 1e-12, [&](std::string& note) {
        const Grid g{1.0, 128};
        const auto flat = solve_eigen(ke, g, 0.0, 1.0);
        const auto decay = solve_eigen(ke, g, -1.0, 1.0);
        double worst = 0.0;
        for (double v : flat.values) worst = std::max(worst, std::abs(v - 1.0));
        worst = std::max(worst, max_increase(decay.values));
        for (double v : decay.values) worst = std::max(worst, -v);
        note = "lambda = 0 stays constant; lambda = -1 decays and stays positive";
        return worst;
    });

    b.run("funcalc.exact-pairing", 1e-12, [&](std::string& note) {
        double worst = 0.0;
        for (int n : {16, 64, big_n}) {
            const Grid g{1.0, n};
            const auto prod = mat_mul(scaled(build_A(g), -1.0), build_J(g));
            worst = std::max(worst, frobenius_norm(mat_add(prod, TriangularMatrix::identity(n, g.h()), -1.0)));
        }
        note = "|| (-A) J - Id ||_F over n in {16, 64, " + std::to_string(big_n) + "}";
        return worst;
    });

    b.run("funcalc.accretive-quadrature", 1e-12, [&](std::string& note) {
        double worst = 0.0;
        for (int n : {16, 64, 128}) {
            const Grid g{1.0, n};
            worst = std::max(worst, -min_symmetric_eigenvalue(build_J(g)));
        }
        note = "negative part of min eig(J + J^T)";
        return worst;
    });

    b.run("funcalc.resolvent-norm-bound", 1e-10, [&](std::string& note) {
        const Grid g{1.0, 64};
        const auto a = build_A(g);
        double worst = -kInf;
        for (double lam : {0.5, 1.0, 10.0}) {
            const auto shifted = mat_add(a, TriangularMatrix::identity(g.n, g.h()), -lam);
            worst = std::max(worst, lam * operator_norm(tri_inverse(shifted)) - 1.0);
        }
        note = "lambda ||(A - lambda)^{-1}|| - 1 (negative = margin)";
        return worst;
    });

    b.run("funcalc.hirsch-scalar-symbol", 1e-5, [&](std::string& note) {
        double worst = 0.0;
        for (double x : {0.5, 1.0, 5.0}) {
            TriangularMatrix v = TriangularMatrix::identity(1, 1.0);
            v.at(0, 0) = x;
            const double got = hirsch_apply(v, rule).at(0, 0);
            const double want = ke.eval_L(Complex(x, 0.0)).real();
            worst = std::max(worst, std::abs(got - want) / std::abs(want));
        }
        note = "1x1 functional calculus against the symbol L";
        return worst;
    });

    b.run("funcalc.inversion-identity", 5e-2, [&](std::string& note) {
        const Grid g{1.0, big_n};
        const ResidualReport rep = verify_inversion_identity(ke, g, rule, cfg);
        note = "|| H(-A_h)^{-1} - kappa matrix || / || kappa matrix || at n = " +
               std::to_string(rep.n);
        if (!rep.note.empty()) note += "; " + rep.note;
        return rep.residual;
    });

    b.run("funcalc.semigroup-decay", 0.0, [&](std::string& note) {
        const Grid g{1.0, 64};
        const DecayReport rep = semigroup_decay_report(g, rule, {5.0, 10.0, 20.0});
        note = "largest adjacent increase of ln||e^{-tG}||/t (negative = margin)";
        return max_increase(rep.log_norm_over_t);
    });

    b.run("funcalc.hirsch-linearity", 1e-13, [&](std::string& note) {
        const Grid g{1.0, 32};
        const auto m = hirsch_apply(scaled(build_A(g), -1.0), rule);
        std::vector<double> x(g.n), y(g.n), xy(g.n);
        for (int i = 0; i < g.n; ++i) {
            x[i] = std::sin(3.0 * (i + 1));
            y[i] = 1.0 / (1.0 + i);
            xy[i] = x[i] + y[i];
        }
        const auto mx = mat_vec(m, x), my = mat_vec(m, y), mxy = mat_vec(m, xy);
        double num = 0.0, den = 0.0;
        for (int i = 0; i < g.n; ++i) {
            num = std::max(num, std::abs(mxy[i] - mx[i] - my[i]));
            den = std::max(den, std::abs(mxy[i]));
        }
        note = "H(V)(x + y) against H(V)x + H(V)y";
        return num / den;
    });

    return b.results;
}

bool all_passed(const std::vector<CheckResult>& results) {
    for (const auto& r : results)
        if (!r.passed) return false;
    return true;
}

std::string results_to_json(const std::vector<CheckResult>& results) {
    nlohmann::ordered_json doc;
    doc["checks"] = nlohmann::ordered_json::array();
    int passed = 0;
    for (const auto& r : results) {
        nlohmann::ordered_json c;
        c["name"] = r.name;
        c["passed"] = r.passed;
        c["residual"] = r.residual;
        c["tolerance"] = r.tolerance;
        c["note"] = r.note;
        doc["checks"].push_back(std::move(c));
        if (r.passed) ++passed;
    }
    doc["summary"]["passed"] = passed;
    doc["summary"]["total"] = static_cast<int>(results.size());
    doc["summary"]["all_passed"] = passed == static_cast<int>(results.size());
    return doc.dump(2) + "\n";
}

} // namespace docalc
