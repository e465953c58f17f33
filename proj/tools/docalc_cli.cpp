// Batch front end: kernel tables, operator application on CSV samples,
// relaxation solves, and the verification battery. CSV numbers are printed
// with 17 significant digits and LF endings so outputs diff cleanly.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "docalc/contour.hpp"
#include "docalc/funcalc.hpp"
#include "docalc/grid.hpp"
#include "docalc/gridops.hpp"
#include "docalc/kernels.hpp"
#include "docalc/verify.hpp"
#include "docalc/weights.hpp"

namespace {

using docalc::ContourInverter;
using docalc::Grid;
using docalc::InverterConfig;
using docalc::KernelEvaluator;
using docalc::SampledFunction;
using docalc::WeightFunction;

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::vector<double> log_grid(double lo, double hi, int count) {
    std::vector<double> g(count);
    for (int i = 0; i < count; ++i)
        g[i] = lo * std::pow(hi / lo, count == 1 ? 0.0 : double(i) / (count - 1));
    return g;
}

// Writes either to a file or to stdout; CSV and JSON reports both go
// through here so the byte format is identical in both directions.
class Sink {
public:
    explicit Sink(const std::string& path) {
        if (path.empty()) {
            os_ = &std::cout;
        } else {
            file_.open(path, std::ios::binary);
            if (!file_) throw std::invalid_argument("cannot open output file: " + path);
            os_ = &file_;
        }
    }
    bool to_file() const { return os_ != &std::cout; }
    std::ostream& os() { return *os_; }
    void row(const std::vector<double>& vals) {
        for (size_t i = 0; i < vals.size(); ++i) {
            if (i) *os_ << ',';
            *os_ << fmt(vals[i]);
        }
        *os_ << '\n';
    }

private:
    std::ofstream file_;
    std::ostream* os_ = nullptr;
};

struct RunConfig {
    std::string weight_spec = R"({"kind":"one"})";
    double grid_T = 1.0;
    int grid_n = 256;
    InverterConfig contour;
    double lambda_min = 1e-8;
    double lambda_max = 1e8;
    int stieltjes_panels = 4;
    double tol_scale = 1.0;
    double tol_abs = 0.0;
    std::string out_path;
};

void apply_config_file(RunConfig& rc, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open config file: " + path);
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& ex) {
        throw std::invalid_argument("config file is not valid JSON: " + std::string(ex.what()));
    }
    try {
        if (doc.contains("weight"))
            rc.weight_spec = doc["weight"].is_string() ? doc["weight"].get<std::string>()
                                                       : doc["weight"].dump();
        if (doc.contains("grid")) {
            const auto& g = doc["grid"];
            if (g.contains("T")) rc.grid_T = g["T"].get<double>();
            if (g.contains("n")) rc.grid_n = g["n"].get<int>();
        }
        if (doc.contains("contour")) {
            const auto& c = doc["contour"];
            if (c.contains("gamma")) rc.contour.gamma = c["gamma"].get<double>();
            if (c.contains("omega")) rc.contour.omega = c["omega"].get<double>();
            if (c.contains("truncation_tol"))
                rc.contour.truncation_tol = c["truncation_tol"].get<double>();
        }
        if (doc.contains("stieltjes")) {
            const auto& s = doc["stieltjes"];
            if (s.contains("lambda_min")) rc.lambda_min = s["lambda_min"].get<double>();
            if (s.contains("lambda_max")) rc.lambda_max = s["lambda_max"].get<double>();
            if (s.contains("panels")) rc.stieltjes_panels = s["panels"].get<int>();
        }
        if (doc.contains("tolerances")) {
            const auto& t = doc["tolerances"];
            if (t.contains("scale")) rc.tol_scale = t["scale"].get<double>();
            if (t.contains("abs")) rc.tol_abs = t["abs"].get<double>();
        }
        if (doc.contains("output") && doc["output"].contains("path"))
            rc.out_path = doc["output"]["path"].get<std::string>();
    } catch (const nlohmann::json::exception& ex) {
        throw std::invalid_argument("config field has the wrong type: " + std::string(ex.what()));
    }
}

WeightFunction make_weight(const RunConfig& rc) {
    WeightFunction w = docalc::weight_from_spec(rc.weight_spec);
    const auto violations = w.validate();
    if (!violations.empty()) {
        std::string msg = "weight is not admissible:";
        for (const auto& v : violations) msg += "\n  [" + v.code + "] " + v.detail;
        throw std::invalid_argument(msg);
    }
    return w;
}

Grid make_grid(const RunConfig& rc) {
    if (rc.grid_n < 1 || !(rc.grid_T > 0.0))
        throw std::invalid_argument("grid needs n >= 1 and T > 0");
    return Grid{rc.grid_T, rc.grid_n};
}

// Reports accompanying a CSV stream go to stdout when the CSV went to a
// file, otherwise to stderr so the CSV bytes stay clean.
void emit_report(const std::string& text, const Sink& csv_sink) {
    if (csv_sink.to_file())
        std::cout << text;
    else
        std::cerr << text;
}

int cmd_kernel(const RunConfig& rc, std::vector<double> s_list) {
    if (s_list.empty()) s_list = log_grid(1e-3, 1e3, 25);
    for (double s : s_list)
        if (!(s > 0.0)) throw std::domain_error("kernel table needs s > 0");
    const KernelEvaluator ke(make_weight(rc));
    Sink sink(rc.out_path);
    sink.os() << "s,k,kprime,K,L\n";
    for (double s : s_list) {
        const docalc::Complex z(s, 0.0);
        sink.row({s, ke.eval_k(s), ke.eval_k_prime(s), ke.eval_K(z).real(), ke.eval_L(z).real()});
    }
    return 0;
}

int cmd_kappa(const RunConfig& rc, std::vector<double> t_list) {
    if (t_list.empty()) t_list = log_grid(1e-6, 0.5, 25);
    for (double t : t_list)
        if (!(t > 0.0)) throw std::domain_error("kappa table needs t > 0");
    const KernelEvaluator ke(make_weight(rc));
    const ContourInverter inv(ke, rc.contour);
    const std::vector<double> kp = inv.eval_kappa_batch(t_list);
    Sink sink(rc.out_path);
    sink.os() << "t,kappa,log_bound_ratio\n";
    for (size_t i = 0; i < t_list.size(); ++i) {
        const double ratio = t_list[i] < 1.0 ? kp[i] / std::log(1.0 / t_list[i])
                                             : std::numeric_limits<double>::quiet_NaN();
        sink.row({t_list[i], kp[i], ratio});
    }
    return 0;
}

int cmd_deriv(const RunConfig& rc, const std::string& in_path, const std::string& method,
              bool compare_all) {
    const SampledFunction f = docalc::load_csv(in_path);
    const KernelEvaluator ke(make_weight(rc));
    if (!compare_all) {
        std::vector<double> out;
        if (method == "conv")
            out = docalc::dist_derivative_conv(ke, f);
        else if (method == "spectral")
            out = docalc::dist_derivative_spectral(ke, f);
        else if (method == "bp")
            out = docalc::dist_derivative_bp(ke, f);
        else if (method == "def4")
            out = docalc::dist_derivative_def4(ke, f);
        else
            throw std::invalid_argument("unknown method '" + method +
                                        "' (expected conv, spectral, bp, or def4)");
        Sink sink(rc.out_path);
        sink.os() << "t,value\n";
        for (int i = 0; i <= f.grid.n; ++i) sink.row({f.grid.node(i), out[i]});
        return 0;
    }

    const std::vector<std::string> names = {"conv", "spectral", "bp", "def4"};
    const std::vector<std::vector<double>> outs = {
        docalc::dist_derivative_conv(ke, f), docalc::dist_derivative_spectral(ke, f),
        docalc::dist_derivative_bp(ke, f), docalc::dist_derivative_def4(ke, f)};
    Sink sink(rc.out_path);
    sink.os() << "t,conv,spectral,bp,def4\n";
    for (int i = 0; i <= f.grid.n; ++i)
        sink.row({f.grid.node(i), outs[0][i], outs[1][i], outs[2][i], outs[3][i]});

    nlohmann::ordered_json rep;
    double overall = 0.0;
    for (size_t a = 0; a < outs.size(); ++a) {
        for (size_t b = a + 1; b < outs.size(); ++b) {
            double dev = 0.0;
            for (int i = 0; i <= f.grid.n; ++i) {
                const double t = f.grid.node(i);
                if (t < 0.1 * f.grid.T || t > 0.9 * f.grid.T) continue;
                dev = std::max(dev, std::abs(outs[a][i] - outs[b][i]) /
                                        std::max(std::abs(outs[a][i]), 1e-12));
            }
            rep["pairwise_max_relative"][names[a] + "-" + names[b]] = dev;
            overall = std::max(overall, dev);
        }
    }
    rep["max_deviation"] = overall;
    emit_report(rep.dump(2) + "\n", sink);
    return 0;
}

int cmd_integ(const RunConfig& rc, const std::string& in_path) {
    const SampledFunction f = docalc::load_csv(in_path);
    const KernelEvaluator ke(make_weight(rc));
    const ContourInverter inv(ke, rc.contour);
    const std::vector<double> out = docalc::dist_integral(inv, f);
    Sink sink(rc.out_path);
    sink.os() << "t,value\n";
    for (int i = 0; i <= f.grid.n; ++i) sink.row({f.grid.node(i), out[i]});
    return 0;
}

int cmd_solve(const RunConfig& rc, double lambda, double u0, const std::string& f_path) {
    const KernelEvaluator ke(make_weight(rc));
    Grid g = make_grid(rc);
    std::vector<double> forcing;
    if (!f_path.empty()) {
        const SampledFunction f = docalc::load_csv(f_path);
        g = f.grid;  // the forcing sample fixes the grid
        forcing = f.values;
    }
    const SampledFunction u = docalc::solve_eigen(ke, g, lambda, u0, forcing);

    // discrete residual of D u = lambda u + f under the same convolution rule
    const std::vector<double> du = docalc::dist_derivative_conv(ke, u);
    double resid = 0.0, scale = std::abs(lambda) * std::abs(u0) + std::abs(u0) + 1e-300;
    for (int i = 1; i <= g.n; ++i) {
        const double rhs = lambda * u.values[i] + (forcing.empty() ? 0.0 : forcing[i]);
        resid = std::max(resid, std::abs(du[i] - rhs));
        scale = std::max(scale, std::abs(rhs));
    }

    Sink sink(rc.out_path);
    sink.os() << "t,value\n";
    for (int i = 0; i <= g.n; ++i) sink.row({g.node(i), u.values[i]});

    nlohmann::ordered_json rep;
    rep["lambda"] = lambda;
    rep["u0"] = u0;
    rep["n"] = g.n;
    rep["max_residual"] = resid;
    rep["relative_residual"] = resid / scale;
    emit_report(rep.dump(2) + "\n", sink);
    return 0;
}

int cmd_verify(const RunConfig& rc, bool quick) {
    const WeightFunction w = make_weight(rc);
    docalc::VerifyOptions opt;
    opt.tol_scale = rc.tol_scale;
    opt.tol_abs = rc.tol_abs;
    opt.grid_n = std::min(rc.grid_n, 512);
    opt.quick = quick;
    opt.lambda_min = rc.lambda_min;
    opt.lambda_max = rc.lambda_max;
    opt.stieltjes_panels = rc.stieltjes_panels;
    const auto results = docalc::run_verification(w, opt);
    Sink sink(rc.out_path);
    sink.os() << docalc::results_to_json(results);
    if (!docalc::all_passed(results)) {
        for (const auto& r : results)
            if (!r.passed) std::cerr << "FAILED " << r.name << " (residual " << fmt(r.residual)
                                     << " > tolerance " << fmt(r.tolerance) << ")\n";
        return 1;
    }
    return 0;
}

int cmd_contour_dump(const RunConfig& rc, double s) {
    if (!(s > 0.0)) throw std::domain_error("contour dump needs a positive target s");
    const docalc::HookContour hc = docalc::build_contour(
        rc.contour.gamma, rc.contour.omega, s, rc.contour.truncation_tol,
        rc.contour.points_per_panel);
    Sink sink(rc.out_path);
    sink.os() << "x,y,wx,wy\n";
    for (size_t i = 0; i < hc.nodes.size(); ++i)
        sink.row({hc.nodes[i].real(), hc.nodes[i].imag(), hc.dz_weights[i].real(),
                  hc.dz_weights[i].imag()});
    return 0;
}

int run(int argc, char** argv) {
    CLI::App app{"distributed-order fractional calculus toolkit"};
    app.require_subcommand(1);

    std::string config_path, weight_arg, out_arg, method = "conv", in_path, f_path;
    double grid_T = 1.0, gamma = 1.0, omega = 0.75;
    int grid_n = 256;
    double lambda = 1.0, u0 = 1.0, dump_s = 1.0;
    double tol_scale = 1.0, tol_abs = 0.0;
    bool compare_all = false, quick = false;
    std::vector<double> s_list, t_list;

    auto* o_config = app.add_option("--config", config_path, "JSON config file");
    auto* o_weight = app.add_option("--weight", weight_arg, "weight spec: inline JSON or a path");
    auto* o_gn = app.add_option("--grid-n", grid_n, "number of grid cells");
    auto* o_gt = app.add_option("--grid-T", grid_T, "grid horizon T");
    auto* o_out = app.add_option("--out", out_arg, "output path (default stdout)");
    auto* o_gamma = app.add_option("--gamma", gamma, "contour arc radius");
    auto* o_omega = app.add_option("--omega", omega, "contour ray angle / pi, in (1/2, 1)");

    auto* sc_kernel = app.add_subcommand("kernel", "tabulate k, k', K, L");
    sc_kernel->add_option("--s", s_list, "evaluation points (default: log grid)");
    auto* sc_kappa = app.add_subcommand("kappa", "tabulate the integral kernel kappa");
    sc_kappa->add_option("--t", t_list, "evaluation points (default: log grid)");
    auto* sc_deriv = app.add_subcommand("deriv", "apply the distributed-order derivative to a CSV sample");
    sc_deriv->add_option("--in", in_path, "input CSV (t,value)")->required();
    sc_deriv->add_option("--method", method, "conv | spectral | bp | def4");
    sc_deriv->add_flag("--compare-all", compare_all, "emit all four forms plus deviations");
    auto* sc_integ = app.add_subcommand("integ", "apply the distributed-order integral to a CSV sample");
    sc_integ->add_option("--in", in_path, "input CSV (t,value)")->required();
    auto* sc_solve = app.add_subcommand("solve", "march D u = lambda u + f with u(0) = u0");
    sc_solve->add_option("--lambda", lambda, "spectral parameter");
    sc_solve->add_option("--u0", u0, "initial value");
    sc_solve->add_option("--f", f_path, "forcing CSV (fixes the grid)");
    auto* sc_verify = app.add_subcommand("verify", "run the invariant battery, emit a JSON report");
    auto* o_ts = sc_verify->add_option("--tol-scale", tol_scale, "scale every tolerance");
    auto* o_ta = sc_verify->add_option("--tol-abs", tol_abs, "replace every tolerance");
    sc_verify->add_flag("--quick", quick, "smaller grids");
    auto* sc_dump = app.add_subcommand("contour-dump", "emit contour nodes and weights");
    sc_dump->add_option("--s", dump_s, "target transform variable");

    for (auto* sc : {sc_kernel, sc_kappa, sc_deriv, sc_integ, sc_solve, sc_verify, sc_dump})
        sc->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    RunConfig rc;
    if (o_config->count()) apply_config_file(rc, config_path);
    if (o_weight->count()) rc.weight_spec = weight_arg;
    if (o_gn->count()) rc.grid_n = grid_n;
    if (o_gt->count()) rc.grid_T = grid_T;
    if (o_out->count()) rc.out_path = out_arg;
    if (o_gamma->count()) rc.contour.gamma = gamma;
    if (o_omega->count()) rc.contour.omega = omega;
    if (o_ts->count()) rc.tol_scale = tol_scale;
    if (o_ta->count()) rc.tol_abs = tol_abs;

    if (*sc_kernel) return cmd_kernel(rc, s_list);
    if (*sc_kappa) return cmd_kappa(rc, t_list);
    if (*sc_deriv) return cmd_deriv(rc, in_path, method, compare_all);
    if (*sc_integ) return cmd_integ(rc, in_path);
    if (*sc_solve) return cmd_solve(rc, lambda, u0, f_path);
    if (*sc_verify) return cmd_verify(rc, quick);
    if (*sc_dump) return cmd_contour_dump(rc, dump_s);
    return 2;
}

} // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const std::invalid_argument& ex) {
        std::cerr << "error: " << ex.what() << '\n';
        return 2;
    } catch (const std::domain_error& ex) {
        std::cerr << "error: " << ex.what() << '\n';
        return 3;
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << '\n';
        return 1;
    }
}
