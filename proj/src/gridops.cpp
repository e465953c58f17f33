#include "docalc/gridops.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>

namespace docalc {

namespace {

void check_lengths(const Grid& g, size_t nvalues, size_t ncells) {
    if (nvalues != static_cast<size_t>(g.n) + 1)
        throw std::invalid_argument("sampled values disagree with the grid length");
    if (ncells != static_cast<size_t>(g.n))
        throw std::invalid_argument("kernel cell table disagrees with the grid length");
}

} // namespace

std::vector<double> ConvolutionOperator::apply_linear(const std::vector<double>& f,
                                                      Exec mode) const {
    check_lengths(grid, f.size(), mass.size());
    std::vector<double> out(grid.n + 1, 0.0);
    double h = grid.h();
    parallel_for(grid.n, mode, [&](int k) {
        int i = k + 1;
        double acc = 0.0;
        for (int j = 0; j < i; ++j) {
            double fr = f[i - j];
            double slope = (f[i - j - 1] - fr) / h;
            acc += fr * mass[j] + slope * moment1[j];
        }
        out[i] = acc;
    });
    return out;
}

std::vector<double> ConvolutionOperator::apply_to_derivative(const std::vector<double>& f,
                                                             Exec mode) const {
    check_lengths(grid, f.size(), mass.size());
    std::vector<double> out(grid.n + 1, 0.0);
    double h = grid.h();
    parallel_for(grid.n, mode, [&](int k) {
        int i = k + 1;
        double acc = 0.0;
        for (int j = 0; j < i; ++j) acc += mass[j] * (f[i - j] - f[i - j - 1]);
        out[i] = acc / h;
    });
    return out;
}

ConvolutionOperator k_convolution(const KernelEvaluator& ke, const Grid& g) {
    ConvolutionOperator op;
    op.grid = g;
    op.kernel_tag = "k";
    op.mass.resize(g.n);
    op.moment1.resize(g.n);
    for (int j = 0; j < g.n; ++j) {
        double a = g.node(j), b = g.node(j + 1);
        op.mass[j] = ke.cell_mass(a, b);
        op.moment1[j] = ke.cell_moment1(a, b);
    }
    return op;
}

ConvolutionOperator kappa_convolution(const ContourInverter& inv, const Grid& g, Exec mode) {
    std::vector<double> edges(g.n + 1);
    for (int j = 0; j <= g.n; ++j) edges[j] = g.node(j);
    edges[0] = 0.0;
    ContourInverter::CellTable table = inv.r_lambda_cells(0.0, edges, mode);
    ConvolutionOperator op;
    op.grid = g;
    op.kernel_tag = "kappa";
    op.mass = std::move(table.mass);
    op.moment1 = std::move(table.moment1);
    for (double v : op.mass)
        if (!(v > 0.0))
            throw std::runtime_error("integral kernel cell masses lost positivity: the contour "
                                     "quadrature is unresolved on this grid");
    return op;
}

ConvolutionOperator r_lambda_convolution(const ContourInverter& inv, double lambda, const Grid& g,
                                         Exec mode) {
    std::vector<double> edges(g.n + 1);
    for (int j = 0; j <= g.n; ++j) edges[j] = g.node(j);
    edges[0] = 0.0;
    ContourInverter::CellTable table = inv.r_lambda_cells(lambda, edges, mode);
    ConvolutionOperator op;
    op.grid = g;
    op.kernel_tag = "r_lambda";
    op.mass = std::move(table.mass);
    op.moment1 = std::move(table.moment1);
    return op;
}

std::vector<double> caputo_derivative(double alpha, const SampledFunction& f) {
    if (!(alpha >= 0.0) || !(alpha < 1.0))
        throw std::invalid_argument("caputo order must lie in [0, 1)");
    const Grid& g = f.grid;
    if (f.values.size() != static_cast<size_t>(g.n) + 1)
        throw std::invalid_argument("sampled values disagree with the grid length");
    double h = g.h();
    double ig2 = 1.0 / std::tgamma(2.0 - alpha);
    std::vector<double> mass(g.n);
    for (int j = 0; j < g.n; ++j)
        mass[j] = (std::pow(g.node(j + 1), 1.0 - alpha) - std::pow(g.node(j), 1.0 - alpha)) * ig2;
    std::vector<double> out(g.n + 1, 0.0);
    for (int i = 1; i <= g.n; ++i) {
        double acc = 0.0;
        for (int j = 0; j < i; ++j) acc += mass[j] * (f.values[i - j] - f.values[i - j - 1]);
        out[i] = acc / h;
    }
    return out;
}

std::vector<double> dist_derivative_conv(const KernelEvaluator& ke, const SampledFunction& f,
                                         Exec mode) {
    return k_convolution(ke, f.grid).apply_to_derivative(f.values, mode);
}

std::vector<double> dist_derivative_spectral(const KernelEvaluator& ke, const SampledFunction& f,
                                             const QuadratureRule& alpha_rule, Exec mode) {
    if (alpha_rule.size() == 0)
        throw std::invalid_argument("spectral form needs a nonempty order quadrature");
    for (double a : alpha_rule.nodes)
        if (!(a > 0.0) || !(a < 1.0))
            throw std::invalid_argument("spectral order quadrature must use nodes strictly "
                                        "inside (0, 1): the endpoint orders are singular");
    size_t q = alpha_rule.size();
    size_t len = f.values.size();
    std::vector<std::vector<double>> parts(q);
    parallel_for(static_cast<int>(q), mode,
                 [&](int j) { parts[j] = caputo_derivative(alpha_rule.nodes[j], f); });
    std::vector<double> out(len, 0.0);
    const WeightFunction& mu = ke.weight();
    for (size_t j = 0; j < q; ++j) {
        double wj = alpha_rule.weights[j] * mu(alpha_rule.nodes[j]);
        for (size_t i = 0; i < len; ++i) out[i] += wj * parts[j][i];
    }
    return out;
}

std::vector<double> dist_derivative_spectral(const KernelEvaluator& ke, const SampledFunction& f,
                                             int alpha_points, Exec mode) {
    if (alpha_points < 1) throw std::invalid_argument("spectral form needs at least one node");
    return dist_derivative_spectral(ke, f, QuadratureRule::gauss_legendre(alpha_points, 0.0, 1.0),
                                    mode);
}

std::vector<double> dist_derivative_bp(const KernelEvaluator& ke, const SampledFunction& f,
                                       Exec mode) {
    const Grid& g = f.grid;
    if (f.values.size() != static_cast<size_t>(g.n) + 1)
        throw std::invalid_argument("sampled values disagree with the grid length");
    double scale = 1.0;
    for (double v : f.values) scale = std::max(scale, std::abs(v));
    if (std::abs(f.values[0]) > 1e-12 * scale)
        throw std::domain_error("function not in operator domain: the jump form needs "
                                "f(0) = 0");
    double h = g.h();
    std::vector<double> kn(g.n + 1, 0.0), mass(g.n);
    for (int j = 1; j <= g.n; ++j) kn[j] = ke.eval_k(g.node(j));
    for (int j = 0; j < g.n; ++j) mass[j] = ke.cell_mass(g.node(j), g.node(j + 1));
    std::vector<double> out(g.n + 1, 0.0);
    parallel_for(g.n, mode, [&](int q) {
        int i = q + 1;
        double acc = kn[i] * f.values[i];
        for (int j = 0; j < i; ++j) {
            double slope = (f.values[i - j - 1] - f.values[i - j]) / h;
            // int over the cell of (f(x-s) - f(x)) k'(s) ds, exactly:
            // the level part integrates k' to a difference of k values and
            // vanishes identically on the first cell.
            if (j > 0) acc += (f.values[i - j] - f.values[i]) * (kn[j + 1] - kn[j]);
            acc += slope * (h * kn[j + 1] - mass[j]);
        }
        out[i] = acc;
    });
    return out;
}

std::vector<double> fd_weights_d1(const std::vector<double>& offsets) {
    size_t n = offsets.size();
    if (n < 2) throw std::invalid_argument("derivative weights need at least two nodes");
    // Fornberg recursion for derivative orders 0..1 at evaluation point 0.
    std::vector<double> c0(n, 0.0), c1w(n, 0.0);
    c0[0] = 1.0;
    double c1 = 1.0, c4 = offsets[0];
    for (size_t i = 1; i < n; ++i) {
        double c2 = 1.0, c5 = c4;
        c4 = offsets[i];
        for (size_t j = 0; j < i; ++j) {
            double c3 = offsets[i] - offsets[j];
            c2 *= c3;
            if (j == i - 1) {
                c1w[i] = c1 * (c0[i - 1] - c5 * c1w[i - 1]) / c2;
                c0[i] = -c1 * c5 * c0[i - 1] / c2;
            }
            c1w[j] = (c4 * c1w[j] - c0[j]) / c3;
            c0[j] = c4 * c0[j] / c3;
        }
        c1 = c2;
    }
    return c1w;
}

std::vector<double> dist_derivative_def4(const KernelEvaluator& ke, const SampledFunction& f,
                                         Exec mode) {
    const Grid& g = f.grid;
    if (g.n < 4)
        throw std::invalid_argument("the differentiated-convolution form needs at least 5 nodes");
    if (f.values.size() != static_cast<size_t>(g.n) + 1)
        throw std::invalid_argument("sampled values disagree with the grid length");
    std::vector<double> conv = k_convolution(ke, g).apply_linear(f.values, mode);
    double h = g.h();
    static const std::vector<double> wInterior = fd_weights_d1({-2, -1, 0, 1, 2});
    static const std::vector<double> wLeft = fd_weights_d1({-1, 0, 1, 2, 3});
    static const std::vector<double> wRight = fd_weights_d1({-3, -2, -1, 0, 1});
    static const std::vector<double> wEnd = fd_weights_d1({-4, -3, -2, -1, 0});
    double f0 = f.values[0];
    std::vector<double> out(g.n + 1, 0.0);
    parallel_for(g.n, mode, [&](int q) {
        int i = q + 1;
        const std::vector<double>* w = &wInterior;
        int base = -2;
        if (i == 1) {
            w = &wLeft;
            base = -1;
        } else if (i == g.n - 1) {
            w = &wRight;
            base = -3;
        } else if (i == g.n) {
            w = &wEnd;
            base = -4;
        }
        double acc = 0.0;
        for (int m = 0; m < 5; ++m) acc += (*w)[m] * conv[i + base + m];
        out[i] = acc / h - ke.eval_k(g.node(i)) * f0;
    });
    return out;
}

std::vector<double> dist_integral(const ContourInverter& inv, const SampledFunction& f,
                                  Exec mode) {
    return kappa_convolution(inv, f.grid, mode).apply_linear(f.values, mode);
}

SampledFunction solve_eigen(const KernelEvaluator& ke, const Grid& g, double lambda, double u0,
                            const std::vector<double>& f) {
    if (!f.empty() && f.size() != static_cast<size_t>(g.n) + 1)
        throw std::invalid_argument("forcing term disagrees with the grid length");
    double h = g.h();
    std::vector<double> mass(g.n);
    for (int j = 0; j < g.n; ++j) mass[j] = ke.cell_mass(g.node(j), g.node(j + 1));
    double pivot = mass[0] / h - lambda;
    if (std::abs(pivot) <= 1e-12 * (mass[0] / h + std::abs(lambda)))
        throw std::runtime_error("time step incompatible with lambda: the implicit update pivot "
                                 "vanishes; refine the grid");
    SampledFunction u;
    u.grid = g;
    u.values.assign(g.n + 1, 0.0);
    u.values[0] = u0;
    // Sequential march: u_i (mass_0/h - lambda) = f_i + mass_0 u_{i-1}/h - history.
    for (int i = 1; i <= g.n; ++i) {
        double rhs = f.empty() ? 0.0 : f[i];
        rhs += mass[0] * u.values[i - 1] / h;
        for (int j = 1; j < i; ++j)
            rhs -= mass[j] * (u.values[i - j] - u.values[i - j - 1]) / h;
        u.values[i] = rhs / pivot;
    }
    return u;
}

std::vector<double> resolvent_apply(const ContourInverter& inv, double lambda,
                                    const SampledFunction& f, Exec mode) {
    return r_lambda_convolution(inv, lambda, f.grid, mode).apply_linear(f.values, mode);
}

std::vector<double> integral_resolvent_apply(const ContourInverter& inv, double lambda,
                                             const SampledFunction& f, Exec mode) {
    if (lambda == 0.0)
        throw std::domain_error("the integral operator has no bounded inverse at lambda = 0: "
                                "zero lies in its continuous spectrum");
    std::vector<double> conv =
        r_lambda_convolution(inv, 1.0 / lambda, f.grid, mode).apply_linear(f.values, mode);
    std::vector<double> out(f.values.size());
    double il = 1.0 / lambda, il2 = il * il;
    for (size_t i = 0; i < out.size(); ++i) out[i] = -f.values[i] * il - conv[i] * il2;
    return out;
}

SampledFunction load_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open csv file: " + path);
    std::string line;
    if (!std::getline(in, line)) throw std::invalid_argument("empty csv file: " + path);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "t,value")
        throw std::invalid_argument("csv header must be exactly 't,value' in " + path);
    std::vector<double> ts, vs;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        size_t comma = line.find(',');
        if (comma == std::string::npos)
            throw std::invalid_argument("csv parse error at line " + std::to_string(lineno) +
                                        ": missing comma");
        try {
            size_t p1 = 0, p2 = 0;
            double t = std::stod(line.substr(0, comma), &p1);
            double v = std::stod(line.substr(comma + 1), &p2);
            if (p1 != comma || p2 != line.size() - comma - 1)
                throw std::invalid_argument("trailing characters");
            ts.push_back(t);
            vs.push_back(v);
        } catch (const std::exception&) {
            throw std::invalid_argument("csv parse error at line " + std::to_string(lineno) +
                                        ": expected two numeric columns");
        }
    }
    if (ts.size() < 2) throw std::invalid_argument("csv needs at least two rows in " + path);
    double T = ts.back();
    if (!(T > 0.0)) throw std::invalid_argument("csv nodes must end at a positive time");
    int n = static_cast<int>(ts.size()) - 1;
    double tol = 1e-9 * std::max(T, 1.0);
    for (int j = 0; j <= n; ++j)
        if (std::abs(ts[j] - T * j / n) > tol)
            throw std::invalid_argument("csv nodes must form a uniform grid starting at 0");
    SampledFunction f;
    f.grid = Grid{T, n};
    f.values = std::move(vs);
    return f;
}

void save_csv(const std::string& path, const SampledFunction& f) {
    if (f.values.size() != static_cast<size_t>(f.grid.n) + 1)
        throw std::invalid_argument("sampled values disagree with the grid length");
    std::ofstream out(path);
    if (!out) throw std::invalid_argument("cannot open csv file for writing: " + path);
    out << "t,value\n";
    char buf[64];
    for (int j = 0; j <= f.grid.n; ++j) {
        std::snprintf(buf, sizeof buf, "%.17g", f.grid.node(j));
        out << buf << ',';
        std::snprintf(buf, sizeof buf, "%.17g", f.values[j]);
        out << buf << '\n';
    }
    if (!out) throw std::runtime_error("failed writing csv file: " + path);
}

} // namespace docalc
