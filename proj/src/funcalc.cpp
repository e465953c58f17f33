#include "docalc/funcalc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace docalc {

namespace {

void check_square(const TriangularMatrix& m, const char* who) {
    if (m.n < 1 || m.a.size() != static_cast<size_t>(m.n) * m.n)
        throw std::invalid_argument(std::string(who) + ": matrix storage does not match its order");
}

void check_same_shape(const TriangularMatrix& x, const TriangularMatrix& y, const char* who) {
    check_square(x, who);
    check_square(y, who);
    if (x.n != y.n)
        throw std::invalid_argument(std::string(who) + ": matrix orders disagree");
}

void check_grid(const Grid& g, const char* who) {
    if (g.n < 1 || !(g.T > 0.0))
        throw std::invalid_argument(std::string(who) + ": grid needs n >= 1 and T > 0");
}

double max_abs_row_sum(const TriangularMatrix& m) {
    double best = 0.0;
    for (int i = 0; i < m.n; ++i) {
        double s = 0.0;
        for (int j = 0; j <= i; ++j) s += std::abs(m.at(i, j));
        best = std::max(best, s);
    }
    return best;
}

// Cyclic Jacobi eigensolver for a dense symmetric matrix, row-major storage.
// Destroys its input; returns the unsorted eigenvalues. Quadratic-per-sweep
// convergence makes a small fixed sweep cap safe at the orders used here.
std::vector<double> jacobi_eigenvalues(std::vector<double> a, int n) {
    auto idx = [n](int i, int j) { return static_cast<size_t>(i) * n + j; };
    for (int sweep = 0; sweep < 120; ++sweep) {
        double off2 = 0.0;
        double diag = 0.0;
        for (int i = 0; i < n; ++i) {
            diag += std::abs(a[idx(i, i)]);
            for (int j = i + 1; j < n; ++j) off2 += 2.0 * a[idx(i, j)] * a[idx(i, j)];
        }
        if (std::sqrt(off2) <= 1e-15 * std::max(diag, 1e-300)) break;
        for (int p = 0; p < n - 1; ++p) {
            for (int q = p + 1; q < n; ++q) {
                const double apq = a[idx(p, q)];
                const double scale = std::abs(a[idx(p, p)]) + std::abs(a[idx(q, q)]);
                if (std::abs(apq) <= 1e-18 * std::max(scale, 1e-300)) continue;
                const double theta = (a[idx(q, q)] - a[idx(p, p)]) / (2.0 * apq);
                const double t =
                    (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(1.0 + theta * theta));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = t * c;
                for (int k = 0; k < n; ++k) {
                    const double akp = a[idx(k, p)];
                    const double akq = a[idx(k, q)];
                    a[idx(k, p)] = c * akp - s * akq;
                    a[idx(k, q)] = s * akp + c * akq;
                }
                for (int k = 0; k < n; ++k) {
                    const double apk = a[idx(p, k)];
                    const double aqk = a[idx(q, k)];
                    a[idx(p, k)] = c * apk - s * aqk;
                    a[idx(q, k)] = s * apk + c * aqk;
                }
            }
        }
    }
    std::vector<double> ev(n);
    for (int i = 0; i < n; ++i) ev[i] = a[idx(i, i)];
    return ev;
}

} // namespace

TriangularMatrix TriangularMatrix::zero(int n, double h) {
    if (n < 1) throw std::invalid_argument("TriangularMatrix::zero: order must be positive");
    TriangularMatrix m;
    m.n = n;
    m.h = h;
    m.a.assign(static_cast<size_t>(n) * n, 0.0);
    return m;
}

TriangularMatrix TriangularMatrix::identity(int n, double h) {
    TriangularMatrix m = zero(n, h);
    for (int i = 0; i < n; ++i) m.at(i, i) = 1.0;
    return m;
}

TriangularMatrix build_A(const Grid& g) {
    check_grid(g, "build_A");
    TriangularMatrix m = TriangularMatrix::zero(g.n, g.h());
    const double ih = 1.0 / g.h();
    for (int i = 0; i < g.n; ++i) {
        m.at(i, i) = -ih;
        if (i > 0) m.at(i, i - 1) = ih;
    }
    return m;
}

TriangularMatrix build_J(const Grid& g, bool trapezoid) {
    check_grid(g, "build_J");
    TriangularMatrix m = TriangularMatrix::zero(g.n, g.h());
    const double h = g.h();
    for (int i = 0; i < g.n; ++i) {
        for (int j = 0; j < i; ++j) m.at(i, j) = h;
        m.at(i, i) = trapezoid ? 0.5 * h : h;
    }
    return m;
}

TriangularMatrix resolvent_A_kernel(double lambda, const Grid& g) {
    check_grid(g, "resolvent_A_kernel");
    TriangularMatrix m = TriangularMatrix::zero(g.n, g.h());
    const double h = g.h();
    for (int i = 0; i < g.n; ++i)
        for (int j = 0; j <= i; ++j) m.at(i, j) = -h * std::exp(-lambda * h * (i - j));
    return m;
}

TriangularMatrix conv_toeplitz(const std::vector<double>& cell_mass, const Grid& g) {
    check_grid(g, "conv_toeplitz");
    if (cell_mass.size() != static_cast<size_t>(g.n))
        throw std::invalid_argument("conv_toeplitz: need one kernel mass per grid cell");
    TriangularMatrix m = TriangularMatrix::zero(g.n, g.h());
    for (int i = 0; i < g.n; ++i)
        for (int j = 0; j <= i; ++j) m.at(i, j) = cell_mass[i - j];
    return m;
}

TriangularMatrix scaled(const TriangularMatrix& m, double c) {
    check_square(m, "scaled");
    TriangularMatrix out = m;
    for (double& e : out.a) e *= c;
    return out;
}

TriangularMatrix mat_add(const TriangularMatrix& x, const TriangularMatrix& y, double cy) {
    check_same_shape(x, y, "mat_add");
    TriangularMatrix out = x;
    for (size_t k = 0; k < out.a.size(); ++k) out.a[k] += cy * y.a[k];
    return out;
}

TriangularMatrix mat_mul(const TriangularMatrix& x, const TriangularMatrix& y) {
    check_same_shape(x, y, "mat_mul");
    TriangularMatrix out = TriangularMatrix::zero(x.n, x.h);
    for (int i = 0; i < x.n; ++i) {
        for (int j = 0; j <= i; ++j) {
            double s = 0.0;
            for (int k = j; k <= i; ++k) s += x.at(i, k) * y.at(k, j);
            out.at(i, j) = s;
        }
    }
    return out;
}

std::vector<double> mat_vec(const TriangularMatrix& m, const std::vector<double>& v) {
    check_square(m, "mat_vec");
    if (v.size() != static_cast<size_t>(m.n))
        throw std::invalid_argument("mat_vec: vector length does not match the matrix order");
    std::vector<double> out(m.n, 0.0);
    for (int i = 0; i < m.n; ++i) {
        double s = 0.0;
        for (int j = 0; j <= i; ++j) s += m.at(i, j) * v[j];
        out[i] = s;
    }
    return out;
}

std::vector<double> tri_solve(const TriangularMatrix& m, const std::vector<double>& b) {
    check_square(m, "tri_solve");
    if (b.size() != static_cast<size_t>(m.n))
        throw std::invalid_argument("tri_solve: vector length does not match the matrix order");
    std::vector<double> x(m.n, 0.0);
    for (int i = 0; i < m.n; ++i) {
        double s = b[i];
        for (int j = 0; j < i; ++j) s -= m.at(i, j) * x[j];
        const double piv = m.at(i, i);
        if (!(std::abs(piv) > 1e-300))
            throw std::runtime_error("tri_solve: pivot vanished at row " + std::to_string(i + 1) +
                                     " (t = " + std::to_string((i + 1) * m.h) + ")");
        x[i] = s / piv;
    }
    return x;
}

TriangularMatrix tri_inverse(const TriangularMatrix& m) {
    check_square(m, "tri_inverse");
    TriangularMatrix out = TriangularMatrix::zero(m.n, m.h);
    // column-by-column forward substitution; the inverse stays lower triangular
    for (int j = 0; j < m.n; ++j) {
        for (int i = j; i < m.n; ++i) {
            double s = (i == j) ? 1.0 : 0.0;
            for (int k = j; k < i; ++k) s -= m.at(i, k) * out.at(k, j);
            const double piv = m.at(i, i);
            if (!(std::abs(piv) > 1e-300))
                throw std::runtime_error("tri_inverse: pivot vanished at row " + std::to_string(i + 1) +
                                         " (t = " + std::to_string((i + 1) * m.h) + ")");
            out.at(i, j) = s / piv;
        }
    }
    return out;
}

double frobenius_norm(const TriangularMatrix& m) {
    check_square(m, "frobenius_norm");
    double s = 0.0;
    for (double e : m.a) s += e * e;
    return std::sqrt(s);
}

double operator_norm(const TriangularMatrix& m) {
    check_square(m, "operator_norm");
    const int n = m.n;
    std::vector<double> b(static_cast<size_t>(n) * n, 0.0);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j <= i; ++j) {
            // (M^T M)_{ij} = sum_k M_{ki} M_{kj}, nonzero only for k >= max(i, j)
            double s = 0.0;
            for (int k = i; k < n; ++k) s += m.at(k, i) * m.at(k, j);
            b[static_cast<size_t>(i) * n + j] = s;
            b[static_cast<size_t>(j) * n + i] = s;
        }
    }
    const std::vector<double> ev = jacobi_eigenvalues(std::move(b), n);
    double top = 0.0;
    for (double e : ev) top = std::max(top, e);
    return std::sqrt(std::max(top, 0.0));
}

double min_symmetric_eigenvalue(const TriangularMatrix& m) {
    check_square(m, "min_symmetric_eigenvalue");
    const int n = m.n;
    std::vector<double> b(static_cast<size_t>(n) * n, 0.0);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            b[static_cast<size_t>(i) * n + j] = m.at(i, j) + m.at(j, i);
    const std::vector<double> ev = jacobi_eigenvalues(std::move(b), n);
    double low = std::numeric_limits<double>::infinity();
    for (double e : ev) low = std::min(low, e);
    return low;
}

TriangularMatrix mat_exp_neg(const TriangularMatrix& g, double t) {
    check_square(g, "mat_exp_neg");
    if (!(t >= 0.0)) throw std::invalid_argument("mat_exp_neg: time must be nonnegative");
    TriangularMatrix c = scaled(g, -t);
    double rho = max_abs_row_sum(c);
    int squarings = 0;
    while (rho > 0.25 && squarings < 64) {
        rho *= 0.5;
        ++squarings;
    }
    c = scaled(c, std::ldexp(1.0, -squarings));
    TriangularMatrix x = TriangularMatrix::identity(g.n, g.h);
    TriangularMatrix term = x;
    for (int k = 1; k <= 80; ++k) {
        term = scaled(mat_mul(term, c), 1.0 / k);
        x = mat_add(x, term);
        if (frobenius_norm(term) <= 1e-18 * std::max(1.0, frobenius_norm(x))) break;
    }
    for (int k = 0; k < squarings; ++k) x = mat_mul(x, x);
    return x;
}

TriangularMatrix hirsch_apply(const TriangularMatrix& v, const StieltjesRule& rule, Exec mode) {
    check_square(v, "hirsch_apply");
    const int n = v.n;
    if (rule.size() == 0) throw std::invalid_argument("hirsch_apply: empty Stieltjes rule");
    for (double lam : rule.lambda)
        if (!(lam > 0.0)) throw std::invalid_argument("hirsch_apply: rule nodes must be positive");

    // structure probe: two O(n) solve families cover the matrices that matter
    const double d = v.at(0, 0);
    const double sub = (n > 1) ? v.at(1, 0) : 0.0;
    bool bidiag = true;            // Toeplitz with one subdiagonal
    bool uniform = (n > 1);        // Toeplitz with one constant filled lower triangle
    const double dtol = 1e-14 * std::max(std::abs(d), 1e-300);
    const double stol = 1e-14 * std::max(std::abs(sub), 1e-300);
    for (int i = 0; i < n && (bidiag || uniform); ++i) {
        for (int j = 0; j <= i; ++j) {
            const double e = v.at(i, j);
            if (j == i) {
                if (std::abs(e - d) > dtol) { bidiag = false; uniform = false; }
            } else if (j == i - 1) {
                if (std::abs(e - sub) > stol) { bidiag = false; uniform = false; }
            } else {
                if (e != 0.0) bidiag = false;
                if (std::abs(e - sub) > stol) uniform = false;
            }
        }
    }

    TriangularMatrix out = TriangularMatrix::zero(n, v.h);
    parallel_for(n, mode, [&](int j) {
        std::vector<double> col(n, 0.0);
        std::vector<double> x(n, 0.0);
        for (int q = 0; q < rule.size(); ++q) {
            const double lam = rule.lambda[q];
            const double w = rule.weight[q];
            // solve (I + lam V) x = e_j; rows above j stay zero
            if (bidiag) {
                const double piv = 1.0 + lam * d;
                if (std::abs(piv) <= 1e-14 * (1.0 + std::abs(lam * d)))
                    throw std::runtime_error("hirsch_apply: singular shift at node lambda = " +
                                             std::to_string(lam));
                const double off = lam * sub;
                x[j] = 1.0 / piv;
                for (int i = j + 1; i < n; ++i) x[i] = -off * x[i - 1] / piv;
            } else if (uniform) {
                const double piv = 1.0 + lam * d;
                if (std::abs(piv) <= 1e-14 * (1.0 + std::abs(lam * d)))
                    throw std::runtime_error("hirsch_apply: singular shift at node lambda = " +
                                             std::to_string(lam));
                // differencing adjacent rows collapses the filled triangle
                const double carry = piv - lam * sub;
                x[j] = 1.0 / piv;
                for (int i = j + 1; i < n; ++i) {
                    const double db = (i == j + 1) ? -1.0 : 0.0;
                    x[i] = (db + carry * x[i - 1]) / piv;
                }
            } else {
                for (int i = j; i < n; ++i) {
                    double s = (i == j) ? 1.0 : 0.0;
                    for (int k = j; k < i; ++k) s -= lam * v.at(i, k) * x[k];
                    const double piv = 1.0 + lam * v.at(i, i);
                    if (std::abs(piv) <= 1e-14 * (1.0 + std::abs(lam * v.at(i, i))))
                        throw std::runtime_error("hirsch_apply: singular shift at node lambda = " +
                                                 std::to_string(lam));
                    x[i] = s / piv;
                }
            }
            // V (I + lam V)^{-1} e_j = (e_j - x) / lam, which skips a matrix apply
            const double invl = 1.0 / lam;
            col[j] += w * (1.0 - x[j]) * invl;
            for (int i = j + 1; i < n; ++i) col[i] -= w * x[i] * invl;
        }
        for (int i = j; i < n; ++i) out.at(i, j) = col[i];
    });

    if (rule.tail_correction) {
        const TriangularMatrix v2 = mat_mul(v, v);
        const TriangularMatrix vinv = tri_inverse(v);
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j <= i; ++j) {
                double e = out.at(i, j);
                e += rule.low0 * v.at(i, j) - rule.low1 * v2.at(i, j) - rule.high2 * vinv.at(i, j);
                if (i == j) e += rule.high1;
                out.at(i, j) = e;
            }
        }
    }
    return out;
}

ResidualReport verify_inversion_identity(const KernelEvaluator& ke, const Grid& g,
                                         const StieltjesRule& rule, const InverterConfig& cfg) {
    check_grid(g, "verify_inversion_identity");
    ResidualReport rep;
    rep.theorem = "inversion-identity";
    rep.n = g.n;
    rep.rule_nodes = rule.size();

    const TriangularMatrix v = scaled(build_A(g), -1.0);
    const TriangularMatrix m = hirsch_apply(v, rule);

    TriangularMatrix minv;
    try {
        minv = tri_inverse(m);
    } catch (const std::exception& ex) {
        double dmax = 0.0;
        double dmin = std::numeric_limits<double>::infinity();
        for (int i = 0; i < m.n; ++i) {
            dmax = std::max(dmax, std::abs(m.at(i, i)));
            dmin = std::min(dmin, std::abs(m.at(i, i)));
        }
        rep.residual = std::numeric_limits<double>::infinity();
        rep.note = std::string("operator matrix is singular (") + ex.what() +
                   "); diagonal condition estimate " +
                   std::to_string(dmin > 0.0 ? dmax / dmin : std::numeric_limits<double>::infinity());
        return rep;
    }

    ContourInverter inv(ke, cfg);
    std::vector<double> edges(g.n + 1);
    for (int i = 0; i <= g.n; ++i) edges[i] = g.node(i);
    const ContourInverter::CellTable table = inv.r_lambda_cells(0.0, edges);
    const TriangularMatrix ih = conv_toeplitz(table.mass, g);

    rep.numerator = frobenius_norm(mat_add(minv, ih, -1.0));
    rep.denominator = frobenius_norm(ih);
    rep.residual = rep.numerator / rep.denominator;
    return rep;
}

DecayReport semigroup_decay_report(const Grid& g, const StieltjesRule& rule,
                                   const std::vector<double>& t_list) {
    check_grid(g, "semigroup_decay_report");
    const TriangularMatrix gen = hirsch_apply(scaled(build_A(g), -1.0), rule);
    DecayReport rep;
    rep.t = t_list;
    rep.log_norm_over_t.resize(t_list.size(), 0.0);
    for (size_t i = 0; i < t_list.size(); ++i) {
        const double t = t_list[i];
        if (!(t > 0.0))
            throw std::invalid_argument("semigroup_decay_report: times must be positive");
        const TriangularMatrix e = mat_exp_neg(gen, t);
        rep.log_norm_over_t[i] = std::log(operator_norm(e)) / t;
    }
    rep.strictly_decreasing = rep.log_norm_over_t.size() >= 2;
    for (size_t i = 1; i < rep.log_norm_over_t.size(); ++i)
        if (!(rep.log_norm_over_t[i] < rep.log_norm_over_t[i - 1])) rep.strictly_decreasing = false;
    return rep;
}

} // namespace docalc
