#include "docalc/contour.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <utility>

#include "docalc/quadrature.hpp"

namespace docalc {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
// Magnitudes this many e-folds under the running maximum cannot move a
// double-precision sum even after panel-count amplification.
constexpr double kDeadFolds = 14.0;
// A contribution 60 e-folds below the dominant cell is invisible at every
// tolerance this library exposes; cells bounded below that are zeroed
// analytically instead of being summed as roundoff noise.
constexpr double kCellFolds = 60.0;

// Adaptive node cache for one transform family: only the upper half of the
// hook is stored (the integrands pair conjugate-symmetrically), ordered arc
// first (theta ascending from 0) then the upper ray (rho ascending).
struct NodeSet {
    double gamma = 1.0;
    double omega = 0.75;
    double t = 0.0;
    std::vector<Complex> z;
    std::vector<Complex> w;   // dz weight: i z dtheta on the arc, e^{i omega pi} drho on the ray
    std::vector<Complex> L;
    double max_lo = kNegInf;  // largest exponent seen at s_lo during the walk
    double max_hi = kNegInf;  // largest exponent seen at s_hi
};

// ln |e^{zs} e^{-tL}| at one s. Exponents are affine in s, so liveness over
// [s_lo, s_hi] is decided at the two endpoints, each compared against its own
// running maximum: a node is kept while it can still matter at either end.
// Judging bounds against a single global maximum would let the large-s arc
// peak silence ray nodes that only matter for the smallest s in a batch.
inline double exp_at(const Complex& z, double reL, double t, double s) {
    return z.real() * s - t * reL;
}

// Walk the hook outward, refining panels against local phase speed and
// marching coarsely once the exponent bound is dead. s_lo must be positive:
// it controls where the ray integrand finally dies. r_floor > 0 forces the
// rays out at least that far (needed when cell tables start at s = 0 and an
// algebraically decaying -1/z remainder survives the exponential part).
NodeSet build_nodes(const KernelEvaluator& ke, double gamma, double omega, double t,
                    double s_lo, double s_hi, double r_floor, double tol,
                    int per_panel, int max_arc, int max_ray) {
    if (!(s_lo > 0.0) || !(s_hi >= s_lo))
        throw std::invalid_argument("contour walk needs 0 < s_lo <= s_hi");
    NodeSet ns;
    ns.gamma = gamma;
    ns.omega = omega;
    ns.t = t;
    const double th_end = omega * kPi;
    const double dead_gap = std::log(1.0 / tol) + kDeadFolds;
    const QuadratureRule pr = QuadratureRule::gauss_legendre(per_panel, 0.0, 1.0);

    auto probe_dead = [&](const Complex& zz) {
        double reL = ke.eval_L(zz).real();
        return exp_at(zz, reL, t, s_lo) < ns.max_lo - dead_gap - 2.0 &&
               exp_at(zz, reL, t, s_hi) < ns.max_hi - dead_gap - 2.0;
    };
    auto arc_point = [&](double th) {
        return Complex(gamma * std::cos(th), gamma * std::sin(th));
    };
    auto emit = [&](const Complex& zz, const Complex& dzw) {
        Complex Lz = ke.eval_L(zz);
        ns.z.push_back(zz);
        ns.w.push_back(dzw);
        ns.L.push_back(Lz);
        return std::pair{exp_at(zz, Lz.real(), t, s_lo), exp_at(zz, Lz.real(), t, s_hi)};
    };

    // ---- arc ----
    double prev_w;
    {
        double rate = gamma * (s_hi + t * std::abs(ke.eval_L_prime(Complex(gamma, 0.0))));
        double h = std::min(th_end / 6.0, 3.0 / std::max(rate, 1e-12));
        if (t > 0.0) {
            double curv = gamma * gamma * t * std::abs(ke.eval_L_second(Complex(gamma, 0.0)));
            h = std::min(h, 2.0 / std::sqrt(std::max(curv, 1e-12)));
        }
        prev_w = std::max(h, th_end * 1e-9);
    }
    double theta = 0.0;
    bool alive = true;
    bool arc_finished = true;
    int dead_run = 0;
    int panels = 0;
    while (theta < th_end * (1.0 - 1e-14)) {
        double width;
        if (alive) {
            Complex zs = arc_point(theta);
            double rate = gamma * (s_hi + t * std::abs(ke.eval_L_prime(zs)));
            width = std::min({prev_w * 1.7, 3.0 / std::max(rate, 1e-12), th_end - theta});
            if (t > 0.0) {
                double curv = gamma * gamma * t * std::abs(ke.eval_L_second(zs));
                width = std::min(width, 2.0 / std::sqrt(std::max(curv, 1e-12)));
            }
            width = std::max(width, th_end * 1e-9);
        } else {
            width = std::min(prev_w * 2.5, th_end - theta);
        }
        double p_lo = kNegInf, p_hi = kNegInf;
        for (int q = 0; q < per_panel; ++q) {
            double th = theta + width * pr.nodes[q];
            Complex zz = arc_point(th);
            auto [blo, bhi] = emit(zz, Complex(0.0, 1.0) * zz * (width * pr.weights[q]));
            p_lo = std::max(p_lo, blo);
            p_hi = std::max(p_hi, bhi);
        }
        ns.max_lo = std::max(ns.max_lo, p_lo);
        ns.max_hi = std::max(ns.max_hi, p_hi);
        alive = p_lo >= ns.max_lo - dead_gap || p_hi >= ns.max_hi - dead_gap;
        dead_run = alive ? 0 : dead_run + 1;
        theta += width;
        prev_w = width;
        if (++panels > max_arc)
            throw std::runtime_error("contour refinement cap exceeded on the arc: "
                                     "the transform is too stiff for the configured panel budget");
        if (dead_run >= 3 && r_floor <= 0.0 && theta < th_end * (1.0 - 1e-14)) {
            // The bound is a difference of monotone pieces and may dip and
            // recover once, so deadness is confirmed at waypoints covering
            // the remaining arc and the full ray before truncating here.
            bool confirmed = true;
            for (int q = 1; q <= 8 && confirmed; ++q)
                confirmed = probe_dead(arc_point(theta + (th_end - theta) * (q / 8.0)));
            static const double kRayFactors[] = {1.5, 3.0, 10.0, 1e2, 1e4, 1e8};
            for (double f : kRayFactors) {
                if (!confirmed) break;
                confirmed = probe_dead(std::polar(gamma * f, th_end));
            }
            if (confirmed) {
                arc_finished = false;
                break;
            }
        }
    }
    if (!arc_finished) return ns;

    // ---- upper ray ----
    const double c = std::cos(th_end);   // negative
    const double sn = std::sin(th_end);
    const double decay_target = dead_gap;
    // Per-panel log-width cap: keeps the e^{zs} phase of every still-live s
    // under ~3 radians, since live s satisfy rho |c| s <= decay_target.
    const double ratio_cap = std::min(1.0 / 12.0, 3.0 * (-c) / (decay_target * sn));
    const Complex dir = std::polar(1.0, th_end);
    double rho = gamma;
    alive = true;
    dead_run = 0;
    panels = 0;
    prev_w = gamma * ratio_cap;
    while (true) {
        double width;
        if (alive) {
            double lp = std::abs(ke.eval_L_prime(rho * dir));
            double s_eff = std::min(s_hi, decay_target / std::max(rho * (-c), 1e-290));
            double rate = std::max(s_eff * sn + t * lp, 1e-290);
            width = std::min(rho * ratio_cap, 3.0 / rate);
            width = std::max(width, rho * 1e-7);
        } else {
            width = std::min(prev_w * 2.5, rho * 0.45);
        }
        double p_lo = kNegInf, p_hi = kNegInf;
        for (int q = 0; q < per_panel; ++q) {
            double r = rho + width * pr.nodes[q];
            auto [blo, bhi] = emit(r * dir, dir * (width * pr.weights[q]));
            p_lo = std::max(p_lo, blo);
            p_hi = std::max(p_hi, bhi);
        }
        ns.max_lo = std::max(ns.max_lo, p_lo);
        ns.max_hi = std::max(ns.max_hi, p_hi);
        alive = p_lo >= ns.max_lo - dead_gap || p_hi >= ns.max_hi - dead_gap;
        dead_run = alive ? 0 : dead_run + 1;
        rho += width;
        prev_w = width;
        if (++panels > max_ray)
            throw std::runtime_error("contour refinement cap exceeded on the rays: "
                                     "the transform is too stiff for the configured panel budget");
        if (dead_run >= 3 && rho >= std::max(r_floor, gamma * 4.0)) {
            bool confirmed = true;
            static const double kFactors[] = {4.0, 16.0, 256.0, 1e4, 1e8};
            for (double f : kFactors) {
                if (!confirmed) break;
                confirmed = probe_dead(std::polar(rho * f, th_end));
            }
            if (confirmed) break;
        }
    }
    return ns;
}

// Node multipliers specializing a NodeSet to one integrand family.
struct TaskView {
    std::vector<Complex> mult;  // per-node factor (resolvent denominator / density phase)
    std::vector<double> ext;    // per-node extra real exponent (-t Re L for densities)
};

TaskView density_view(const NodeSet& ns) {
    TaskView tv;
    size_t n = ns.z.size();
    tv.mult.resize(n);
    tv.ext.resize(n);
    for (size_t i = 0; i < n; ++i) {
        tv.ext[i] = -ns.t * ns.L[i].real();
        tv.mult[i] = std::polar(1.0, -ns.t * ns.L[i].imag());
    }
    return tv;
}

TaskView resolvent_view(const NodeSet& ns, double lambda, bool split) {
    TaskView tv;
    size_t n = ns.z.size();
    tv.mult.resize(n);
    tv.ext.assign(n, 0.0);
    for (size_t i = 0; i < n; ++i) {
        Complex d = ns.L[i] - lambda;
        tv.mult[i] = split ? ns.L[i] / (lambda * d) : 1.0 / d;
    }
    return tv;
}

// (1/2 pi i) int f(z) e^{zs} dz over both halves, using conjugate symmetry:
// the sum reduces to (1/pi) sum Im(w_i mant_i) with per-node rescaling.
double point_transform(const NodeSet& ns, const TaskView& tv, double s) {
    size_t n = ns.z.size();
    double m = kNegInf;
    for (size_t i = 0; i < n; ++i)
        m = std::max(m, ns.z[i].real() * s + tv.ext[i]);
    if (!(m > kNegInf) || m < -745.0) return 0.0;
    double acc = 0.0;
    for (size_t i = 0; i < n; ++i) {
        double e = ns.z[i].real() * s + tv.ext[i] - m;
        if (e < -745.0) continue;
        Complex mant = std::polar(std::exp(e), ns.z[i].imag() * s) * tv.mult[i];
        acc += (ns.w[i] * mant).imag();
    }
    return std::exp(m) * acc / kPi;
}

// E0 = int_{s1}^{s2} e^{zb s} ds and E1 = int (s - s1) e^{zb s} ds, both
// scaled by e^{-C}. The closed forms degrade gracefully: when both
// exponentials underflow the difference is exactly 0, and when only the
// upper one survives a cell starting at s1 = 0 leaves the -1/zb remainder
// that decays algebraically along the rays. A short series takes over when
// zb (s2 - s1) is too small for stable cancellation.
inline void cell_e01(const Complex& zb, double s1, double s2, double C,
                     Complex& e0, Complex& e1) {
    double d = s2 - s1;
    Complex wz = zb * d;
    if (std::abs(wz) < 1e-4) {
        Complex base = std::exp(zb * s1 - C);
        e0 = base * d * (1.0 + wz * (0.5 + wz * (1.0 / 6 + wz * (1.0 / 24 + wz * (1.0 / 120)))));
        e1 = base * (d * d) *
             (0.5 + wz * (1.0 / 3 + wz * (0.125 + wz * (1.0 / 30 + wz * (1.0 / 144)))));
        return;
    }
    Complex hi = std::exp(zb * s2 - C);
    Complex lo = std::exp(zb * s1 - C);
    e0 = (hi - lo) / zb;
    e1 = (d * hi - e0) / zb;
}

struct ScaledCell {
    double log_scale = kNegInf;  // cell value = mant * e^{log_scale}
    double mass_mant = 0.0;
    double m1_mant = 0.0;        // first moment about the cell's lower edge
};

struct CellSpec {
    double s1 = 0.0;
    double s2 = 0.0;
    int idx = 0;
};

// Exact per-cell masses/moments of the transform over [s1, s2], shifted by
// e^{-xshift s} when xshift != 0. Cells are independent outputs; the inner
// node sum stays serial and fixed-order, so results are identical at any
// thread count.
std::vector<ScaledCell> cell_transform(const NodeSet& ns, const TaskView& tv,
                                       const std::vector<CellSpec>& cells, double xshift,
                                       Exec mode) {
    std::vector<ScaledCell> out(cells.size());
    size_t n = ns.z.size();
    parallel_for(static_cast<int>(cells.size()), mode, [&](int j) {
        double s1 = cells[j].s1, s2 = cells[j].s2;
        double m = kNegInf;
        for (size_t i = 0; i < n; ++i) {
            double reb = ns.z[i].real() - xshift;
            double cmax = std::max(reb * s1, reb * s2);
            m = std::max(m, cmax + tv.ext[i]);
        }
        if (!(m > kNegInf)) return;
        double am = 0.0, a1 = 0.0;
        for (size_t i = 0; i < n; ++i) {
            Complex zb = ns.z[i] - xshift;
            double cmax = std::max(zb.real() * s1, zb.real() * s2);
            double e = cmax + tv.ext[i] - m;
            if (e < -745.0) continue;
            Complex e0, e1;
            cell_e01(zb, s1, s2, cmax, e0, e1);
            Complex f = tv.mult[i] * std::exp(e);
            am += (ns.w[i] * e0 * f).imag();
            a1 += (ns.w[i] * e1 * f).imag();
        }
        out[j].log_scale = m;
        out[j].mass_mant = am / kPi;
        out[j].m1_mant = a1 / kPi;
    });
    return out;
}

NodeSet resolvent_nodes(const KernelEvaluator& ke, const InverterConfig& cfg, double lambda,
                        double s_lo, double s_hi, double r_floor) {
    double gamma = cfg.gamma;
    double margin = cfg.denominator_margin;
    if (lambda > 0.0) {
        // L is real and increasing on (0, inf): raising the arc radius until
        // L(gamma) clears lambda keeps the real pole inside the bulge.
        double need = 1.25 * lambda + 10.0 * margin;
        for (int i = 0; i < 400 && ke.eval_L(Complex(gamma, 0.0)).real() < need; ++i)
            gamma *= 2.0;
    }
    for (int attempt = 0;; ++attempt) {
        NodeSet ns = build_nodes(ke, gamma, cfg.omega, 0.0, s_lo, s_hi, r_floor,
                                 cfg.truncation_tol, cfg.points_per_panel,
                                 cfg.max_arc_panels, cfg.max_ray_panels);
        double dmin = std::numeric_limits<double>::infinity();
        for (const Complex& Lz : ns.L) dmin = std::min(dmin, std::abs(Lz - lambda));
        if (dmin >= margin) return ns;
        if (attempt >= cfg.max_gamma_doublings)
            throw std::runtime_error("resolvent evaluation failed: the spectral parameter stays "
                                     "within the denominator margin of the symbol range after "
                                     "the configured arc enlargements");
        gamma *= 2.0;
    }
}

} // namespace

HookContour build_contour(double gamma, double omega, double target_s, double tolerance,
                          int points_per_panel) {
    if (!(gamma > 0.0)) throw std::invalid_argument("contour radius must be positive");
    if (!(omega > 0.5) || !(omega < 1.0))
        throw std::invalid_argument("contour angle parameter must lie in (1/2, 1)");
    if (!(target_s > 0.0)) throw std::invalid_argument("contour target time must be positive");
    if (!(tolerance > 0.0) || !(tolerance < 0.5))
        throw std::invalid_argument("contour tolerance must lie in (0, 1/2)");
    if (points_per_panel < 2) throw std::invalid_argument("need at least 2 points per panel");

    const double th = omega * kPi;
    const double c = std::cos(th);  // negative
    HookContour out;
    out.gamma = gamma;
    out.omega = omega;
    out.ray_truncation = std::max(2.0 * gamma, std::log(1.0 / tolerance) / (target_s * (-c)));

    const QuadratureRule pr = QuadratureRule::gauss_legendre(points_per_panel, 0.0, 1.0);
    const double R = out.ray_truncation;
    const int nray = std::max(4, static_cast<int>(std::ceil(std::log(R / gamma) / std::log(13.0 / 12.0))));
    const int narc = static_cast<int>(std::ceil(std::max(6.0, 1.2 * gamma * target_s + 4.0)));

    auto ray_edge = [&](int k) { return gamma * std::pow(R / gamma, double(k) / nray); };

    // Incoming lower ray: rho descends R -> gamma, dz = e^{-i omega pi} drho
    // against the direction of descent.
    const Complex dlo = std::polar(1.0, -th);
    for (int p = nray - 1; p >= 0; --p) {
        double a = ray_edge(p), b = ray_edge(p + 1), width = b - a;
        for (int q = points_per_panel - 1; q >= 0; --q) {
            double rho = a + width * pr.nodes[q];
            out.nodes.push_back(rho * dlo);
            out.dz_weights.push_back(-dlo * (width * pr.weights[q]));
        }
    }
    // Arc: theta ascends -omega pi -> omega pi, dz = i z dtheta.
    const double awidth = 2.0 * th / narc;
    for (int p = 0; p < narc; ++p) {
        double t0 = -th + awidth * p;
        for (int q = 0; q < points_per_panel; ++q) {
            Complex zz = std::polar(gamma, t0 + awidth * pr.nodes[q]);
            out.nodes.push_back(zz);
            out.dz_weights.push_back(Complex(0.0, 1.0) * zz * (awidth * pr.weights[q]));
        }
    }
    // Outgoing upper ray.
    const Complex dhi = std::polar(1.0, th);
    for (int p = 0; p < nray; ++p) {
        double a = ray_edge(p), b = ray_edge(p + 1), width = b - a;
        for (int q = 0; q < points_per_panel; ++q) {
            double rho = a + width * pr.nodes[q];
            out.nodes.push_back(rho * dhi);
            out.dz_weights.push_back(dhi * (width * pr.weights[q]));
        }
    }
    return out;
}

Complex integrate_contour(const HookContour& c, const std::function<Complex(Complex)>& f) {
    if (c.nodes.size() != c.dz_weights.size())
        throw std::invalid_argument("contour nodes and weights disagree in length");
    Complex acc(0.0, 0.0);
    for (size_t i = 0; i < c.nodes.size(); ++i) acc += c.dz_weights[i] * f(c.nodes[i]);
    return acc / Complex(0.0, 2.0 * kPi);
}

ContourInverter::ContourInverter(KernelEvaluator ke, InverterConfig cfg)
    : ke_(std::move(ke)), cfg_(cfg) {
    if (!(cfg_.gamma > 0.0)) throw std::invalid_argument("arc radius must be positive");
    if (!(cfg_.omega > 0.5) || !(cfg_.omega < 1.0))
        throw std::invalid_argument("ray angle parameter must lie in (1/2, 1)");
    if (!(cfg_.omega_density > 0.5) || !(cfg_.omega_density < 1.0))
        throw std::invalid_argument("density ray angle parameter must lie in (1/2, 1)");
    if (!(cfg_.truncation_tol > 0.0) || !(cfg_.truncation_tol < 0.1))
        throw std::invalid_argument("truncation tolerance must lie in (0, 0.1)");
    if (!(cfg_.denominator_margin > 0.0))
        throw std::invalid_argument("denominator margin must be positive");
    if (cfg_.points_per_panel < 4)
        throw std::invalid_argument("need at least 4 points per panel");
}

double ContourInverter::eval_r_lambda(double lambda, double s) const {
    if (!(s > 0.0)) throw std::invalid_argument("resolvent kernel needs s > 0");
    NodeSet ns = resolvent_nodes(ke_, cfg_, lambda, s, s, 0.0);
    TaskView tv = resolvent_view(ns, lambda, false);
    return point_transform(ns, tv, s);
}

std::vector<double> ContourInverter::eval_r_lambda_batch(double lambda,
                                                         const std::vector<double>& s) const {
    if (s.empty()) return {};
    double s_lo = std::numeric_limits<double>::infinity(), s_hi = 0.0;
    for (double v : s) {
        if (!(v > 0.0)) throw std::invalid_argument("resolvent kernel needs s > 0");
        s_lo = std::min(s_lo, v);
        s_hi = std::max(s_hi, v);
    }
    NodeSet ns = resolvent_nodes(ke_, cfg_, lambda, s_lo, s_hi, 0.0);
    TaskView tv = resolvent_view(ns, lambda, false);
    std::vector<double> out(s.size());
    parallel_for(static_cast<int>(s.size()), Exec::parallel,
                 [&](int i) { out[i] = point_transform(ns, tv, s[i]); });
    return out;
}

double ContourInverter::eval_r_lambda_split(double lambda, double s) const {
    if (!(s > 0.0)) throw std::invalid_argument("resolvent kernel needs s > 0");
    if (lambda == 0.0)
        throw std::invalid_argument("split resolvent form needs lambda != 0");
    NodeSet ns = resolvent_nodes(ke_, cfg_, lambda, s, s, 0.0);
    TaskView tv = resolvent_view(ns, lambda, true);
    return point_transform(ns, tv, s);
}

double ContourInverter::eval_kappa(double t) const {
    if (!(t > 0.0)) throw std::invalid_argument("kappa is evaluated at t > 0 only");
    return eval_r_lambda(0.0, t);
}

std::vector<double> ContourInverter::eval_kappa_batch(const std::vector<double>& t) const {
    return eval_r_lambda_batch(0.0, t);
}

ContourInverter::CellTable ContourInverter::r_lambda_cells(double lambda,
                                                           const std::vector<double>& edges,
                                                           Exec mode) const {
    if (edges.size() < 2) throw std::invalid_argument("cell table needs at least two edges");
    if (!(edges.front() >= 0.0)) throw std::invalid_argument("cell edges must be nonnegative");
    for (size_t j = 1; j < edges.size(); ++j)
        if (!(edges[j] > edges[j - 1]))
            throw std::invalid_argument("cell edges must be strictly increasing");
    double s_lo = edges.front() > 0.0 ? edges.front() : edges[1];
    double s_hi = edges.back();
    double r_floor = edges.front() == 0.0 ? 2e15 : 0.0;
    NodeSet ns = resolvent_nodes(ke_, cfg_, lambda, s_lo, s_hi, r_floor);
    TaskView tv = resolvent_view(ns, lambda, false);
    size_t m = edges.size() - 1;
    std::vector<CellSpec> cells(m);
    for (size_t j = 0; j < m; ++j)
        cells[j] = {edges[j], edges[j + 1], static_cast<int>(j)};
    std::vector<ScaledCell> sc = cell_transform(ns, tv, cells, 0.0, mode);
    CellTable out;
    out.mass.resize(m);
    out.moment1.resize(m);
    for (size_t j = 0; j < m; ++j) {
        double scale = std::exp(sc[j].log_scale);
        out.mass[j] = scale * sc[j].mass_mant;
        out.moment1[j] = scale * sc[j].m1_mant;
    }
    return out;
}

double ContourInverter::feasible_s_floor(double t) const {
    if (!(t > 0.0)) throw std::invalid_argument("the feasibility floor needs t > 0");
    double th = cfg_.omega_density * kPi;
    double mu1 = ke_.weight()(1.0);
    return 1.15 * t * mu1 * (-std::cos(th)) / (4.0 * th * std::sin(th));
}

double ContourInverter::saddle_point(double t, double s) const {
    if (!(t > 0.0) || !(s > 0.0))
        throw std::invalid_argument("saddle point needs t > 0 and s > 0");
    // t L'(x) - s is strictly decreasing in x; bisect on ln x.
    double lo = -600.0, hi = 600.0;
    auto f = [&](double lx) {
        return t * ke_.eval_L_prime(Complex(std::exp(lx), 0.0)).real() - s;
    };
    if (f(hi) > 0.0) return std::exp(hi);
    if (f(lo) < 0.0) return std::exp(lo);
    for (int i = 0; i < 80; ++i) {
        double mid = 0.5 * (lo + hi);
        (f(mid) > 0.0 ? lo : hi) = mid;
    }
    return std::exp(0.5 * (lo + hi));
}

double ContourInverter::legendre_exponent(double t, double s) const {
    double x = saddle_point(t, s);
    double lx = std::log(x);
    // Saddles beyond e^200 certify exponents below -t e^200 / ln^2(x):
    // unconditionally dead at any tolerance this library exposes.
    if (lx > 200.0) return -1e300;
    return x * s - t * ke_.eval_L(Complex(x, 0.0)).real();
}

double ContourInverter::eval_m(double t, double s) const {
    if (!(t > 0.0) || !(s > 0.0))
        throw std::invalid_argument("density evaluation needs t > 0 and s > 0");
    double floor = feasible_s_floor(t);
    if (s < floor) {
        double phi = legendre_exponent(t, s);
        if (phi < -700.0) return 0.0;  // true value underflows double precision
        throw std::runtime_error("density evaluation not resolvable: s lies below the feasible "
                                 "window at this t, where the hook integrand stops decaying "
                                 "before the quadrature converges");
    }
    double gamma = std::clamp(saddle_point(t, s), 1e-290, 1e290);
    NodeSet ns = build_nodes(ke_, gamma, cfg_.omega_density, t, s, s, 0.0,
                             cfg_.truncation_tol, cfg_.points_per_panel,
                             cfg_.max_arc_panels, cfg_.max_ray_panels);
    TaskView tv = density_view(ns);
    return point_transform(ns, tv, s);
}

ContourInverter::CellTable ContourInverter::m_cells(double t, const std::vector<double>& edges,
                                                    Exec mode) const {
    if (!(t > 0.0)) throw std::invalid_argument("density cells need t > 0");
    if (edges.size() < 2) throw std::invalid_argument("cell table needs at least two edges");
    if (!(edges.front() >= 0.0)) throw std::invalid_argument("cell edges must be nonnegative");
    for (size_t j = 1; j < edges.size(); ++j)
        if (!(edges[j] > edges[j - 1]))
            throw std::invalid_argument("cell edges must be strictly increasing");

    size_t m = edges.size() - 1;
    CellTable out;
    out.mass.assign(m, 0.0);
    out.moment1.assign(m, 0.0);

    double floor = feasible_s_floor(t);
    std::vector<double> lo(m), hi(m), phi(m, kNegInf);
    std::vector<char> open(m, 0);
    for (size_t j = 0; j < m; ++j) {
        lo[j] = std::max(edges[j], floor);
        hi[j] = edges[j + 1];
        open[j] = hi[j] > lo[j] * (1.0 + 1e-15) ? 1 : 0;
    }
    parallel_for(static_cast<int>(m), mode, [&](int j) {
        if (open[j]) phi[j] = legendre_exponent(t, hi[j]);
    });
    double big = kNegInf;
    for (size_t j = 0; j < m; ++j)
        if (open[j]) big = std::max(big, phi[j]);
    if (!(big > kNegInf)) return out;

    std::vector<CellSpec> cells;
    double s_lo = std::numeric_limits<double>::infinity(), s_hi = 0.0;
    for (size_t j = 0; j < m; ++j) {
        if (!open[j] || phi[j] < big - kCellFolds) continue;
        if (!(lo[j] > 0.0))
            throw std::runtime_error("density cell tables need a positive lower edge: with this "
                                     "weight the hook integrand does not decay over a cell that "
                                     "touches s = 0");
        cells.push_back({lo[j], hi[j], static_cast<int>(j)});
        s_lo = std::min(s_lo, lo[j]);
        s_hi = std::max(s_hi, hi[j]);
    }
    if (cells.empty()) return out;

    double gamma = std::clamp(saddle_point(t, s_hi), 1e-290, 1e290);
    NodeSet ns = build_nodes(ke_, gamma, cfg_.omega_density, t, s_lo, s_hi, 0.0,
                             cfg_.truncation_tol, cfg_.points_per_panel,
                             cfg_.max_arc_panels, cfg_.max_ray_panels);
    TaskView tv = density_view(ns);
    std::vector<ScaledCell> sc = cell_transform(ns, tv, cells, 0.0, mode);
    for (size_t q = 0; q < cells.size(); ++q) {
        int j = cells[q].idx;
        double scale = std::exp(sc[q].log_scale);
        double mass = scale * sc[q].mass_mant;
        // Moments are reported about edges[j] even when the integration was
        // clipped to the feasibility floor.
        out.mass[j] = mass;
        out.moment1[j] = scale * sc[q].m1_mant + (lo[j] - edges[j]) * mass;
    }
    return out;
}

namespace {

std::vector<double> geometric_edges(double lo, double hi, int cells) {
    std::vector<double> e(cells + 1);
    for (int k = 0; k <= cells; ++k)
        e[k] = lo * std::pow(hi / lo, double(k) / cells);
    e.front() = lo;
    e.back() = hi;
    return e;
}

} // namespace

double ContourInverter::m_mass(double t, double lo, double hi) const {
    if (!(t > 0.0)) throw std::invalid_argument("density mass needs t > 0");
    if (!(hi > lo) || !(lo >= 0.0))
        throw std::invalid_argument("density mass needs 0 <= lo < hi");
    double floor = feasible_s_floor(t);
    double lo_eff = std::max(lo, floor);
    if (!(hi > lo_eff)) {
        double phi = legendre_exponent(t, hi);
        if (phi < -700.0) return 0.0;
        throw std::runtime_error("density mass not resolvable: the window lies entirely below "
                                 "the feasible floor at this t");
    }
    CellTable table = m_cells(t, geometric_edges(lo_eff, hi, 64), Exec::parallel);
    double acc = 0.0;
    for (double v : table.mass) acc += v;
    return acc;
}

double ContourInverter::m_mass_weighted(double t, double x, double lo, double hi) const {
    if (!(t > 0.0)) throw std::invalid_argument("density mass needs t > 0");
    if (!(x >= 0.0)) throw std::invalid_argument("exponential tilt must be nonnegative");
    if (!(hi > lo) || !(lo >= 0.0))
        throw std::invalid_argument("density mass needs 0 <= lo < hi");
    double floor = feasible_s_floor(t);
    double lo_eff = std::max(lo, floor);
    if (!(hi > lo_eff)) {
        double phi = legendre_exponent(t, hi);
        if (phi - x * lo < -700.0) return 0.0;
        throw std::runtime_error("weighted density mass not resolvable below the feasible floor");
    }
    std::vector<double> edges = geometric_edges(lo_eff, hi, 64);
    size_t m = edges.size() - 1;

    // Tilted liveness bound: phi*(hi_j) - x lo_j caps the cell contribution.
    std::vector<double> bound(m);
    parallel_for(static_cast<int>(m), Exec::parallel, [&](int j) {
        bound[j] = legendre_exponent(t, edges[j + 1]) - x * edges[j];
    });
    double big = kNegInf;
    for (double b : bound) big = std::max(big, b);
    if (!(big > kNegInf) || big < -700.0) return 0.0;

    std::vector<CellSpec> cells;
    double s_lo = std::numeric_limits<double>::infinity(), s_hi = 0.0;
    for (size_t j = 0; j < m; ++j) {
        if (bound[j] < big - kCellFolds) continue;
        cells.push_back({edges[j], edges[j + 1], static_cast<int>(j)});
        s_lo = std::min(s_lo, edges[j]);
        s_hi = std::max(s_hi, edges[j + 1]);
    }
    double gamma = std::clamp(saddle_point(t, s_hi), 1e-290, 1e290);
    NodeSet ns = build_nodes(ke_, gamma, cfg_.omega_density, t, s_lo, s_hi, 0.0,
                             cfg_.truncation_tol, cfg_.points_per_panel,
                             cfg_.max_arc_panels, cfg_.max_ray_panels);
    TaskView tv = density_view(ns);
    std::vector<ScaledCell> sc = cell_transform(ns, tv, cells, x, Exec::parallel);
    double acc = 0.0;
    for (const ScaledCell& c : sc) acc += std::exp(c.log_scale) * c.mass_mant;
    return acc;
}

double ContourInverter::log_m_mass(double t, double hi) const {
    if (!(t > 0.0) || !(hi > 0.0))
        throw std::invalid_argument("log density mass needs t > 0 and hi > 0");
    double floor = feasible_s_floor(t);
    if (!(hi > floor))
        throw std::runtime_error("log density mass not resolvable: the window lies entirely "
                                 "below the feasible floor at this t");
    double lo_eff = std::max(floor, hi * 1e-12);
    std::vector<double> edges = geometric_edges(lo_eff, hi, 64);
    size_t m = edges.size() - 1;
    std::vector<double> phi(m);
    parallel_for(static_cast<int>(m), Exec::parallel,
                 [&](int j) { phi[j] = legendre_exponent(t, edges[j + 1]); });
    double big = kNegInf;
    for (double p : phi) big = std::max(big, p);

    std::vector<CellSpec> cells;
    double s_lo = std::numeric_limits<double>::infinity(), s_hi = 0.0;
    for (size_t j = 0; j < m; ++j) {
        if (phi[j] < big - kCellFolds) continue;
        cells.push_back({edges[j], edges[j + 1], static_cast<int>(j)});
        s_lo = std::min(s_lo, edges[j]);
        s_hi = std::max(s_hi, edges[j + 1]);
    }
    double gamma = std::clamp(saddle_point(t, s_hi), 1e-290, 1e290);
    NodeSet ns = build_nodes(ke_, gamma, cfg_.omega_density, t, s_lo, s_hi, 0.0,
                             cfg_.truncation_tol, cfg_.points_per_panel,
                             cfg_.max_arc_panels, cfg_.max_ray_panels);
    TaskView tv = density_view(ns);
    std::vector<ScaledCell> sc = cell_transform(ns, tv, cells, 0.0, Exec::parallel);
    double mx = kNegInf;
    for (const ScaledCell& c : sc) mx = std::max(mx, c.log_scale);
    if (!(mx > kNegInf))
        throw std::runtime_error("log density mass lost below quadrature noise");
    double acc = 0.0;
    for (const ScaledCell& c : sc) acc += c.mass_mant * std::exp(c.log_scale - mx);
    if (!(acc > 0.0))
        throw std::runtime_error("log density mass lost below quadrature noise");
    return mx + std::log(acc);
}

SampledFunction ContourInverter::semigroup_apply(double t, const SampledFunction& u,
                                                 Exec mode) const {
    const Grid& g = u.grid;
    if (u.values.size() != static_cast<size_t>(g.n) + 1)
        throw std::invalid_argument("sampled function length disagrees with its grid");
    std::vector<double> edges(g.n + 1);
    for (int j = 0; j <= g.n; ++j) edges[j] = g.node(j);
    edges[0] = 0.0;
    CellTable table = m_cells(t, edges, mode);
    SampledFunction out;
    out.grid = g;
    out.values.assign(g.n + 1, 0.0);
    double h = g.h();
    parallel_for(g.n, mode, [&](int k) {
        int i = k + 1;
        double acc = 0.0;
        for (int j = 0; j < i; ++j) {
            double fr = u.values[i - j];
            double slope = (u.values[i - j - 1] - fr) / h;
            acc += fr * table.mass[j] + slope * table.moment1[j];
        }
        out.values[i] = acc;
    });
    return out;
}

double ContourInverter::closed_contour_unit_defect(double s) const {
    HookContour c = build_contour(cfg_.gamma, cfg_.omega, s, cfg_.truncation_tol,
                                  cfg_.points_per_panel);
    Complex v = integrate_contour(c, [&](Complex z) { return std::exp(z * s); });
    return std::abs(v);
}

} // namespace docalc
