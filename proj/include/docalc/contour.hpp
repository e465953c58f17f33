#pragma once

#include <functional>
#include <vector>

#include "docalc/grid.hpp"
#include "docalc/kernels.hpp"
#include "docalc/parallel.hpp"

namespace docalc {

// Deformed inversion path: circular arc of radius gamma joined to two rays
// at angles +-omega*pi, omega in (1/2, 1). Nodes are listed by increasing
// arg z: incoming lower ray, arc, outgoing upper ray.
struct HookContour {
    double gamma = 1.0;
    double omega = 0.75;
    double ray_truncation = 1.0;
    std::vector<Complex> nodes;
    std::vector<Complex> dz_weights;
};

// Fixed-truncation contour: R solves e^{R s cos(omega pi)} = tolerance (and
// R >= 2 gamma), with geometric ray panels and an arc resolved against the
// oscillation scale gamma*s.
HookContour build_contour(double gamma, double omega, double target_s, double tolerance,
                          int points_per_panel = 12);

// (1/(2 pi i)) * sum of f over the contour nodes.
Complex integrate_contour(const HookContour& c, const std::function<Complex(Complex)>& f);

struct InverterConfig {
    double gamma = 1.0;             // arc radius floor for resolvent kernels
    double omega = 0.75;            // ray angle / pi for resolvent kernels
    // Ray angle used when the integrand carries exp(-t L(z)). Along a ray at
    // angle theta the exponent behaves like
    //   rho [ s cos(theta) + t mu(1) (|cos theta| ln(rho) - theta sin(theta)) / ln^2(rho) ],
    // which is eventually positive unless s >= t mu(1) |cos theta| / (4 theta
    // sin theta). A flatter hook shrinks that infeasible window ~7x versus
    // omega = 0.75, at the cost of slower (but still exponential) ray decay.
    double omega_density = 0.55;
    double truncation_tol = 1e-12;  // relative magnitude kept on the path
    double denominator_margin = 1e-6; // minimum |L(z) - lambda| on nodes
    int points_per_panel = 12;
    int max_gamma_doublings = 6;
    int max_arc_panels = 8000;
    int max_ray_panels = 8000;
};

// Inverse Laplace transforms on the hook contour for one kernel evaluator:
// the integral kernel kappa, resolvent kernels r_lambda, the subordination
// density m(t, s), and integrals of m. Immutable and safe for concurrent
// use; batch entry points parallelize over independent outputs only.
class ContourInverter {
public:
    explicit ContourInverter(KernelEvaluator ke, InverterConfig cfg = {});

    const KernelEvaluator& kernel() const { return ke_; }
    const InverterConfig& config() const { return cfg_; }

    // r_lambda(s) = (1/2 pi i) int e^{zs} / (L(z) - lambda) dz. For lambda
    // near/inside the range of L on the path, gamma is doubled until the
    // denominator margin holds; failure raises a runtime error.
    double eval_r_lambda(double lambda, double s) const;
    std::vector<double> eval_r_lambda_batch(double lambda, const std::vector<double>& s) const;
    // Same kernel through (1/lambda) int e^{zs} L/(L - lambda) dz.
    double eval_r_lambda_split(double lambda, double s) const;

    // kappa = r_0 (the convolution kernel inverse to k * d/dt).
    double eval_kappa(double t) const;
    std::vector<double> eval_kappa_batch(const std::vector<double>& t) const;

    // Cell masses and first moments (about each cell's left edge) of
    // r_lambda over consecutive cells [edges[j], edges[j+1]]; one shared
    // contour serves the whole table. edges[0] = 0 is allowed.
    struct CellTable {
        std::vector<double> mass;
        std::vector<double> moment1;
    };
    CellTable r_lambda_cells(double lambda, const std::vector<double>& edges,
                             Exec mode = Exec::parallel) const;

    // Subordination density m(t, s) (inverse transform of e^{-t L}). Below
    // feasible_s_floor(t) the value is super-exponentially small: it is
    // returned as 0 when it underflows double precision and rejected with a
    // runtime error otherwise (the contour quadrature cannot resolve it).
    double eval_m(double t, double s) const;

    // Smallest s at which the density is directly computable at this t;
    // everything to the left carries e^{-1e6}-scale mass or less.
    double feasible_s_floor(double t) const;

    // Cell masses/first moments of m(t, .) over [edges[j], edges[j+1]],
    // clipped to the feasible floor; moments stay relative to edges[j].
    // Cells whose upper Legendre bound sits 60+ e-folds below the batch
    // maximum are zeroed analytically instead of being summed as noise.
    CellTable m_cells(double t, const std::vector<double>& edges,
                      Exec mode = Exec::parallel) const;

    // int_{lo}^{hi} m(t, s) ds over a geometric subdivision.
    double m_mass(double t, double lo, double hi) const;
    // int_{lo}^{hi} e^{-x s} m(t, s) ds.
    double m_mass_weighted(double t, double x, double lo, double hi) const;
    // ln of int_0^hi m(t, s) ds, stable when the mass underflows double.
    double log_m_mass(double t, double hi) const;

    // (U_t u)(x) = int_0^x u(x - s) m(t, s) ds on u's grid.
    SampledFunction semigroup_apply(double t, const SampledFunction& u,
                                    Exec mode = Exec::parallel) const;

    // |(1/2 pi i) int e^{zs} dz| over the truncated default contour
    // (analytically zero; measures truncation + quadrature quality).
    double closed_contour_unit_defect(double s) const;

    // Saddle x solving t L'(x) = s (unique; L' is strictly decreasing) and
    // the Legendre exponent phi*(t,s) = x s - t L(x) bounding ln m(t,s).
    double saddle_point(double t, double s) const;
    double legendre_exponent(double t, double s) const;

private:
    KernelEvaluator ke_;
    InverterConfig cfg_;
};

} // namespace docalc
