#pragma once

#include <string>
#include <vector>

#include "docalc/contour.hpp"
#include "docalc/grid.hpp"
#include "docalc/kernels.hpp"
#include "docalc/parallel.hpp"

namespace docalc {

// Dense lower-triangular matrix over the interior nodes t_1..t_n of a
// uniform grid; the value at t_0 = 0 is pinned by the boundary condition.
struct TriangularMatrix {
    int n = 0;
    double h = 1.0;
    std::vector<double> a;  // row-major n*n; entries above the diagonal stay 0

    double& at(int i, int j) { return a[static_cast<size_t>(i) * n + j]; }
    double at(int i, int j) const { return a[static_cast<size_t>(i) * n + j]; }
    static TriangularMatrix zero(int n, double h);
    static TriangularMatrix identity(int n, double h);
};

// Backward-difference discretization of -d/dt with u(0) = 0: lower
// bidiagonal, (A u)_i = -(u_i - u_{i-1})/h.
TriangularMatrix build_A(const Grid& g);
// Cumulative quadrature: the rectangle form is exactly (-A_h)^{-1}; the
// trapezoid variant trades the exact pairing for pointwise accuracy.
TriangularMatrix build_J(const Grid& g, bool trapezoid = false);
// Discretized resolvent kernel -h e^{-lambda h (i-j)}, i >= j.
TriangularMatrix resolvent_A_kernel(double lambda, const Grid& g);
// Lower-Toeplitz causal convolution matrix from per-cell kernel masses,
// pairing with the rectangle quadrature convention of build_J.
TriangularMatrix conv_toeplitz(const std::vector<double>& cell_mass, const Grid& g);

TriangularMatrix scaled(const TriangularMatrix& m, double c);
TriangularMatrix mat_add(const TriangularMatrix& x, const TriangularMatrix& y, double cy = 1.0);
TriangularMatrix mat_mul(const TriangularMatrix& x, const TriangularMatrix& y);
std::vector<double> mat_vec(const TriangularMatrix& m, const std::vector<double>& v);
std::vector<double> tri_solve(const TriangularMatrix& m, const std::vector<double>& b);
TriangularMatrix tri_inverse(const TriangularMatrix& m);

double frobenius_norm(const TriangularMatrix& m);
// True l2 operator norm (largest singular value) via a full symmetric
// eigensolve of M^T M; meant for the desk-scale dimensions used here.
double operator_norm(const TriangularMatrix& m);
// Smallest eigenvalue of the symmetrization M + M^T (not halved).
double min_symmetric_eigenvalue(const TriangularMatrix& m);

// e^{-tG} by scaling and squaring around a Taylor core.
TriangularMatrix mat_exp_neg(const TriangularMatrix& g, double t);

// Stieltjes functional calculus on a lower-triangular matrix:
//   H(V) = sum_i w_i V (I + lambda_i V)^{-1}  (+ analytic tail corrections
// low0 V - low1 V^2 + high1 I - high2 V^{-1} when the rule carries them).
// Columns are independent and parallelize; Toeplitz bidiagonal and uniform
// lower-Toeplitz V get O(n) shifted solves.
TriangularMatrix hirsch_apply(const TriangularMatrix& v, const StieltjesRule& rule,
                              Exec mode = Exec::parallel);

struct ResidualReport {
    std::string theorem;
    int n = 0;
    int rule_nodes = 0;
    double residual = 0.0;
    double numerator = 0.0;
    double denominator = 0.0;
    std::string note;  // failure diagnostics, e.g. a condition estimate
};

// Inversion-identity check: || [H(-A_h)]^{-1} - I_h || / || I_h || in the
// Frobenius norm, with I_h the kappa-convolution Toeplitz matrix.
ResidualReport verify_inversion_identity(const KernelEvaluator& ke, const Grid& g,
                                         const StieltjesRule& rule, const InverterConfig& cfg);

struct DecayReport {
    std::vector<double> t;
    std::vector<double> log_norm_over_t;
    bool strictly_decreasing = false;
};

// Builds G = H(-A_h) and reports ln ||e^{-tG}|| / t over t_list: a desk-scale
// surrogate for faster-than-exponential semigroup decay.
DecayReport semigroup_decay_report(const Grid& g, const StieltjesRule& rule,
                                   const std::vector<double>& t_list);

} // namespace docalc
