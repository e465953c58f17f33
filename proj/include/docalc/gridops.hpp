#pragma once

#include <string>
#include <vector>

#include "docalc/contour.hpp"
#include "docalc/grid.hpp"
#include "docalc/kernels.hpp"
#include "docalc/parallel.hpp"
#include "docalc/quadrature.hpp"

namespace docalc {

// Causal convolution on a uniform grid against a kernel described by exact
// per-cell masses and first moments; lower-triangular by construction.
struct ConvolutionOperator {
    Grid grid;
    std::vector<double> mass;     // mass[j]    = integral of the kernel over [t_j, t_{j+1}]
    std::vector<double> moment1;  // moment1[j] = integral of (s - t_j) * kernel over the cell
    std::string kernel_tag;

    // (kernel * f)(t_i) with f piecewise linear between grid nodes; out[0] = 0.
    std::vector<double> apply_linear(const std::vector<double>& f,
                                     Exec mode = Exec::parallel) const;
    // (kernel * f')(t_i) with f' piecewise constant per cell; out[0] = 0.
    std::vector<double> apply_to_derivative(const std::vector<double>& f,
                                            Exec mode = Exec::parallel) const;
};

// Cell tables for the three kernels the library convolves with.
ConvolutionOperator k_convolution(const KernelEvaluator& ke, const Grid& g);
ConvolutionOperator kappa_convolution(const ContourInverter& inv, const Grid& g,
                                      Exec mode = Exec::parallel);
ConvolutionOperator r_lambda_convolution(const ContourInverter& inv, double lambda, const Grid& g,
                                         Exec mode = Exec::parallel);

// Single-order Caputo derivative of order alpha in [0, 1) by product
// integration exact for piecewise-linear input; out[0] = 0.
std::vector<double> caputo_derivative(double alpha, const SampledFunction& f);

// Distributed-order derivative: convolution form k * f'.
std::vector<double> dist_derivative_conv(const KernelEvaluator& ke, const SampledFunction& f,
                                         Exec mode = Exec::parallel);
// Distributed-order derivative: weighted single-order stack over an order
// quadrature whose nodes must lie strictly inside (0, 1).
std::vector<double> dist_derivative_spectral(const KernelEvaluator& ke, const SampledFunction& f,
                                             const QuadratureRule& alpha_rule,
                                             Exec mode = Exec::parallel);
std::vector<double> dist_derivative_spectral(const KernelEvaluator& ke, const SampledFunction& f,
                                             int alpha_points = 48, Exec mode = Exec::parallel);
// Distributed-order derivative: jump form k(x)f(x) + int [f(x-s) - f(x)] k'(s) ds,
// exact per cell for piecewise-linear f. Requires f(0) = 0.
std::vector<double> dist_derivative_bp(const KernelEvaluator& ke, const SampledFunction& f,
                                       Exec mode = Exec::parallel);
// Distributed-order derivative: d/dt (k * f) - k(t) f(0), with the outer
// derivative taken by 5-point finite differences (one-sided at the ends).
std::vector<double> dist_derivative_def4(const KernelEvaluator& ke, const SampledFunction& f,
                                         Exec mode = Exec::parallel);

// Left-inverse of the derivative: convolution with the kernel kappa.
std::vector<double> dist_integral(const ContourInverter& inv, const SampledFunction& f,
                                  Exec mode = Exec::parallel);

// March the convolution form of D u = lambda u + f with u(0) = u0.
SampledFunction solve_eigen(const KernelEvaluator& ke, const Grid& g, double lambda, double u0,
                            const std::vector<double>& f = {});

// u(t) = (r_lambda * f)(t): the Duhamel solution kernel applied to f.
std::vector<double> resolvent_apply(const ContourInverter& inv, double lambda,
                                    const SampledFunction& f, Exec mode = Exec::parallel);
// Resolvent of the integral operator J: (J - lambda)^{-1} f computed as
// -f/lambda - (1/lambda^2) (r_{1/lambda} * f); lambda = 0 is rejected.
std::vector<double> integral_resolvent_apply(const ContourInverter& inv, double lambda,
                                             const SampledFunction& f,
                                             Exec mode = Exec::parallel);

// First-derivative finite-difference weights at evaluation offset 0 for
// arbitrary node offsets (in grid-step units).
std::vector<double> fd_weights_d1(const std::vector<double>& offsets);

} // namespace docalc
