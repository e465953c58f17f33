#pragma once

#include <cstddef>
#include <vector>

namespace docalc {

// Nodes and weights for a definite integral over a fixed interval.
struct QuadratureRule {
    std::vector<double> nodes;
    std::vector<double> weights;

    // n-point Gauss-Legendre rule on [a, b]; nodes are strictly interior.
    static QuadratureRule gauss_legendre(int n, double a = 0.0, double b = 1.0);

    // per_panel-point Gauss-Legendre on every [breaks[i], breaks[i+1]].
    static QuadratureRule composite(const std::vector<double>& breaks, int per_panel);

    // Panels on [a, b] whose widths shrink geometrically toward a (factor
    // `shrink` per step); for integrable endpoint singularities at a.
    static QuadratureRule geometric_toward(double a, double b, int panels, double shrink,
                                           int per_panel);

    template <class F>
    double integrate(F&& f) const {
        double acc = 0.0;
        for (std::size_t i = 0; i < nodes.size(); ++i) acc += weights[i] * f(nodes[i]);
        return acc;
    }

    std::size_t size() const { return nodes.size(); }
};

} // namespace docalc
