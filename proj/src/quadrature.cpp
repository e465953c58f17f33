#include "docalc/quadrature.hpp"

#include <cmath>
#include <stdexcept>

namespace docalc {

QuadratureRule QuadratureRule::gauss_legendre(int n, double a, double b) {
    if (n < 1) throw std::invalid_argument("gauss_legendre: node count must be positive");
    if (!(b > a)) throw std::invalid_argument("gauss_legendre: empty interval");
    const double pi = std::acos(-1.0);
    QuadratureRule r;
    r.nodes.resize(n);
    r.weights.resize(n);
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    const int m = (n + 1) / 2;
    for (int i = 0; i < m; ++i) {
        // Newton iteration on P_n from the Tricomi initial guess.
        double x = std::cos(pi * (i + 0.75) / (n + 0.5));
        double dp = 1.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n == 1 ? 1.0 : n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        const double w = 2.0 * half / ((1.0 - x * x) * dp * dp);
        r.nodes[i] = mid - half * x;
        r.nodes[n - 1 - i] = mid + half * x;
        r.weights[i] = w;
        r.weights[n - 1 - i] = w;
    }
    if (n % 2 == 1) r.nodes[n / 2] = mid; // kill the odd-n rounding residue
    return r;
}

QuadratureRule QuadratureRule::composite(const std::vector<double>& breaks, int per_panel) {
    if (breaks.size() < 2) throw std::invalid_argument("composite: need at least one panel");
    QuadratureRule r;
    for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
        if (!(breaks[i + 1] > breaks[i]))
            throw std::invalid_argument("composite: breaks must be strictly increasing");
        QuadratureRule p = gauss_legendre(per_panel, breaks[i], breaks[i + 1]);
        r.nodes.insert(r.nodes.end(), p.nodes.begin(), p.nodes.end());
        r.weights.insert(r.weights.end(), p.weights.begin(), p.weights.end());
    }
    return r;
}

QuadratureRule QuadratureRule::geometric_toward(double a, double b, int panels, double shrink,
                                                int per_panel) {
    if (!(b > a)) throw std::invalid_argument("geometric_toward: empty interval");
    if (panels < 1 || !(shrink > 0.0) || !(shrink < 1.0))
        throw std::invalid_argument("geometric_toward: need panels >= 1 and shrink in (0,1)");
    std::vector<double> breaks(panels + 1);
    breaks[0] = a;
    for (int j = 1; j <= panels; ++j)
        breaks[j] = a + (b - a) * std::pow(shrink, panels - j);
    return composite(breaks, per_panel);
}

} // namespace docalc
