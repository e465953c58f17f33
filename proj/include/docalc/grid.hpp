#pragma once

#include <string>
#include <vector>

namespace docalc {

// Uniform grid on [0, T] with nodes t_j = j*h, j = 0..n, h = T/n.
struct Grid {
    double T = 1.0;
    int n = 2;

    double h() const { return T / n; }
    double node(int j) const { return T * static_cast<double>(j) / n; }
    bool operator==(const Grid& o) const { return T == o.T && n == o.n; }
};

// Node values on a grid; values[0] is the value at t = 0.
struct SampledFunction {
    Grid grid;
    std::vector<double> values;
};

template <class F>
SampledFunction sample(const Grid& g, F&& f) {
    SampledFunction s;
    s.grid = g;
    s.values.resize(g.n + 1);
    for (int j = 0; j <= g.n; ++j) s.values[j] = f(g.node(j));
    return s;
}

// CSV format: header "t,value", one row per node, nodes must be uniform.
SampledFunction load_csv(const std::string& path);
void save_csv(const std::string& path, const SampledFunction& f);

} // namespace docalc
