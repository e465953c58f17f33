// Compares the serial reference path against the OpenMP path for the three
// batch-heavy operations and confirms the outputs are bit-identical. Run
// with OMP_NUM_THREADS set to taste.

#include <chrono>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "docalc/contour.hpp"
#include "docalc/funcalc.hpp"
#include "docalc/gridops.hpp"
#include "docalc/kernels.hpp"
#include "docalc/parallel.hpp"
#include "docalc/weights.hpp"

namespace {

using docalc::Exec;

double best_of(int reps, const std::function<void()>& fn) {
    double best = 1e300;
    for (int r = 0; r < reps; ++r) {
        const auto t0 = std::chrono::steady_clock::now();
        fn();
        const auto t1 = std::chrono::steady_clock::now();
        best = std::min(best, std::chrono::duration<double, std::milli>(t1 - t0).count());
    }
    return best;
}

void report(const std::string& name, double serial_ms, double parallel_ms, bool identical) {
    std::printf("%-28s serial %9.2f ms   parallel %9.2f ms   speedup %5.2fx   %s\n",
                name.c_str(), serial_ms, parallel_ms, serial_ms / parallel_ms,
                identical ? "bit-identical" : "OUTPUTS DIFFER");
}

} // namespace

int main() {
    const docalc::KernelEvaluator ke(docalc::WeightFunction::one());
    const docalc::ContourInverter inv(ke);
    std::printf("threads available: %d\n\n", docalc::max_threads());

    {
        const docalc::Grid g{1.0, 4096};
        const auto op = docalc::k_convolution(ke, g);
        std::vector<double> f(g.n + 1);
        for (int i = 0; i <= g.n; ++i) f[i] = g.node(i) * (1.0 - g.node(i));
        std::vector<double> a, b;
        const double ts = best_of(3, [&] { a = op.apply_linear(f, Exec::serial); });
        const double tp = best_of(3, [&] { b = op.apply_linear(f, Exec::parallel); });
        report("convolution apply n=4096", ts, tp, a == b);
    }

    {
        const docalc::Grid g{1.0, 1024};
        std::vector<double> edges(g.n + 1);
        for (int i = 0; i <= g.n; ++i) edges[i] = g.node(i);
        docalc::ContourInverter::CellTable a, b;
        const double ts = best_of(3, [&] { a = inv.r_lambda_cells(0.0, edges, Exec::serial); });
        const double tp = best_of(3, [&] { b = inv.r_lambda_cells(0.0, edges, Exec::parallel); });
        report("kappa cell table n=1024", ts, tp, a.mass == b.mass && a.moment1 == b.moment1);
    }

    {
        const docalc::Grid g{1.0, 256};
        const auto rule = docalc::make_stieltjes_rule(ke);
        const auto v = docalc::scaled(docalc::build_A(g), -1.0);
        docalc::TriangularMatrix a, b;
        const double ts = best_of(3, [&] { a = docalc::hirsch_apply(v, rule, Exec::serial); });
        const double tp = best_of(3, [&] { b = docalc::hirsch_apply(v, rule, Exec::parallel); });
        report("hirsch columns n=256", ts, tp, a.a == b.a);
    }

    return 0;
}
