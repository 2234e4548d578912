// Serial reference kernels vs the OpenMP sweep kernels, plus VI vs API on the
// 2D eikonal problem. Usage: bench_kernels [nodes] [repeats]

#include <omp.h>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <vector>

#include "hjb/catalog.hpp"
#include "hjb/experiment.hpp"
#include "hjb/reference.hpp"
#include "hjb/scheme.hpp"

using namespace hjb;

template <class F>
static double best_of(int repeats, F&& f) {
    double best = 1e300;
    for (int r = 0; r < repeats; ++r) {
        const auto t0 = std::chrono::steady_clock::now();
        f();
        best = std::min(best, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
    }
    return best;
}

int main(int argc, char** argv) {
    const int n = argc > 1 ? std::atoi(argv[1]) : 161;
    const int repeats = argc > 2 ? std::atoi(argv[2]) : 3;
    const int max_threads = omp_get_max_threads();

    const auto entry = catalog("test4_eik2d");
    const auto grid = make_grid(entry.spec, n);
    const double dt = entry.dt_ratio * grid.min_spacing();
    const Scheme scheme(entry.spec, grid, entry.controls, dt);

    // A non-trivial field: a few VI sweeps from the default start.
    const auto start = initial_guess(entry.spec, grid);
    std::vector<double> v(start.values().begin(), start.values().end());
    std::vector<double> next(v.size());
    std::vector<int> policy(v.size());
    for (int k = 0; k < 10; ++k) {
        scheme.bellman_sweep(v, next, policy);
        v.swap(next);
    }
    const ValueField field(grid, v);

    std::printf("test4_eik2d %dx%d, %zu controls, %d max threads\n", n, n, entry.controls.size(), max_threads);
    std::printf("%-22s %8s %12s %9s\n", "kernel", "threads", "seconds", "speedup");

    const double ref_bellman =
        best_of(repeats, [&] { (void)reference::bellman_update(entry.spec, field, entry.controls, dt); });
    std::printf("%-22s %8s %12.6f %9.2f\n", "bellman/reference", "1", ref_bellman, 1.0);
    for (int t = 1; t <= max_threads; t *= 2) {
        omp_set_num_threads(t);
        const double s = best_of(repeats, [&] { scheme.bellman_sweep(v, next, policy); });
        std::printf("%-22s %8d %12.6f %9.2f\n", "bellman/omp", t, s, ref_bellman / s);
    }

    PolicyField pf(grid, PolicyField::kUndefined);
    pf.index = policy;
    const auto frozen = scheme.freeze(policy);
    omp_set_num_threads(1);
    const double ref_eval = best_of(
        repeats, [&] { (void)reference::evaluation_sweep(entry.spec, field, pf, entry.controls, dt); });
    std::printf("%-22s %8s %12.6f %9.2f\n", "evaluation/reference", "1", ref_eval, 1.0);
    for (int t = 1; t <= max_threads; t *= 2) {
        omp_set_num_threads(t);
        const double s = best_of(repeats, [&] { scheme.evaluation_sweep(frozen, v, next); });
        std::printf("%-22s %8d %12.6f %9.2f\n", "evaluation/omp", t, s, ref_eval / s);
    }

    omp_set_num_threads(max_threads);
    RunSettings s;
    s.fine_nodes = n % 2 ? n : n + 1;
    s.algorithm = Algorithm::VI;
    const auto vi = solve(entry, s);
    s.algorithm = Algorithm::API;
    const auto api = solve(entry, s);
    std::printf("\n%-6s %10s %14s %12s\n", "solver", "iterations", "node_updates", "seconds");
    for (const auto* sol : {&vi, &api})
        std::printf("%-6s %10d %14llu %12.3f\n", sol->report.algorithm.c_str(), sol->report.outer_iterations,
                    static_cast<unsigned long long>(sol->report.node_updates), sol->report.wall_time_seconds);
    std::printf("API speedup over VI: %.2fx\n", vi.report.wall_time_seconds / api.report.wall_time_seconds);
    return 0;
}
