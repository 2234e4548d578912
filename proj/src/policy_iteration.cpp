#include <algorithm>
#include <chrono>
#include <cmath>

#include "hjb/errors.hpp"
#include "hjb/scheme.hpp"
#include "hjb/solvers.hpp"
#include "solver_common.hpp"

namespace hjb {

namespace {

struct SweepResult {
    int sweeps = 0;
    bool converged = false;
    double residual = 0.0;
};

// Iterates the frozen-policy map on `v` in place until the step is <= eps.
SweepResult iterate_frozen(const Scheme& scheme, const Scheme::FrozenPolicy& frozen, std::vector<double>& v,
                           double eps, int cap) {
    std::vector<double> next(v.size());
    SweepResult r;
    for (int m = 1; m <= cap; ++m) {
        r.residual = scheme.evaluation_sweep(frozen, v, next);
        v.swap(next);
        r.sweeps = m;
        if (r.residual <= eps) {
            r.converged = true;
            break;
        }
    }
    return r;
}

void require_policy(const PolicyField& policy, const RegularGrid& grid) {
    if (!(policy.grid == grid) || policy.index.size() != grid.node_count())
        throw InvalidArgument("policy lives on a different grid");
}

}  // namespace

EvaluationResult policy_evaluation_fixed_point(const ProblemSpec& spec, const RegularGrid& grid,
                                               const PolicyField& policy, const ControlSet& controls,
                                               const ValueField& start, const SolverConfig& config) {
    config.validate();
    require_policy(policy, grid);
    detail::require_grid(start, grid, "initial field");
    const Scheme scheme(spec, grid, controls, config.dt);
    const auto frozen = scheme.freeze(policy.index);
    std::vector<double> v(start.values().begin(), start.values().end());
    scheme.apply_pins(v);
    const auto r = iterate_frozen(scheme, frozen, v, config.tolerance(grid), config.inner_cap());
    return {ValueField(grid, std::move(v)), r.sweeps, r.converged, r.residual};
}

Solution policy_iteration(const ProblemSpec& spec, const RegularGrid& grid, const ControlSet& controls,
                          const SolverConfig& config, const PolicyField& initial_policy,
                          const ValueField& start, const IterateObserver& observer) {
    config.validate();
    require_policy(initial_policy, grid);
    detail::require_grid(start, grid, "initial field");
    const auto t0 = std::chrono::steady_clock::now();
    const Scheme scheme(spec, grid, controls, config.dt);
    auto report = detail::make_report("PI", grid, controls, config);
    const double eps = report.tolerance;
    const std::uint64_t free = scheme.free_count();

    std::vector<double> v(start.values().begin(), start.values().end());
    scheme.apply_pins(v);
    PolicyField policy = initial_policy;

    for (int k = 1; k <= config.max_iterations; ++k) {
        // Policy evaluation, warm-started from the previous value field.
        std::vector<double> evaluated = v;
        int inner = 0;
        bool evaluated_ok = true;
        if (config.eval_backend == EvalBackend::FixedPoint) {
            const auto frozen = scheme.freeze(policy.index);
            const auto r = iterate_frozen(scheme, frozen, evaluated, eps, config.inner_cap());
            inner = r.sweeps;
            evaluated_ok = r.converged;
            report.node_updates += free * static_cast<std::uint64_t>(r.sweeps);
            report.interpolations += free * static_cast<std::uint64_t>(r.sweeps);
        } else {
            auto r = policy_evaluation_direct(spec, grid, policy, controls, config,
                                              ValueField(grid, std::move(evaluated)));
            inner = r.iterations;
            evaluated.assign(r.values.values().begin(), r.values.values().end());
            // Each Krylov iteration applies the matrix twice.
            report.node_updates += 2 * free * static_cast<std::uint64_t>(r.iterations);
            report.interpolations += 2 * free * static_cast<std::uint64_t>(r.iterations);
        }
        double residual = 0.0;
        for (std::size_t f = 0; f < v.size(); ++f) residual = std::max(residual, std::abs(evaluated[f] - v[f]));
        v.swap(evaluated);

        report.outer_iterations = k;
        report.sub_iteration_history.push_back(inner);
        if (config.record_residuals) report.residual_history.push_back(residual);
        if (observer) observer(k, ValueField(grid, v));
        if (!evaluated_ok) break;
        if (residual <= eps) {
            report.converged = true;
            break;
        }
        // Policy improvement.
        scheme.greedy_sweep(v, policy.index);
        report.node_updates += free;
        report.interpolations += free * controls.size();
    }
    scheme.greedy_sweep(v, policy.index);
    report.wall_time_seconds = detail::seconds_since(t0);
    return {ValueField(grid, std::move(v)), std::move(policy), std::move(report)};
}

}  // namespace hjb
