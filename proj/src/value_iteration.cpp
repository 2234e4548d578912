#include <chrono>
#include <cmath>
#include <limits>

#include "hjb/errors.hpp"
#include "hjb/scheme.hpp"
#include "hjb/solvers.hpp"
#include "solver_common.hpp"

namespace hjb {

double SolverConfig::tolerance(const RegularGrid& grid) const {
    const double h = grid.min_spacing();
    return stop_constant * h * h;
}

void SolverConfig::validate() const {
    if (!(dt > 0.0)) throw InvalidArgument("solver dt must be positive");
    if (!(stop_constant > 0.0)) throw InvalidArgument("stop constant must be positive");
    if (max_iterations < 1) throw InvalidArgument("max_iterations must be at least 1");
    if (inner_iteration_cap < 0) throw InvalidArgument("inner iteration cap must be non-negative");
}

namespace detail {

RunReport make_report(std::string algorithm, const RegularGrid& grid, const ControlSet& controls,
                      const SolverConfig& config) {
    RunReport r;
    r.algorithm = std::move(algorithm);
    for (int i = 0; i < grid.dim(); ++i) r.grid_nodes.push_back(grid.nodes(i));
    r.dx = grid.min_spacing();
    r.dt = config.dt;
    r.control_count = controls.size();
    r.tolerance = config.tolerance(grid);
    return r;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

void require_grid(const ValueField& field, const RegularGrid& grid, const char* what) {
    if (!(field.grid() == grid)) throw InvalidArgument(std::string(what) + " lives on a different grid");
}

}  // namespace detail

ValueField initial_guess(const ProblemSpec& spec, const RegularGrid& grid) {
    const double fill = spec.is_minimum_time() ? 1.0 : 0.0;
    ValueField v(grid, fill);
    const auto mask = target_mask(spec, grid);
    for (std::size_t f = 0; f < grid.node_count(); ++f) {
        if (mask.inside[f])
            v[f] = 0.0;
        else if (spec.boundary_value && grid.on_boundary(f))
            v[f] = *spec.boundary_value;
    }
    return v;
}

BellmanResult bellman_update(const ProblemSpec& spec, const RegularGrid& grid, const ValueField& values,
                             const ControlSet& controls, const SolverConfig& config) {
    detail::require_grid(values, grid, "value field");
    const Scheme scheme(spec, grid, controls, config.dt);
    std::vector<double> in(values.values().begin(), values.values().end());
    std::vector<double> out(in.size());
    PolicyField policy(grid, PolicyField::kUndefined);
    scheme.bellman_sweep(in, out, policy.index);
    return {ValueField(grid, std::move(out)), std::move(policy)};
}

PolicyField policy_improvement(const ProblemSpec& spec, const RegularGrid& grid, const ValueField& values,
                               const ControlSet& controls, const SolverConfig& config) {
    detail::require_grid(values, grid, "value field");
    const Scheme scheme(spec, grid, controls, config.dt);
    PolicyField policy(grid, PolicyField::kUndefined);
    std::vector<double> v(values.values().begin(), values.values().end());
    scheme.greedy_sweep(v, policy.index);
    return policy;
}

Solution value_iteration(const ProblemSpec& spec, const RegularGrid& grid, const ControlSet& controls,
                         const SolverConfig& config, std::optional<ValueField> start) {
    config.validate();
    const auto t0 = std::chrono::steady_clock::now();
    const Scheme scheme(spec, grid, controls, config.dt);
    auto report = detail::make_report("VI", grid, controls, config);
    const double eps = report.tolerance;

    std::vector<double> v;
    if (start) {
        detail::require_grid(*start, grid, "initial field");
        v.assign(start->values().begin(), start->values().end());
    } else {
        const auto guess = initial_guess(spec, grid);
        v.assign(guess.values().begin(), guess.values().end());
    }
    scheme.apply_pins(v);
    std::vector<double> next(v.size());
    PolicyField policy(grid, PolicyField::kUndefined);

    for (int k = 1; k <= config.max_iterations; ++k) {
        const double residual = scheme.bellman_sweep(v, next, policy.index);
        v.swap(next);
        report.outer_iterations = k;
        report.node_updates += scheme.free_count();
        report.interpolations += scheme.free_count() * controls.size();
        if (config.record_residuals) report.residual_history.push_back(residual);
        if (residual <= eps) {
            report.converged = true;
            break;
        }
    }
    // Greedy policy of the returned iterate.
    scheme.greedy_sweep(v, policy.index);
    report.wall_time_seconds = detail::seconds_since(t0);
    return {ValueField(grid, std::move(v)), std::move(policy), std::move(report)};
}

std::size_t greedy_control(const ProblemSpec& spec, const ValueField& values, const ControlSet& controls,
                           std::span<const double> x, double dt) {
    const auto& grid = values.grid();
    if (!grid.contains(x)) throw InvalidArgument("greedy_control: state lies outside the domain");
    if (!(dt > 0.0)) throw InvalidArgument("time step must be positive");
    const int d = grid.dim();
    const bool min_time = spec.is_minimum_time();
    const double discount =
        min_time ? std::exp(-dt) : std::exp(-std::get<InfiniteHorizon>(spec.kind).discount_rate * dt);
    double best = std::numeric_limits<double>::infinity();
    std::size_t arg = 0;
    double v[kMaxDim], y[kMaxDim];
    for (std::size_t c = 0; c < controls.size(); ++c) {
        spec.dynamics(x, controls[c], std::span<double>(v, d));
        for (int i = 0; i < d; ++i) y[i] = x[i] + dt * v[i];
        const double stage = min_time ? -std::expm1(-dt) : dt * spec.running_cost(x, controls[c]);
        const double q = discount * interpolate(values, std::span<const double>(y, d), spec.exterior_value) + stage;
        if (!std::isfinite(q)) throw NumericError("greedy_control: non-finite Bellman term");
        if (q < best) {
            best = q;
            arg = c;
        }
    }
    return arg;
}

}  // namespace hjb
