#include "hjb/reference.hpp"

#include <cmath>
#include <limits>

#include "hjb/errors.hpp"

namespace hjb::reference {

namespace {

struct Pins {
    std::vector<char> pinned;
    std::vector<double> value;
};

Pins pins_for(const ProblemSpec& spec, const RegularGrid& grid) {
    const auto mask = target_mask(spec, grid);
    Pins p{std::vector<char>(grid.node_count(), 0), std::vector<double>(grid.node_count(), 0.0)};
    for (std::size_t f = 0; f < grid.node_count(); ++f) {
        if (mask.inside[f]) {
            p.pinned[f] = 1;
        } else if (spec.boundary_value && grid.on_boundary(f)) {
            p.pinned[f] = 1;
            p.value[f] = *spec.boundary_value;
        }
    }
    return p;
}

double discount_of(const ProblemSpec& spec, double dt) {
    if (spec.is_minimum_time()) return std::exp(-dt);
    return std::exp(-std::get<InfiniteHorizon>(spec.kind).discount_rate * dt);
}

double stage_of(const ProblemSpec& spec, std::span<const double> x, std::span<const double> a, double dt) {
    if (spec.is_minimum_time()) return 1.0 - std::exp(-dt);
    return dt * spec.running_cost(x, a);
}

}  // namespace

BellmanResult bellman_update(const ProblemSpec& spec, const ValueField& values, const ControlSet& controls,
                             double dt) {
    const auto& grid = values.grid();
    const auto pins = pins_for(spec, grid);
    const double discount = discount_of(spec, dt);
    ValueField out(grid);
    PolicyField policy(grid, PolicyField::kUndefined);
    for (std::size_t f = 0; f < grid.node_count(); ++f) {
        if (pins.pinned[f]) {
            out[f] = pins.value[f];
            continue;
        }
        const Vec node = grid.node(f);
        const std::span<const double> x(node.data(), grid.dim());
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t c = 0; c < controls.size(); ++c) {
            const auto y = euler_arrival(spec, x, controls[c], dt);
            const double q = discount * interpolate(values, y, spec.exterior_value) + stage_of(spec, x, controls[c], dt);
            if (q < best) {
                best = q;
                policy.index[f] = static_cast<int>(c);
            }
        }
        out[f] = best;
    }
    return {std::move(out), std::move(policy)};
}

ValueField evaluation_sweep(const ProblemSpec& spec, const ValueField& values, const PolicyField& policy,
                            const ControlSet& controls, double dt) {
    const auto& grid = values.grid();
    const auto pins = pins_for(spec, grid);
    const double discount = discount_of(spec, dt);
    ValueField out(grid);
    for (std::size_t f = 0; f < grid.node_count(); ++f) {
        if (pins.pinned[f]) {
            out[f] = pins.value[f];
            continue;
        }
        const int c = policy.index[f];
        if (c < 0 || static_cast<std::size_t>(c) >= controls.size())
            throw InvalidArgument("policy undefined at a free node");
        const Vec node = grid.node(f);
        const std::span<const double> x(node.data(), grid.dim());
        const auto y = euler_arrival(spec, x, controls[c], dt);
        out[f] = discount * interpolate(values, y, spec.exterior_value) + stage_of(spec, x, controls[c], dt);
    }
    return out;
}

Solution value_iteration(const ProblemSpec& spec, const RegularGrid& grid, const ControlSet& controls,
                         const SolverConfig& config) {
    config.validate();
    ValueField v = initial_guess(spec, grid);
    PolicyField policy(grid, PolicyField::kUndefined);
    RunReport report;
    report.algorithm = "VI/reference";
    report.tolerance = config.tolerance(grid);
    for (int k = 1; k <= config.max_iterations; ++k) {
        auto next = bellman_update(spec, v, controls, config.dt);
        const double r = sup_diff(next.values, v);
        v = std::move(next.values);
        policy = std::move(next.policy);
        report.outer_iterations = k;
        report.residual_history.push_back(r);
        if (r <= report.tolerance) {
            report.converged = true;
            break;
        }
    }
    policy = bellman_update(spec, v, controls, config.dt).policy;
    return {std::move(v), std::move(policy), std::move(report)};
}

}  // namespace hjb::reference
