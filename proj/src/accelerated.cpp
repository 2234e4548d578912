#include <chrono>

#include "hjb/errors.hpp"
#include "hjb/solvers.hpp"
#include "solver_common.hpp"

namespace hjb {

Solution api_solve(const ProblemSpec& spec, const RegularGrid& coarse_grid, const RegularGrid& fine_grid,
                   const ControlSet& controls, const SolverConfig& coarse_config,
                   const SolverConfig& fine_config, std::optional<ValueField> coarse_start,
                   const IterateObserver& observer) {
    if (!coarse_grid.nests_into(fine_grid))
        throw InvalidArgument("API needs the fine grid to be the midpoint refinement of the coarse grid");
    coarse_config.validate();
    fine_config.validate();
    const auto t0 = std::chrono::steady_clock::now();

    // 1. Value iteration on the coarse mesh (throws if the target is unresolvable there).
    auto coarse = value_iteration(spec, coarse_grid, controls, coarse_config, std::move(coarse_start));

    // 2-3. Interpolate to the fine mesh and extract the greedy policy there.
    const auto t_transfer = std::chrono::steady_clock::now();
    auto fine_start = prolongate(coarse.values, fine_grid);
    auto fine_policy = policy_improvement(spec, fine_grid, fine_start, controls, fine_config);
    const double transfer_seconds = detail::seconds_since(t_transfer);

    // 4. Policy iteration on the fine mesh.
    auto fine = policy_iteration(spec, fine_grid, controls, fine_config, fine_policy, fine_start, observer);
    fine.report.wall_time_seconds += transfer_seconds;

    auto report = detail::make_report("API", fine_grid, controls, fine_config);
    // The greedy extraction sweep belongs to the fine phase.
    std::uint64_t fine_free = 0;
    for (int k : fine_policy.index)
        if (k != PolicyField::kUndefined) ++fine_free;
    fine.report.node_updates += fine_free;
    fine.report.interpolations += fine_free * controls.size();

    report.outer_iterations = coarse.report.outer_iterations + fine.report.outer_iterations;
    report.residual_history = fine.report.residual_history;
    report.sub_iteration_history = fine.report.sub_iteration_history;
    report.node_updates = coarse.report.node_updates + fine.report.node_updates;
    report.interpolations = coarse.report.interpolations + fine.report.interpolations;
    report.converged = fine.report.converged;
    report.phases = {coarse.report, fine.report};
    report.phases[0].algorithm = "API/coarse-VI";
    report.phases[1].algorithm = "API/fine-PI";
    report.wall_time_seconds = detail::seconds_since(t0);
    return {std::move(fine.values), std::move(fine.policy), std::move(report)};
}

}  // namespace hjb
