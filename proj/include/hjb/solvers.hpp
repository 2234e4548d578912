#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hjb/grid.hpp"
#include "hjb/problem.hpp"

namespace hjb {

enum class EvalBackend { FixedPoint, DirectLinear };

struct SolverConfig {
    double dt = 0.0;             ///< time step of the semi-Lagrangian scheme
    double stop_constant = 0.2;  ///< C in the stopping test ||V^{k+1} - V^k||_inf <= C dx^2
    int max_iterations = 20000;
    EvalBackend eval_backend = EvalBackend::FixedPoint;
    bool record_residuals = true;
    /// Policy-evaluation sweep cap; 0 means 10 * max_iterations.
    int inner_iteration_cap = 0;

    /// epsilon = stop_constant * (smallest grid spacing)^2.
    double tolerance(const RegularGrid& grid) const;
    int inner_cap() const { return inner_iteration_cap > 0 ? inner_iteration_cap : 10 * max_iterations; }
    void validate() const;
};

/// One control index per node; target/pinned nodes carry kUndefined.
struct PolicyField {
    static constexpr int kUndefined = -1;

    RegularGrid grid;
    std::vector<int> index;

    PolicyField(RegularGrid g, int fill) : grid(std::move(g)), index(grid.node_count(), fill) {}
};

struct RunReport {
    std::string algorithm;
    std::vector<int> grid_nodes;
    double dx = 0.0;
    double dt = 0.0;
    std::size_t control_count = 0;
    double tolerance = 0.0;

    int outer_iterations = 0;
    std::vector<double> residual_history;
    std::vector<int> sub_iteration_history;  ///< policy-evaluation sweeps per outer step (PI)
    /// Single-node updates (Bellman, greedy or frozen-policy) summed over all sweeps.
    std::uint64_t node_updates = 0;
    /// Arrival-point interpolations: node updates weighted by the controls tried.
    std::uint64_t interpolations = 0;
    double wall_time_seconds = 0.0;
    bool converged = false;

    /// API only: the coarse value-iteration and fine policy-iteration phases.
    std::vector<RunReport> phases;
};

struct Solution {
    ValueField values;
    PolicyField policy;
    RunReport report;
};

/// Default starting field: 0 for infinite horizon; 1 off target and 0 on
/// target for minimum time. Pinned boundary values are applied.
ValueField initial_guess(const ProblemSpec& spec, const RegularGrid& grid);

struct BellmanResult {
    ValueField values;
    PolicyField policy;
};

/// One Jacobi sweep of the discrete Bellman operator (every node reads only `values`).
BellmanResult bellman_update(const ProblemSpec& spec, const RegularGrid& grid, const ValueField& values,
                             const ControlSet& controls, const SolverConfig& config);

/// Greedy (argmin) policy against a fixed field; ties go to the lowest index.
PolicyField policy_improvement(const ProblemSpec& spec, const RegularGrid& grid, const ValueField& values,
                               const ControlSet& controls, const SolverConfig& config);

Solution value_iteration(const ProblemSpec& spec, const RegularGrid& grid, const ControlSet& controls,
                         const SolverConfig& config, std::optional<ValueField> start = std::nullopt);

struct EvaluationResult {
    ValueField values;
    int iterations = 0;  ///< sweeps (fixed point) or Krylov iterations (direct)
    bool converged = false;
    double residual = 0.0;
};

/// Frozen-policy fixed-point iteration, warm-started from `start`, stopped at
/// the same epsilon as the outer loop.
EvaluationResult policy_evaluation_fixed_point(const ProblemSpec& spec, const RegularGrid& grid,
                                               const PolicyField& policy, const ControlSet& controls,
                                               const ValueField& start, const SolverConfig& config);

/// Solves (I - discount * Lambda(policy)) V = stage + discount * exterior with
/// an iterative sparse method to a sup-norm residual of epsilon / 10. Throws
/// SolverStagnation when that residual cannot be reached.
EvaluationResult policy_evaluation_direct(const ProblemSpec& spec, const RegularGrid& grid,
                                          const PolicyField& policy, const ControlSet& controls,
                                          const SolverConfig& config,
                                          std::optional<ValueField> guess = std::nullopt);

/// Called with (outer iteration, evaluated value field) after every policy evaluation.
using IterateObserver = std::function<void(int, const ValueField&)>;

Solution policy_iteration(const ProblemSpec& spec, const RegularGrid& grid, const ControlSet& controls,
                          const SolverConfig& config, const PolicyField& initial_policy,
                          const ValueField& start, const IterateObserver& observer = {});

/// Coarse value iteration, prolongation, greedy policy extraction, fine policy
/// iteration. The report's `phases` holds the coarse and fine reports.
Solution api_solve(const ProblemSpec& spec, const RegularGrid& coarse_grid, const RegularGrid& fine_grid,
                   const ControlSet& controls, const SolverConfig& coarse_config,
                   const SolverConfig& fine_config, std::optional<ValueField> coarse_start = std::nullopt,
                   const IterateObserver& observer = {});

/// Argmin control index at an arbitrary in-domain state.
std::size_t greedy_control(const ProblemSpec& spec, const ValueField& values, const ControlSet& controls,
                           std::span<const double> x, double dt);

/// Number of OpenMP workers used by the sweep kernels.
void set_worker_count(int workers);
int worker_count();

}  // namespace hjb
