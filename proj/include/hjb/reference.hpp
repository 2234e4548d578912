#pragma once

#include "hjb/grid.hpp"
#include "hjb/problem.hpp"
#include "hjb/solvers.hpp"

/// Serial, unoptimized versions of the sweep kernels. They share no code with
/// the parallel kernels beyond the public grid and problem API, and exist to
/// cross-check them in tests and benchmarks.
namespace hjb::reference {

/// One Jacobi Bellman sweep; returns the new field and its argmin policy.
BellmanResult bellman_update(const ProblemSpec& spec, const ValueField& values, const ControlSet& controls,
                             double dt);

/// One frozen-policy sweep: stage + discount * I[values](arrival) on free nodes.
ValueField evaluation_sweep(const ProblemSpec& spec, const ValueField& values, const PolicyField& policy,
                            const ControlSet& controls, double dt);

/// Plain value iteration built on `bellman_update`.
Solution value_iteration(const ProblemSpec& spec, const RegularGrid& grid, const ControlSet& controls,
                         const SolverConfig& config);

}  // namespace hjb::reference
