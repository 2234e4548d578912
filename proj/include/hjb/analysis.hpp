#pragma once

#include <functional>
#include <iosfwd>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "hjb/grid.hpp"
#include "hjb/problem.hpp"
#include "hjb/solvers.hpp"

namespace hjb {

inline constexpr double kInfiniteTime = std::numeric_limits<double>::infinity();

/// Minimum time from a Kruzkhov value v = 1 - e^{-T}; +inf once v >= 1 - 1e-14.
double kruzkhov_to_time(double v);
/// 1 - e^{-T}; an infinite time maps to 1.
double time_to_kruzkhov(double time);

struct ErrorRecord {
    double dx = 0.0;
    double l1_error = 0.0;
    double sup_error = 0.0;
};

/// Nodewise comparison against a reference evaluated at the grid nodes.
ErrorRecord error_vs_reference(const ValueField& values,
                               const std::function<double(std::span<const double>)>& reference);

struct ConvergenceRate {
    double l1 = 0.0;
    double sup = 0.0;
};

/// log2 ratios of successive errors; records must be ordered by decreasing dx
/// with each dx exactly half the previous one.
std::vector<ConvergenceRate> convergence_rates(std::span<const ErrorRecord> records);

/// Delimiter-separated rate table: nodes, dx, L1 error, L1 rate, sup error, sup rate.
void write_rate_table(std::ostream& out, std::span<const ErrorRecord> records,
                      std::span<const int> nodes_per_axis, char delimiter = ',');

enum class TrajectoryStatus { ReachedTarget, HorizonExceeded, LeftDomain };

struct TrajectoryStep {
    double time = 0.0;
    std::vector<double> state;
    std::size_t control = 0;
};

struct Trajectory {
    std::vector<TrajectoryStep> steps;  ///< one entry per applied control
    std::vector<double> final_state;
    double final_time = 0.0;
    TrajectoryStatus status = TrajectoryStatus::HorizonExceeded;
};

/// Closed-loop simulation: greedy control from the value field, then an Euler
/// step of length dt, until the target is hit, the state leaves the domain, or
/// max_time elapses. Point targets count as reached within half a cell
/// diagonal of the value field's grid.
Trajectory synthesize_trajectory(const ProblemSpec& spec, const ValueField& values, const ControlSet& controls,
                                 std::span<const double> x0, double dt, double max_time);

struct ResidualSummary {
    /// Geometric-fit contraction factor over the last `window` residuals.
    std::optional<double> tail_factor;
    /// Last ratios r_{k+1} / r_k of the history.
    std::vector<double> tail_ratios;
    /// True when the final two drop ratios decrease (superlinear signature).
    std::optional<bool> ratios_decreasing;
    /// First iteration whose residual falls below each threshold.
    std::vector<std::pair<double, int>> iterations_to_threshold;
};

ResidualSummary residual_diagnostics(const RunReport& report, int window = 5,
                                     std::span<const double> thresholds = {});

}  // namespace hjb
