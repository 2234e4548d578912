#pragma once

#include <cstdint>
#include <vector>

#include "hjb/grid.hpp"
#include "hjb/problem.hpp"

namespace hjb {

/// Discretization of one problem on one grid with one time step: node
/// classification, discount, stage costs, and the OpenMP sweep kernels.
///
/// Every sweep is a Jacobi sweep: it reads only its input array, so the result
/// does not depend on the number of workers. Residuals are sup norms (max
/// reductions), which are order independent.
class Scheme {
public:
    enum class Node : char { Free = 0, Target = 1, Boundary = 2 };

    Scheme(const ProblemSpec& spec, const RegularGrid& grid, const ControlSet& controls, double dt);

    const ProblemSpec& spec() const { return *spec_; }
    const RegularGrid& grid() const { return grid_; }
    const ControlSet& controls() const { return *controls_; }
    double dt() const { return dt_; }
    double discount() const { return discount_; }
    std::size_t free_count() const { return free_count_; }
    Node kind(std::size_t node) const { return static_cast<Node>(kind_[node]); }
    /// Value a pinned node is held at.
    double pinned_value(std::size_t node) const;

    /// Writes pinned values into `values`.
    void apply_pins(std::vector<double>& values) const;

    /// out = T(in); policy receives the argmin index. Returns max |out - in|.
    double bellman_sweep(const std::vector<double>& in, std::vector<double>& out,
                         std::vector<int>& policy) const;
    /// Argmin against `values` without producing a new field.
    void greedy_sweep(const std::vector<double>& values, std::vector<int>& policy) const;

    /// Arrival points and stage costs of a frozen policy (free nodes only).
    struct FrozenPolicy {
        std::vector<std::size_t> nodes;   ///< free node indices
        std::vector<double> arrivals;     ///< dim() doubles per entry of `nodes`
        std::vector<double> stage;        ///< stage cost per entry of `nodes`
    };
    FrozenPolicy freeze(const std::vector<int>& policy) const;

    /// out_i = stage_i + discount * I[in](arrival_i) on free nodes, pins elsewhere.
    double evaluation_sweep(const FrozenPolicy& frozen, const std::vector<double>& in,
                            std::vector<double>& out) const;

    /// Continuation value of control `c` at node `node` against `values`.
    double q_value(std::size_t node, std::size_t c, const double* values) const;
    /// Same as q_value at an arbitrary state.
    double q_value_at(const double* x, std::size_t c, const double* values) const;

private:
    double stage_cost(const double* x, std::size_t c) const;
    double q_value_checked(std::size_t node, const double* x, std::size_t c, const double* values) const;

    const ProblemSpec* spec_;
    RegularGrid grid_;
    const ControlSet* controls_;
    double dt_;
    double discount_;
    double stage_constant_ = 0.0;  ///< 1 - e^{-dt} for minimum time
    bool minimum_time_;
    std::vector<char> kind_;
    std::size_t free_count_ = 0;
};

}  // namespace hjb
