#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "hjb/grid.hpp"

namespace hjb {

/// Finite, ordered list of admissible control vectors. Order matters:
/// argmin ties always resolve to the lowest index.
class ControlSet {
public:
    explicit ControlSet(std::vector<std::vector<double>> controls);

    std::size_t size() const noexcept { return controls_.size(); }
    int dim() const noexcept { return static_cast<int>(controls_.front().size()); }
    std::span<const double> operator[](std::size_t i) const { return controls_[i]; }

private:
    std::vector<std::vector<double>> controls_;
};

struct ControlAxis {
    double lower = 0.0;
    double upper = 0.0;
    int count = 1;
    /// Angle-like axis: `upper` is identified with `lower`, so the samples are
    /// lower + k (upper - lower) / count and the upper endpoint is dropped.
    bool periodic = false;
};

/// Tensor product of equidistant per-axis samples, row-major over axes.
/// Non-periodic axes include both endpoints; a count of 1 gives the midpoint.
ControlSet discretize_control_box(std::span<const ControlAxis> axes);

/// f(x, a) written into `velocity` (same length as x).
using Dynamics = std::function<void(std::span<const double> x, std::span<const double> a,
                                    std::span<double> velocity)>;
/// g(x, a).
using RunningCost = std::function<double(std::span<const double> x, std::span<const double> a)>;
using StatePredicate = std::function<bool(std::span<const double> x)>;

struct InfiniteHorizon {
    double discount_rate = 1.0;  ///< lambda > 0
};

struct MinimumTime {
    StatePredicate target;
    /// Point targets (measure zero) are snapped onto the nearest grid node(s).
    std::optional<std::vector<double>> point;
};

using ProblemKind = std::variant<InfiniteHorizon, MinimumTime>;

struct ProblemSpec {
    std::string name;
    int state_dim = 0;
    Dynamics dynamics;
    RunningCost running_cost;  ///< ignored for MinimumTime
    ProblemKind kind;
    std::vector<double> lower;
    std::vector<double> upper;
    /// Value used for arrival points outside the box.
    double exterior_value = 0.0;
    /// When set, domain-boundary nodes are pinned to this value.
    std::optional<double> boundary_value;

    bool is_minimum_time() const { return std::holds_alternative<MinimumTime>(kind); }
    /// Throws InvalidArgument on inconsistent fields.
    void validate() const;
};

/// x + dt f(x, a); no clipping to the domain.
std::vector<double> euler_arrival(const ProblemSpec& spec, std::span<const double> x,
                                  std::span<const double> a, double dt);

/// true = node lies in the target (value pinned to 0).
struct TargetMask {
    RegularGrid grid;
    std::vector<char> inside;

    std::size_t count() const;
};

/// Flags target nodes. InfiniteHorizon problems get an all-false mask; an
/// empty mask for a MinimumTime problem is an error.
TargetMask target_mask(const ProblemSpec& spec, const RegularGrid& grid);

/// Grid over the problem's box with `nodes` per axis.
RegularGrid make_grid(const ProblemSpec& spec, int nodes, std::size_t node_cap = kDefaultNodeCap);

}  // namespace hjb
