#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hjb/problem.hpp"

namespace hjb {

/// Optional tweaks applied on top of a catalog entry's defaults.
struct ProblemOverrides {
    std::optional<double> domain_lower;  ///< same bound on every axis
    std::optional<double> domain_upper;
    std::optional<std::vector<int>> control_counts;
    std::optional<double> dt_ratio;  ///< dt = dt_ratio * dx
    std::optional<double> exterior_value;
    std::optional<double> target_radius;  ///< heat3_rom only
    std::optional<double> discount_rate;  ///< infinite-horizon entries only
    /// Fine mesh spacing; heat3_rom derives its default target radius (2 dx) from it.
    std::optional<double> mesh_spacing;
};

struct CatalogEntry {
    ProblemSpec spec;
    ControlSet controls;
    double dt_ratio = 1.0;
    /// Exact (or reference) value function on the continuum, when one is known.
    /// Minimum-time references are already Kruzkhov-transformed.
    std::function<double(std::span<const double>)> reference;
};

/// Names accepted by `catalog`.
const std::vector<std::string>& catalog_names();

/// Builds a benchmark problem by name. Unknown names throw InvalidArgument
/// listing the valid ones.
CatalogEntry catalog(const std::string& name, const ProblemOverrides& overrides = {});

/// The reduced 3-state heat model: dx/dt = A x + B a.
struct ReducedHeatModel {
    static constexpr double A[3][3] = {{-0.123, -0.008, -0.001},
                                       {-0.008, -1.148, -0.321},
                                       {-0.001, -0.321, -3.671}};
    static constexpr double B[3] = {-5.770, -0.174, -0.022};
};

}  // namespace hjb
