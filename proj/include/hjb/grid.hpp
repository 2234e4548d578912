#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

namespace hjb {

inline constexpr int kMaxDim = 4;

/// Default cap on the node count of a single grid (≈ 41^4 · 20).
inline constexpr std::size_t kDefaultNodeCap = std::size_t{60'000'000};

using MultiIndex = std::array<int, kMaxDim>;
using Vec = std::array<double, kMaxDim>;

/// Axis-aligned equidistant lattice over a box in R^d, 1 <= d <= 4.
///
/// Nodes are stored row-major: the last axis varies fastest, so the flat index
/// of multi-index (k_0, ..., k_{d-1}) is sum_i k_i * stride(i) with
/// stride(d-1) = 1.
class RegularGrid {
public:
    RegularGrid(std::span<const double> lower, std::span<const double> upper,
                std::span<const int> nodes_per_axis,
                std::size_t node_cap = kDefaultNodeCap);

    /// Same box and node count on every axis.
    static RegularGrid uniform(int dim, double lower, double upper, int nodes,
                               std::size_t node_cap = kDefaultNodeCap);

    int dim() const noexcept { return dim_; }
    double lower(int axis) const { return lower_[axis]; }
    double upper(int axis) const { return upper_[axis]; }
    int nodes(int axis) const { return nodes_[axis]; }
    double spacing(int axis) const { return spacing_[axis]; }
    double min_spacing() const noexcept;
    std::size_t stride(int axis) const { return stride_[axis]; }
    std::size_t node_count() const noexcept { return count_; }

    double coordinate(int axis, int k) const { return lower_[axis] + k * spacing_[axis]; }
    MultiIndex unflatten(std::size_t flat) const;
    std::size_t flatten(const MultiIndex& index) const;
    Vec node(std::size_t flat) const;
    bool on_boundary(std::size_t flat) const;
    bool contains(std::span<const double> point) const;

    /// The midpoint refinement of this grid (2n-1 nodes per axis).
    RegularGrid refined() const;
    /// True when `fine` is exactly the midpoint refinement of this grid.
    bool nests_into(const RegularGrid& fine) const;

    friend bool operator==(const RegularGrid& a, const RegularGrid& b);

private:
    int dim_ = 0;
    Vec lower_{};
    Vec upper_{};
    Vec spacing_{};
    MultiIndex nodes_{};
    std::array<std::size_t, kMaxDim> stride_{};
    std::size_t count_ = 0;
};

/// One real value per grid node.
class ValueField {
public:
    explicit ValueField(RegularGrid grid, double fill = 0.0);
    ValueField(RegularGrid grid, std::vector<double> values);

    const RegularGrid& grid() const noexcept { return grid_; }
    std::size_t size() const noexcept { return values_.size(); }
    double operator[](std::size_t i) const { return values_[i]; }
    double& operator[](std::size_t i) { return values_[i]; }
    std::span<const double> values() const noexcept { return values_; }
    std::span<double> values() noexcept { return values_; }

    /// Throws NumericError naming the first non-finite entry.
    void check_finite() const;

private:
    RegularGrid grid_;
    std::vector<double> values_;
};

struct CellLocation {
    MultiIndex base{};  ///< lower corner of the enclosing cell
    Vec local{};        ///< position inside the cell, each in [0, 1]
};

/// Locates `point` in the closed box. Points on the upper face land in the
/// last cell with local coordinate 1. Returns nullopt outside the box.
std::optional<CellLocation> locate_cell(const RegularGrid& grid, std::span<const double> point);

/// Multilinear blend of the 2^d corners enclosing `point`; `exterior_value`
/// outside the box.
double interpolate(const ValueField& field, std::span<const double> point, double exterior_value);

/// Sparse interpolation row: value(point) = sum_k weight[k] * field[index[k]].
struct InterpolationWeights {
    std::array<std::size_t, 1 << kMaxDim> index{};
    std::array<double, 1 << kMaxDim> weight{};
    int count = 0;
};

/// Nonzero multilinear weights for `point` (nullopt outside the box).
std::optional<InterpolationWeights> interpolation_weights(const RegularGrid& grid,
                                                          std::span<const double> point);

/// Transfers a coarse field to its midpoint refinement. Coincident nodes are
/// copied; inserted nodes get the mean of the enclosing coarse corners.
ValueField prolongate(const ValueField& coarse, const RegularGrid& fine_grid);

double sup_diff(const ValueField& a, const ValueField& b);
/// sum |a_i - b_i| times the cell volume (product of spacings).
double l1_diff(const ValueField& a, const ValueField& b);

/// Plain-text field table: header naming the axes, then one row per node
/// (row-major order) with the coordinates and the value, 17 significant digits.
void write_field_table(std::ostream& out, const ValueField& field);
ValueField read_field_table(std::istream& in);

/// Field restricted to the node plane of `axis` nearest to `coordinate`.
ValueField slice(const ValueField& field, int axis, double coordinate);

}  // namespace hjb
