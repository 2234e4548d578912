#include "hjb/grid.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>

#include "hjb/detail/interp.hpp"
#include "hjb/errors.hpp"

namespace hjb {

RegularGrid::RegularGrid(std::span<const double> lower, std::span<const double> upper,
                         std::span<const int> nodes_per_axis, std::size_t node_cap) {
    const auto d = lower.size();
    if (d < 1 || d > static_cast<std::size_t>(kMaxDim))
        throw InvalidArgument("grid dimension must be between 1 and 4, got " + std::to_string(d));
    if (upper.size() != d || nodes_per_axis.size() != d)
        throw InvalidArgument("grid bounds and node counts must have the same length");
    dim_ = static_cast<int>(d);
    count_ = 1;
    for (int i = 0; i < dim_; ++i) {
        if (!std::isfinite(lower[i]) || !std::isfinite(upper[i]) || !(lower[i] < upper[i]))
            throw InvalidArgument("grid axis " + std::to_string(i) + " needs finite lower < upper");
        if (nodes_per_axis[i] < 2)
            throw InvalidArgument("grid axis " + std::to_string(i) + " needs at least 2 nodes");
        lower_[i] = lower[i];
        upper_[i] = upper[i];
        nodes_[i] = nodes_per_axis[i];
        spacing_[i] = (upper[i] - lower[i]) / (nodes_per_axis[i] - 1);
        if (count_ > node_cap / static_cast<std::size_t>(nodes_per_axis[i]))
            throw InvalidArgument("grid node count exceeds the cap of " + std::to_string(node_cap));
        count_ *= static_cast<std::size_t>(nodes_per_axis[i]);
    }
    std::size_t s = 1;
    for (int i = dim_ - 1; i >= 0; --i) {
        stride_[i] = s;
        s *= static_cast<std::size_t>(nodes_[i]);
    }
}

RegularGrid RegularGrid::uniform(int dim, double lower, double upper, int nodes,
                                 std::size_t node_cap) {
    if (dim < 1 || dim > kMaxDim)
        throw InvalidArgument("grid dimension must be between 1 and 4, got " + std::to_string(dim));
    std::vector<double> lo(dim, lower), hi(dim, upper);
    std::vector<int> n(dim, nodes);
    return RegularGrid(lo, hi, n, node_cap);
}

double RegularGrid::min_spacing() const noexcept {
    double h = spacing_[0];
    for (int i = 1; i < dim_; ++i) h = std::min(h, spacing_[i]);
    return h;
}

MultiIndex RegularGrid::unflatten(std::size_t flat) const {
    MultiIndex k{};
    for (int i = 0; i < dim_; ++i) {
        k[i] = static_cast<int>(flat / stride_[i]);
        flat %= stride_[i];
    }
    return k;
}

std::size_t RegularGrid::flatten(const MultiIndex& index) const {
    std::size_t flat = 0;
    for (int i = 0; i < dim_; ++i) flat += static_cast<std::size_t>(index[i]) * stride_[i];
    return flat;
}

Vec RegularGrid::node(std::size_t flat) const {
    Vec x{};
    for (int i = 0; i < dim_; ++i) {
        const auto k = static_cast<int>(flat / stride_[i]);
        flat %= stride_[i];
        x[i] = coordinate(i, k);
    }
    return x;
}

bool RegularGrid::on_boundary(std::size_t flat) const {
    const auto k = unflatten(flat);
    for (int i = 0; i < dim_; ++i)
        if (k[i] == 0 || k[i] == nodes_[i] - 1) return true;
    return false;
}

bool RegularGrid::contains(std::span<const double> point) const {
    if (point.size() != static_cast<std::size_t>(dim_))
        throw InvalidArgument("point dimension does not match grid dimension");
    for (int i = 0; i < dim_; ++i)
        if (!(point[i] >= lower_[i] && point[i] <= upper_[i])) return false;
    return true;
}

RegularGrid RegularGrid::refined() const {
    std::vector<int> n(dim_);
    for (int i = 0; i < dim_; ++i) n[i] = 2 * nodes_[i] - 1;
    return RegularGrid(std::span(lower_.data(), dim_), std::span(upper_.data(), dim_), n,
                       std::numeric_limits<std::size_t>::max());
}

bool RegularGrid::nests_into(const RegularGrid& fine) const {
    if (fine.dim_ != dim_) return false;
    for (int i = 0; i < dim_; ++i) {
        if (fine.lower_[i] != lower_[i] || fine.upper_[i] != upper_[i]) return false;
        if (fine.nodes_[i] != 2 * nodes_[i] - 1) return false;
    }
    return true;
}

bool operator==(const RegularGrid& a, const RegularGrid& b) {
    if (a.dim_ != b.dim_) return false;
    for (int i = 0; i < a.dim_; ++i)
        if (a.lower_[i] != b.lower_[i] || a.upper_[i] != b.upper_[i] || a.nodes_[i] != b.nodes_[i])
            return false;
    return true;
}

ValueField::ValueField(RegularGrid grid, double fill)
    : grid_(std::move(grid)), values_(grid_.node_count(), fill) {
    if (!std::isfinite(fill)) throw NumericError("value field fill must be finite");
}

ValueField::ValueField(RegularGrid grid, std::vector<double> values)
    : grid_(std::move(grid)), values_(std::move(values)) {
    if (values_.size() != grid_.node_count())
        throw InvalidArgument("value field length " + std::to_string(values_.size()) +
                              " does not match node count " + std::to_string(grid_.node_count()));
    check_finite();
}

void ValueField::check_finite() const {
    for (std::size_t i = 0; i < values_.size(); ++i)
        if (!std::isfinite(values_[i]))
            throw NumericError("non-finite value at node " + std::to_string(i));
}

namespace {

void require_dim(const RegularGrid& grid, std::span<const double> point) {
    if (point.size() != static_cast<std::size_t>(grid.dim()))
        throw InvalidArgument("point has dimension " + std::to_string(point.size()) +
                              ", grid has dimension " + std::to_string(grid.dim()));
}

void require_same_grid(const ValueField& a, const ValueField& b) {
    if (!(a.grid() == b.grid())) throw InvalidArgument("fields live on different grids");
}

}  // namespace

std::optional<CellLocation> locate_cell(const RegularGrid& grid, std::span<const double> point) {
    require_dim(grid, point);
    CellLocation loc;
    for (int i = 0; i < grid.dim(); ++i) {
        const double p = point[i];
        if (!(p >= grid.lower(i) && p <= grid.upper(i))) return std::nullopt;
        const double s = (p - grid.lower(i)) / grid.spacing(i);
        int k = std::min(static_cast<int>(s), grid.nodes(i) - 2);
        loc.base[i] = k;
        loc.local[i] = std::clamp(s - k, 0.0, 1.0);
    }
    return loc;
}

double interpolate(const ValueField& field, std::span<const double> point, double exterior_value) {
    const auto& grid = field.grid();
    require_dim(grid, point);
    const auto loc = locate_cell(grid, point);
    if (!loc) return exterior_value;
    const int d = grid.dim();
    const std::size_t base = grid.flatten(loc->base);
    double sum = 0.0;
    for (int c = 0; c < (1 << d); ++c) {
        double w = 1.0;
        std::size_t idx = base;
        for (int i = 0; i < d; ++i) {
            const bool up = (c >> i) & 1;
            w *= up ? loc->local[i] : 1.0 - loc->local[i];
            if (up) idx += grid.stride(i);
        }
        const double v = field[idx];
        if (!std::isfinite(v))
            throw NumericError("non-finite field value at node " + std::to_string(idx));
        sum += w * v;
    }
    return sum;
}

std::optional<InterpolationWeights> interpolation_weights(const RegularGrid& grid,
                                                          std::span<const double> point) {
    require_dim(grid, point);
    std::size_t base = 0;
    double local[kMaxDim];
    if (!detail::locate(grid, point.data(), base, local)) return std::nullopt;
    InterpolationWeights out;
    const int d = grid.dim();
    for (int c = 0; c < (1 << d); ++c) {
        double w = 1.0;
        std::size_t idx = base;
        for (int i = 0; i < d; ++i) {
            if ((c >> i) & 1) {
                w *= local[i];
                idx += grid.stride(i);
            } else {
                w *= 1.0 - local[i];
            }
        }
        if (w == 0.0) continue;
        out.index[out.count] = idx;
        out.weight[out.count] = w;
        ++out.count;
    }
    return out;
}

ValueField prolongate(const ValueField& coarse, const RegularGrid& fine_grid) {
    const auto& cg = coarse.grid();
    if (!cg.nests_into(fine_grid))
        throw InvalidArgument("prolongation needs the fine grid to be the midpoint refinement "
                              "of the coarse grid");
    const int d = cg.dim();
    std::vector<double> out(fine_grid.node_count());
    const auto n = static_cast<std::ptrdiff_t>(out.size());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t f = 0; f < n; ++f) {
        const auto kf = fine_grid.unflatten(static_cast<std::size_t>(f));
        std::size_t base = 0;
        int odd[kMaxDim];
        int n_odd = 0;
        for (int i = 0; i < d; ++i) {
            base += static_cast<std::size_t>(kf[i] / 2) * cg.stride(i);
            if (kf[i] % 2) odd[n_odd++] = i;
        }
        if (n_odd == 0) {
            out[f] = coarse[base];
            continue;
        }
        // Pairwise halving along each odd axis keeps constants exact.
        double corner[1 << kMaxDim];
        for (int c = 0; c < (1 << n_odd); ++c) {
            std::size_t idx = base;
            for (int j = 0; j < n_odd; ++j)
                if ((c >> j) & 1) idx += cg.stride(odd[j]);
            corner[c] = coarse[idx];
        }
        for (int width = 1 << n_odd; width > 1; width /= 2)
            for (int c = 0; c < width / 2; ++c) corner[c] = 0.5 * (corner[c] + corner[c + width / 2]);
        out[f] = corner[0];
    }
    return ValueField(fine_grid, std::move(out));
}

double sup_diff(const ValueField& a, const ValueField& b) {
    require_same_grid(a, b);
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

double l1_diff(const ValueField& a, const ValueField& b) {
    require_same_grid(a, b);
    // Kahan summation, serial, so the result does not depend on worker count.
    double sum = 0.0, comp = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double y = std::abs(a[i] - b[i]) - comp;
        const double t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
    double volume = 1.0;
    for (int i = 0; i < a.grid().dim(); ++i) volume *= a.grid().spacing(i);
    return sum * volume;
}

namespace {

void put_number(std::ostream& out, double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    out << buf;
}

}  // namespace

void write_field_table(std::ostream& out, const ValueField& field) {
    const auto& g = field.grid();
    for (int i = 0; i < g.dim(); ++i) out << 'x' << (i + 1) << ' ';
    out << "value\n";
    for (std::size_t f = 0; f < field.size(); ++f) {
        const auto x = g.node(f);
        for (int i = 0; i < g.dim(); ++i) {
            put_number(out, x[i]);
            out << ' ';
        }
        put_number(out, field[f]);
        out << '\n';
    }
}

ValueField read_field_table(std::istream& in) {
    std::string header;
    if (!std::getline(in, header)) throw InvalidArgument("field table is empty");
    std::istringstream hs(header);
    std::vector<std::string> names;
    for (std::string w; hs >> w;) names.push_back(w);
    if (names.size() < 2 || names.back() != "value")
        throw InvalidArgument("field table header must name the axes followed by 'value'");
    const int d = static_cast<int>(names.size()) - 1;
    if (d > kMaxDim) throw InvalidArgument("field table has more than 4 axes");

    std::vector<std::vector<double>> coords(d);
    std::vector<double> values;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        for (int i = 0; i < d; ++i) {
            double c;
            if (!(ls >> c)) throw InvalidArgument("malformed field table row: " + line);
            coords[i].push_back(c);
        }
        double v;
        if (!(ls >> v)) throw InvalidArgument("malformed field table row: " + line);
        values.push_back(v);
    }
    std::vector<double> lo(d), hi(d);
    std::vector<int> n(d);
    for (int i = 0; i < d; ++i) {
        auto c = coords[i];
        std::sort(c.begin(), c.end());
        c.erase(std::unique(c.begin(), c.end()), c.end());
        if (c.size() < 2) throw InvalidArgument("field table axis has fewer than 2 nodes");
        lo[i] = c.front();
        hi[i] = c.back();
        n[i] = static_cast<int>(c.size());
    }
    return ValueField(RegularGrid(lo, hi, n, std::numeric_limits<std::size_t>::max()),
                      std::move(values));
}

ValueField slice(const ValueField& field, int axis, double coordinate) {
    const auto& g = field.grid();
    if (g.dim() < 2) throw InvalidArgument("cannot slice a one-dimensional field");
    if (axis < 0 || axis >= g.dim()) throw InvalidArgument("slice axis out of range");
    if (!(coordinate >= g.lower(axis) && coordinate <= g.upper(axis)))
        throw InvalidArgument("slice coordinate lies outside the domain");
    const int plane =
        static_cast<int>(std::lround((coordinate - g.lower(axis)) / g.spacing(axis)));

    std::vector<double> lo, hi;
    std::vector<int> n;
    for (int i = 0; i < g.dim(); ++i) {
        if (i == axis) continue;
        lo.push_back(g.lower(i));
        hi.push_back(g.upper(i));
        n.push_back(g.nodes(i));
    }
    RegularGrid sub(lo, hi, n, std::numeric_limits<std::size_t>::max());
    std::vector<double> out(sub.node_count());
    for (std::size_t s = 0; s < out.size(); ++s) {
        const auto ks = sub.unflatten(s);
        MultiIndex k{};
        for (int i = 0, j = 0; i < g.dim(); ++i) k[i] = (i == axis) ? plane : ks[j++];
        out[s] = field[g.flatten(k)];
    }
    return ValueField(sub, std::move(out));
}

}  // namespace hjb
