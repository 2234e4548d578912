#include "hjb/problem.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "hjb/errors.hpp"

namespace hjb {

ControlSet::ControlSet(std::vector<std::vector<double>> controls) : controls_(std::move(controls)) {
    if (controls_.empty()) throw InvalidArgument("control set must not be empty");
    const auto m = controls_.front().size();
    if (m == 0) throw InvalidArgument("controls must have at least one component");
    for (const auto& c : controls_) {
        if (c.size() != m) throw InvalidArgument("controls must share one dimension");
        for (double v : c)
            if (!std::isfinite(v)) throw InvalidArgument("control components must be finite");
    }
    for (std::size_t i = 0; i < controls_.size(); ++i)
        for (std::size_t j = i + 1; j < controls_.size(); ++j)
            if (controls_[i] == controls_[j])
                throw InvalidArgument("duplicate control at indices " + std::to_string(i) + " and " +
                                      std::to_string(j));
}

ControlSet discretize_control_box(std::span<const ControlAxis> axes) {
    if (axes.empty()) throw InvalidArgument("control box needs at least one axis");
    std::vector<std::vector<double>> samples;
    for (const auto& ax : axes) {
        if (ax.count < 1) throw InvalidArgument("control count per axis must be >= 1");
        if (!(ax.lower <= ax.upper)) throw InvalidArgument("control interval needs lower <= upper");
        std::vector<double> s(ax.count);
        if (ax.count == 1) {
            s[0] = 0.5 * (ax.lower + ax.upper);
        } else if (ax.periodic) {
            for (int k = 0; k < ax.count; ++k)
                s[k] = ax.lower + (ax.upper - ax.lower) * k / ax.count;
        } else {
            for (int k = 0; k < ax.count; ++k)
                s[k] = ax.lower + (ax.upper - ax.lower) * k / (ax.count - 1);
        }
        samples.push_back(std::move(s));
    }
    std::vector<std::vector<double>> controls{{}};
    for (const auto& s : samples) {
        std::vector<std::vector<double>> next;
        next.reserve(controls.size() * s.size());
        for (const auto& prefix : controls)
            for (double v : s) {
                auto c = prefix;
                c.push_back(v);
                next.push_back(std::move(c));
            }
        controls = std::move(next);
    }
    return ControlSet(std::move(controls));
}

void ProblemSpec::validate() const {
    if (state_dim < 1 || state_dim > kMaxDim)
        throw InvalidArgument(name + ": state dimension must be between 1 and 4");
    if (lower.size() != static_cast<std::size_t>(state_dim) ||
        upper.size() != static_cast<std::size_t>(state_dim))
        throw InvalidArgument(name + ": domain bounds must match the state dimension");
    for (int i = 0; i < state_dim; ++i)
        if (!(lower[i] < upper[i])) throw InvalidArgument(name + ": domain needs lower < upper");
    if (!dynamics) throw InvalidArgument(name + ": dynamics missing");
    if (const auto* ih = std::get_if<InfiniteHorizon>(&kind)) {
        if (!(ih->discount_rate > 0.0))
            throw InvalidArgument(name + ": discount rate must be positive");
        if (!running_cost) throw InvalidArgument(name + ": running cost missing");
    } else {
        const auto& mt = std::get<MinimumTime>(kind);
        if (!mt.target && !mt.point) throw InvalidArgument(name + ": minimum-time target missing");
        if (mt.point && mt.point->size() != static_cast<std::size_t>(state_dim))
            throw InvalidArgument(name + ": point target dimension mismatch");
    }
    if (!std::isfinite(exterior_value)) throw InvalidArgument(name + ": exterior value must be finite");
}

std::vector<double> euler_arrival(const ProblemSpec& spec, std::span<const double> x,
                                  std::span<const double> a, double dt) {
    if (!(dt > 0.0)) throw InvalidArgument("time step must be positive");
    if (x.size() != static_cast<std::size_t>(spec.state_dim))
        throw InvalidArgument("state dimension mismatch");
    std::vector<double> v(x.size());
    spec.dynamics(x, a, v);
    std::vector<double> y(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!std::isfinite(v[i])) throw NumericError(spec.name + ": non-finite dynamics output");
        y[i] = x[i] + dt * v[i];
    }
    return y;
}

std::size_t TargetMask::count() const {
    return static_cast<std::size_t>(std::count(inside.begin(), inside.end(), char{1}));
}

TargetMask target_mask(const ProblemSpec& spec, const RegularGrid& grid) {
    if (grid.dim() != spec.state_dim) throw InvalidArgument("grid dimension does not match problem");
    TargetMask mask{grid, std::vector<char>(grid.node_count(), 0)};
    const auto* mt = std::get_if<MinimumTime>(&spec.kind);
    if (!mt) return mask;

    const int d = grid.dim();
    if (mt->target) {
        for (std::size_t f = 0; f < grid.node_count(); ++f) {
            const auto x = grid.node(f);
            if (mt->target(std::span<const double>(x.data(), d))) mask.inside[f] = 1;
        }
    }
    if (mt->point) {
        const auto& p = *mt->point;
        double half_diag = 0.0;
        for (int i = 0; i < d; ++i) half_diag += grid.spacing(i) * grid.spacing(i);
        half_diag = 0.5 * std::sqrt(half_diag) * (1.0 + 1e-12);
        double best = std::numeric_limits<double>::infinity();
        std::size_t nearest = 0;
        for (std::size_t f = 0; f < grid.node_count(); ++f) {
            const auto x = grid.node(f);
            double r2 = 0.0;
            for (int i = 0; i < d; ++i) r2 += (x[i] - p[i]) * (x[i] - p[i]);
            const double r = std::sqrt(r2);
            if (r < best) {
                best = r;
                nearest = f;
            }
            if (r <= half_diag) mask.inside[f] = 1;
        }
        mask.inside[nearest] = 1;
    }
    if (mask.count() == 0)
        throw InvalidArgument(spec.name + ": target contains no grid node; refine the mesh so the "
                              "target is resolved");
    return mask;
}

RegularGrid make_grid(const ProblemSpec& spec, int nodes, std::size_t node_cap) {
    std::vector<int> n(spec.state_dim, nodes);
    return RegularGrid(spec.lower, spec.upper, n, node_cap);
}

}  // namespace hjb
