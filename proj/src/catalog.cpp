#include "hjb/catalog.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>

#include "hjb/analysis.hpp"
#include "hjb/errors.hpp"

namespace hjb {

namespace {

constexpr double kPi = std::numbers::pi;

using Builder = CatalogEntry (*)(const ProblemOverrides&);

double norm2(std::span<const double> x) {
    double s = 0.0;
    for (double v : x) s += v * v;
    return std::sqrt(s);
}

std::vector<double> filled(int d, double v) { return std::vector<double>(d, v); }

// Applies the override counts (if any) to the default control axes.
ControlSet controls_from(std::vector<ControlAxis> axes, const ProblemOverrides& o,
                         const std::string& name) {
    if (o.control_counts) {
        if (o.control_counts->size() != axes.size())
            throw InvalidArgument(name + ": expected " + std::to_string(axes.size()) +
                                  " control counts");
        for (std::size_t i = 0; i < axes.size(); ++i) axes[i].count = (*o.control_counts)[i];
    }
    return discretize_control_box(axes);
}

void reject_control_override(const ProblemOverrides& o, const std::string& name) {
    if (o.control_counts)
        throw InvalidArgument(name + ": control set is fixed and cannot be resized");
}

void apply_domain(ProblemSpec& spec, const ProblemOverrides& o) {
    if (o.domain_lower) std::fill(spec.lower.begin(), spec.lower.end(), *o.domain_lower);
    if (o.domain_upper) std::fill(spec.upper.begin(), spec.upper.end(), *o.domain_upper);
    if (o.exterior_value) spec.exterior_value = *o.exterior_value;
}

double discount_of(const ProblemOverrides& o) { return o.discount_rate.value_or(1.0); }

void reject_discount(const ProblemOverrides& o, const std::string& name) {
    if (o.discount_rate) throw InvalidArgument(name + ": minimum-time problems have no discount rate");
}

CatalogEntry test1_1d(const ProblemOverrides& o) {
    ProblemSpec s;
    s.name = "test1_1d";
    s.state_dim = 1;
    s.dynamics = [](auto x, auto a, auto v) { v[0] = a[0] * (1.0 - std::abs(x[0])); };
    s.running_cost = [](auto x, auto) { return 3.0 * (1.0 - std::abs(x[0])); };
    s.kind = InfiniteHorizon{discount_of(o)};
    s.lower = {-1.0};
    s.upper = {1.0};
    s.exterior_value = 0.0;
    s.boundary_value = 0.0;
    apply_domain(s, o);
    auto controls = controls_from({{-1.0, 1.0, 20}}, o, s.name);
    // Closed form valid for lambda = 1 on (-1, 1).
    std::function<double(std::span<const double>)> exact;
    if (discount_of(o) == 1.0)
        exact = [](std::span<const double> x) { return 1.5 * (1.0 - std::abs(x[0])); };
    return {std::move(s), std::move(controls), o.dt_ratio.value_or(0.5), exact};
}

CatalogEntry test2_vdp(const ProblemOverrides& o) {
    ProblemSpec s;
    s.name = "test2_vdp";
    s.state_dim = 2;
    s.dynamics = [](auto x, auto a, auto v) {
        v[0] = x[1];
        v[1] = (1.0 - x[0] * x[0]) * x[1] - x[0] + a[0];
    };
    s.running_cost = [](auto x, auto) { return x[0] * x[0] + x[1] * x[1]; };
    s.kind = InfiniteHorizon{discount_of(o)};
    s.lower = filled(2, -2.0);
    s.upper = filled(2, 2.0);
    s.exterior_value = 3.5;
    s.boundary_value = 3.5;
    apply_domain(s, o);
    if (o.exterior_value) s.boundary_value = *o.exterior_value;
    auto controls = controls_from({{-1.0, 1.0, 32}}, o, s.name);
    return {std::move(s), std::move(controls), o.dt_ratio.value_or(0.3), {}};
}

CatalogEntry test3_dubins(const ProblemOverrides& o) {
    ProblemSpec s;
    s.name = "test3_dubins";
    s.state_dim = 3;
    s.dynamics = [](auto x, auto a, auto v) {
        v[0] = std::cos(x[2]);
        v[1] = std::sin(x[2]);
        v[2] = a[0];
    };
    s.running_cost = [](auto x, auto) { return x[0] * x[0] + x[1] * x[1]; };
    s.kind = InfiniteHorizon{discount_of(o)};
    s.lower = filled(3, -2.0);
    s.upper = filled(3, 2.0);
    s.exterior_value = 3.0;
    s.boundary_value = 3.0;
    apply_domain(s, o);
    if (o.exterior_value) s.boundary_value = *o.exterior_value;
    auto controls = controls_from({{-1.0, 1.0, 11}}, o, s.name);
    return {std::move(s), std::move(controls), o.dt_ratio.value_or(0.2), {}};
}

void eikonal2d(auto x, auto a, auto v) {
    (void)x;
    v[0] = std::cos(a[0]);
    v[1] = std::sin(a[0]);
}

void eikonal3d(auto x, auto a, auto v) {
    (void)x;
    v[0] = std::sin(a[0]) * std::cos(a[1]);
    v[1] = std::sin(a[0]) * std::sin(a[1]);
    v[2] = std::cos(a[0]);
}

ProblemSpec minimum_time_base(std::string name, int d, double lo, double hi) {
    ProblemSpec s;
    s.name = std::move(name);
    s.state_dim = d;
    s.lower = filled(d, lo);
    s.upper = filled(d, hi);
    s.exterior_value = 1.0;
    return s;
}

CatalogEntry test4_eik2d(const ProblemOverrides& o) {
    reject_discount(o, "test4_eik2d");
    auto s = minimum_time_base("test4_eik2d", 2, -1.0, 1.0);
    s.dynamics = [](auto x, auto a, auto v) { eikonal2d(x, a, v); };
    s.kind = MinimumTime{nullptr, std::vector<double>{0.0, 0.0}};
    apply_domain(s, o);
    auto controls = controls_from({{-kPi, kPi, 64, true}}, o, s.name);
    auto ref = [](std::span<const double> x) { return time_to_kruzkhov(norm2(x)); };
    return {std::move(s), std::move(controls), o.dt_ratio.value_or(0.8), ref};
}

CatalogEntry test5_eik2d_disk(const ProblemOverrides& o) {
    reject_discount(o, "test5_eik2d_disk");
    auto s = minimum_time_base("test5_eik2d_disk", 2, -2.0, 2.0);
    s.dynamics = [](auto x, auto a, auto v) { eikonal2d(x, a, v); };
    s.kind = MinimumTime{[](std::span<const double> x) { return norm2(x) <= 1.0; }, std::nullopt};
    apply_domain(s, o);
    auto controls = controls_from({{-kPi, kPi, 72, true}}, o, s.name);
    auto ref = [](std::span<const double> x) {
        return time_to_kruzkhov(std::max(0.0, norm2(x) - 1.0));
    };
    return {std::move(s), std::move(controls), o.dt_ratio.value_or(0.8), ref};
}

CatalogEntry test6_eik3d(const ProblemOverrides& o) {
    reject_discount(o, "test6_eik3d");
    auto s = minimum_time_base("test6_eik3d", 3, -1.0, 1.0);
    s.dynamics = [](auto x, auto a, auto v) { eikonal3d(x, a, v); };
    s.kind = MinimumTime{nullptr, std::vector<double>{0.0, 0.0, 0.0}};
    apply_domain(s, o);
    auto controls = controls_from({{-kPi, kPi, 16, true}, {0.0, kPi, 8}}, o, s.name);
    auto ref = [](std::span<const double> x) { return time_to_kruzkhov(norm2(x)); };
    return {std::move(s), std::move(controls), o.dt_ratio.value_or(0.8), ref};
}

double two_sphere_distance(std::span<const double> x) {
    const double left[3] = {x[0] + 1.0, x[1], x[2]};
    const double right[3] = {x[0] - 1.0, x[1], x[2]};
    return std::max(0.0, std::min(norm2(left), norm2(right)) - 1.0);
}

CatalogEntry test7_eik3d_spheres(const ProblemOverrides& o) {
    reject_discount(o, "test7_eik3d_spheres");
    auto s = minimum_time_base("test7_eik3d_spheres", 3, -6.0, 6.0);
    s.dynamics = [](auto x, auto a, auto v) { eikonal3d(x, a, v); };
    s.kind = MinimumTime{[](std::span<const double> x) { return two_sphere_distance(x) <= 0.0; },
                         std::nullopt};
    apply_domain(s, o);
    auto controls = controls_from({{-kPi, kPi, 16, true}, {0.0, kPi, 8}}, o, s.name);
    auto ref = [](std::span<const double> x) { return time_to_kruzkhov(two_sphere_distance(x)); };
    return {std::move(s), std::move(controls), o.dt_ratio.value_or(0.8), ref};
}

CatalogEntry test8_min4d(const ProblemOverrides& o) {
    reject_discount(o, "test8_min4d");
    reject_control_override(o, "test8_min4d");
    auto s = minimum_time_base("test8_min4d", 4, -1.0, 1.0);
    s.dynamics = [](auto, auto a, auto v) {
        for (int i = 0; i < 4; ++i) v[i] = a[i];
    };
    // Leaving the box means the boundary (the target) was crossed.
    s.exterior_value = 0.0;
    apply_domain(s, o);
    const double lo = s.lower[0], hi = s.upper[0];
    const double tol = 1e-9 * (hi - lo);
    s.kind = MinimumTime{[lo, hi, tol](std::span<const double> x) {
                             for (double v : x)
                                 if (v <= lo + tol || v >= hi - tol) return true;
                             return false;
                         },
                         std::nullopt};
    std::vector<std::vector<double>> dirs;
    for (int i = 0; i < 4; ++i)
        for (double sign : {-1.0, 1.0}) {
            std::vector<double> a(4, 0.0);
            a[i] = sign;
            dirs.push_back(a);
        }
    auto ref = [lo, hi](std::span<const double> x) {
        double d = std::numeric_limits<double>::infinity();
        for (double v : x) d = std::min({d, v - lo, hi - v});
        return time_to_kruzkhov(std::max(0.0, d));
    };
    return {std::move(s), ControlSet(std::move(dirs)), o.dt_ratio.value_or(0.8), ref};
}

CatalogEntry heat3_rom(const ProblemOverrides& o) {
    reject_discount(o, "heat3_rom");
    reject_control_override(o, "heat3_rom");
    auto s = minimum_time_base("heat3_rom", 3, -1.0, 1.0);
    s.dynamics = [](auto x, auto a, auto v) {
        using M = ReducedHeatModel;
        for (int i = 0; i < 3; ++i)
            v[i] = M::A[i][0] * x[0] + M::A[i][1] * x[1] + M::A[i][2] * x[2] + M::B[i] * a[0];
    };
    apply_domain(s, o);
    const double radius = o.target_radius.value_or(2.0 * o.mesh_spacing.value_or(0.1));
    if (!(radius > 0.0)) throw InvalidArgument("heat3_rom: target radius must be positive");
    s.kind = MinimumTime{[radius](std::span<const double> x) { return norm2(x) <= radius; },
                         std::nullopt};
    ControlSet controls({{-1.0}, {0.0}, {1.0}});
    return {std::move(s), std::move(controls), o.dt_ratio.value_or(0.2), {}};
}

const std::map<std::string, Builder>& registry() {
    static const std::map<std::string, Builder> r = {
        {"test1_1d", &test1_1d},
        {"test2_vdp", &test2_vdp},
        {"test3_dubins", &test3_dubins},
        {"test4_eik2d", &test4_eik2d},
        {"test5_eik2d_disk", &test5_eik2d_disk},
        {"test6_eik3d", &test6_eik3d},
        {"test7_eik3d_spheres", &test7_eik3d_spheres},
        {"test8_min4d", &test8_min4d},
        {"heat3_rom", &heat3_rom},
    };
    return r;
}

}  // namespace

const std::vector<std::string>& catalog_names() {
    static const std::vector<std::string> names = [] {
        std::vector<std::string> n;
        for (const auto& [k, _] : registry()) n.push_back(k);
        return n;
    }();
    return names;
}

CatalogEntry catalog(const std::string& name, const ProblemOverrides& overrides) {
    const auto it = registry().find(name);
    if (it == registry().end()) {
        std::string valid;
        for (const auto& n : catalog_names()) valid += (valid.empty() ? "" : ", ") + n;
        throw InvalidArgument("unknown problem '" + name + "'; valid names: " + valid);
    }
    if (overrides.dt_ratio && !(*overrides.dt_ratio > 0.0))
        throw InvalidArgument(name + ": dt ratio must be positive");
    auto entry = it->second(overrides);
    entry.spec.validate();
    return entry;
}

}  // namespace hjb
