#include "hjb/scheme.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <string>

#include "hjb/detail/interp.hpp"
#include "hjb/errors.hpp"
#include "hjb/solvers.hpp"

namespace hjb {

namespace {

// Collects the first exception thrown inside an OpenMP loop; rethrown after the region.
class LoopErrors {
public:
    template <class F>
    void run(F&& body) noexcept {
        try {
            body();
        } catch (...) {
#pragma omp critical(hjb_loop_errors)
            if (!first_) first_ = std::current_exception();
        }
    }
    void rethrow() const {
        if (first_) std::rethrow_exception(first_);
    }

private:
    std::exception_ptr first_;
};

}  // namespace

Scheme::Scheme(const ProblemSpec& spec, const RegularGrid& grid, const ControlSet& controls, double dt)
    : spec_(&spec), grid_(grid), controls_(&controls), dt_(dt), minimum_time_(spec.is_minimum_time()) {
    if (!(dt > 0.0)) throw InvalidArgument("time step must be positive");
    if (grid.dim() != spec.state_dim) throw InvalidArgument("grid dimension does not match problem");
    if (minimum_time_) {
        discount_ = std::exp(-dt);
        stage_constant_ = -std::expm1(-dt);
    } else {
        discount_ = std::exp(-std::get<InfiniteHorizon>(spec.kind).discount_rate * dt);
    }
    const auto mask = target_mask(spec, grid);
    kind_.assign(grid.node_count(), static_cast<char>(Node::Free));
    for (std::size_t f = 0; f < grid.node_count(); ++f) {
        if (mask.inside[f])
            kind_[f] = static_cast<char>(Node::Target);
        else if (spec.boundary_value && grid.on_boundary(f))
            kind_[f] = static_cast<char>(Node::Boundary);
        else
            ++free_count_;
    }
}

double Scheme::pinned_value(std::size_t node) const {
    return kind(node) == Node::Target ? 0.0 : spec_->boundary_value.value_or(0.0);
}

void Scheme::apply_pins(std::vector<double>& values) const {
    for (std::size_t f = 0; f < values.size(); ++f)
        if (kind(f) != Node::Free) values[f] = pinned_value(f);
}

double Scheme::stage_cost(const double* x, std::size_t c) const {
    if (minimum_time_) return stage_constant_;
    const int d = grid_.dim();
    return dt_ * spec_->running_cost(std::span<const double>(x, d), (*controls_)[c]);
}

double Scheme::q_value_at(const double* x, std::size_t c, const double* values) const {
    const int d = grid_.dim();
    double v[kMaxDim];
    double y[kMaxDim];
    spec_->dynamics(std::span<const double>(x, d), (*controls_)[c], std::span<double>(v, d));
    for (int i = 0; i < d; ++i) y[i] = x[i] + dt_ * v[i];
    const double q =
        discount_ * detail::interpolate_raw(grid_, values, y, spec_->exterior_value) + stage_cost(x, c);
    if (!std::isfinite(q))
        throw NumericError(spec_->name + ": non-finite Bellman term for control " + std::to_string(c));
    return q;
}

double Scheme::q_value_checked(std::size_t node, const double* x, std::size_t c,
                               const double* values) const {
    try {
        return q_value_at(x, c, values);
    } catch (const NumericError& e) {
        throw NumericError(std::string(e.what()) + " at node " + std::to_string(node));
    }
}

double Scheme::q_value(std::size_t node, std::size_t c, const double* values) const {
    const auto x = grid_.node(node);
    return q_value_checked(node, x.data(), c, values);
}

double Scheme::bellman_sweep(const std::vector<double>& in, std::vector<double>& out,
                             std::vector<int>& policy) const {
    const auto n = static_cast<std::ptrdiff_t>(grid_.node_count());
    const std::size_t m = controls_->size();
    const double* vin = in.data();
    double residual = 0.0;
    LoopErrors errors;
#pragma omp parallel for schedule(static) reduction(max : residual)
    for (std::ptrdiff_t f = 0; f < n; ++f) {
        errors.run([&] {
            const auto node = static_cast<std::size_t>(f);
            if (kind(node) != Node::Free) {
                out[node] = pinned_value(node);
                policy[node] = PolicyField::kUndefined;
            } else {
                const auto x = grid_.node(node);
                double best = std::numeric_limits<double>::infinity();
                int arg = 0;
                for (std::size_t c = 0; c < m; ++c) {
                    const double q = q_value_checked(node, x.data(), c, vin);
                    if (q < best) {
                        best = q;
                        arg = static_cast<int>(c);
                    }
                }
                out[node] = best;
                policy[node] = arg;
            }
            residual = std::max(residual, std::abs(out[node] - vin[node]));
        });
    }
    errors.rethrow();
    return residual;
}

void Scheme::greedy_sweep(const std::vector<double>& values, std::vector<int>& policy) const {
    const auto n = static_cast<std::ptrdiff_t>(grid_.node_count());
    const std::size_t m = controls_->size();
    const double* v = values.data();
    LoopErrors errors;
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t f = 0; f < n; ++f) {
        errors.run([&] {
            const auto node = static_cast<std::size_t>(f);
            if (kind(node) != Node::Free) {
                policy[node] = PolicyField::kUndefined;
                return;
            }
            const auto x = grid_.node(node);
            double best = std::numeric_limits<double>::infinity();
            int arg = 0;
            for (std::size_t c = 0; c < m; ++c) {
                const double q = q_value_checked(node, x.data(), c, v);
                if (q < best) {
                    best = q;
                    arg = static_cast<int>(c);
                }
            }
            policy[node] = arg;
        });
    }
    errors.rethrow();
}

Scheme::FrozenPolicy Scheme::freeze(const std::vector<int>& policy) const {
    const int d = grid_.dim();
    FrozenPolicy fp;
    fp.nodes.reserve(free_count_);
    for (std::size_t f = 0; f < grid_.node_count(); ++f) {
        if (kind(f) != Node::Free) continue;
        const int c = policy[f];
        if (c < 0 || static_cast<std::size_t>(c) >= controls_->size())
            throw InvalidArgument("policy undefined or out of range at free node " + std::to_string(f));
        fp.nodes.push_back(f);
    }
    fp.arrivals.resize(fp.nodes.size() * d);
    fp.stage.resize(fp.nodes.size());
    const auto n = static_cast<std::ptrdiff_t>(fp.nodes.size());
    LoopErrors errors;
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t j = 0; j < n; ++j) {
        errors.run([&] {
            const std::size_t node = fp.nodes[j];
            const auto c = static_cast<std::size_t>(policy[node]);
            const auto x = grid_.node(node);
            double v[kMaxDim];
            spec_->dynamics(std::span<const double>(x.data(), d), (*controls_)[c], std::span<double>(v, d));
            for (int i = 0; i < d; ++i) {
                if (!std::isfinite(v[i]))
                    throw NumericError(spec_->name + ": non-finite dynamics at node " +
                                       std::to_string(node) + ", control " + std::to_string(c));
                fp.arrivals[j * d + i] = x[i] + dt_ * v[i];
            }
            fp.stage[j] = stage_cost(x.data(), c);
        });
    }
    errors.rethrow();
    return fp;
}

double Scheme::evaluation_sweep(const FrozenPolicy& frozen, const std::vector<double>& in,
                                std::vector<double>& out) const {
    const int d = grid_.dim();
    const double ext = spec_->exterior_value;
    const double* vin = in.data();
    // Pinned nodes never change; copy them first.
    for (std::size_t f = 0; f < in.size(); ++f)
        if (kind(f) != Node::Free) out[f] = pinned_value(f);
    double residual = 0.0;
    const auto n = static_cast<std::ptrdiff_t>(frozen.nodes.size());
#pragma omp parallel for schedule(static) reduction(max : residual)
    for (std::ptrdiff_t j = 0; j < n; ++j) {
        const std::size_t node = frozen.nodes[j];
        const double v = frozen.stage[j] +
                         discount_ * detail::interpolate_raw(grid_, vin, &frozen.arrivals[j * d], ext);
        out[node] = v;
        residual = std::max(residual, std::isfinite(v) ? std::abs(v - vin[node])
                                                       : std::numeric_limits<double>::infinity());
    }
    if (!std::isfinite(residual)) throw NumericError(spec_->name + ": non-finite policy evaluation");
    return residual;
}

void set_worker_count(int workers) {
    if (workers < 1) throw InvalidArgument("worker count must be at least 1");
    omp_set_num_threads(workers);
}

int worker_count() { return omp_get_max_threads(); }

}  // namespace hjb
