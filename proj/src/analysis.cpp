#include "hjb/analysis.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

#include "hjb/errors.hpp"

namespace hjb {

double kruzkhov_to_time(double v) {
    if (!(v >= 0.0 && v <= 1.0 + 1e-12)) throw InvalidArgument("Kruzkhov value outside [0, 1]");
    if (v >= 1.0 - 1e-14) return kInfiniteTime;
    return -std::log1p(-v);
}

double time_to_kruzkhov(double time) {
    if (std::isnan(time) || time < 0.0) throw InvalidArgument("arrival time must be non-negative");
    if (std::isinf(time)) return 1.0;
    return -std::expm1(-time);
}

ErrorRecord error_vs_reference(const ValueField& values,
                               const std::function<double(std::span<const double>)>& reference) {
    const auto& grid = values.grid();
    ValueField ref(grid);
    for (std::size_t f = 0; f < grid.node_count(); ++f) {
        const Vec x = grid.node(f);
        ref[f] = reference(std::span<const double>(x.data(), grid.dim()));
    }
    return {grid.min_spacing(), l1_diff(values, ref), sup_diff(values, ref)};
}

std::vector<ConvergenceRate> convergence_rates(std::span<const ErrorRecord> records) {
    if (records.size() < 2) throw InvalidArgument("convergence rates need at least two error records");
    std::vector<ConvergenceRate> rates;
    for (std::size_t k = 0; k + 1 < records.size(); ++k) {
        const auto& a = records[k];
        const auto& b = records[k + 1];
        if (std::abs(a.dx - 2.0 * b.dx) > 1e-9 * a.dx)
            throw InvalidArgument("convergence rates need successive mesh sizes halved exactly");
        rates.push_back({std::log2(a.l1_error / b.l1_error), std::log2(a.sup_error / b.sup_error)});
    }
    return rates;
}

void write_rate_table(std::ostream& out, std::span<const ErrorRecord> records,
                      std::span<const int> nodes_per_axis, char delimiter) {
    if (nodes_per_axis.size() != records.size())
        throw InvalidArgument("rate table needs one node count per record");
    std::vector<ConvergenceRate> rates;
    if (records.size() >= 2) rates = convergence_rates(records);
    const char d = delimiter;
    out << "nodes" << d << "dx" << d << "l1_error" << d << "l1_rate" << d << "sup_error" << d << "sup_rate\n";
    char buf[64];
    auto num = [&](double x) {
        std::snprintf(buf, sizeof buf, "%.6g", x);
        return std::string(buf);
    };
    for (std::size_t k = 0; k < records.size(); ++k) {
        const auto& r = records[k];
        out << nodes_per_axis[k] << d << num(r.dx) << d << num(r.l1_error) << d
            << (k == 0 ? std::string("-") : num(rates[k - 1].l1)) << d << num(r.sup_error) << d
            << (k == 0 ? std::string("-") : num(rates[k - 1].sup)) << '\n';
    }
}

namespace {

bool in_target(const ProblemSpec& spec, const RegularGrid& grid, std::span<const double> x) {
    const auto* mt = std::get_if<MinimumTime>(&spec.kind);
    if (!mt) return false;
    if (mt->point) {
        double dist2 = 0.0, diag2 = 0.0;
        for (int i = 0; i < grid.dim(); ++i) {
            const double e = x[i] - (*mt->point)[i];
            dist2 += e * e;
            diag2 += grid.spacing(i) * grid.spacing(i);
        }
        return dist2 <= 0.25 * diag2 * (1.0 + 1e-12);
    }
    return mt->target(x);
}

}  // namespace

Trajectory synthesize_trajectory(const ProblemSpec& spec, const ValueField& values, const ControlSet& controls,
                                 std::span<const double> x0, double dt, double max_time) {
    const auto& grid = values.grid();
    if (static_cast<int>(x0.size()) != grid.dim()) throw InvalidArgument("initial state has the wrong dimension");
    if (!(dt > 0.0)) throw InvalidArgument("time step must be positive");
    Trajectory traj;
    std::vector<double> x(x0.begin(), x0.end());
    double t = 0.0;
    // Steps are counted rather than accumulated so times are exactly k * dt.
    const auto max_steps = static_cast<long long>(std::floor(max_time / dt + 1e-9));
    for (long long k = 0;; ++k) {
        t = static_cast<double>(k) * dt;
        if (!grid.contains(x)) {
            traj.status = TrajectoryStatus::LeftDomain;
            break;
        }
        if (in_target(spec, grid, x)) {
            traj.status = TrajectoryStatus::ReachedTarget;
            break;
        }
        if (k >= max_steps) {
            traj.status = TrajectoryStatus::HorizonExceeded;
            break;
        }
        const std::size_t c = greedy_control(spec, values, controls, x, dt);
        traj.steps.push_back({t, x, c});
        x = euler_arrival(spec, x, controls[c], dt);
    }
    traj.final_state = std::move(x);
    traj.final_time = t;
    return traj;
}

ResidualSummary residual_diagnostics(const RunReport& report, int window, std::span<const double> thresholds) {
    if (window < 2) throw InvalidArgument("fit window must be at least 2");
    const auto& r = report.residual_history;
    ResidualSummary s;
    for (std::size_t k = 1; k < r.size(); ++k)
        if (r[k - 1] > 0.0) s.tail_ratios.push_back(r[k] / r[k - 1]);
    if (s.tail_ratios.size() > static_cast<std::size_t>(window))
        s.tail_ratios.erase(s.tail_ratios.begin(), s.tail_ratios.end() - window);

    // Least-squares slope of log r_k against k over the last `window` entries.
    if (r.size() >= static_cast<std::size_t>(window)) {
        const std::size_t start = r.size() - window;
        bool positive = true;
        double sk = 0, sy = 0, skk = 0, sky = 0;
        for (int j = 0; j < window; ++j) {
            const double y = r[start + j];
            if (!(y > 0.0)) {
                positive = false;
                break;
            }
            const double ly = std::log(y);
            sk += j;
            sy += ly;
            skk += double(j) * j;
            sky += j * ly;
        }
        if (positive) {
            const double n = window;
            const double slope = (n * sky - sk * sy) / (n * skk - sk * sk);
            s.tail_factor = std::exp(slope);
        }
    }
    if (s.tail_ratios.size() >= 2) s.ratios_decreasing = s.tail_ratios.back() < s.tail_ratios[s.tail_ratios.size() - 2];

    for (double th : thresholds) {
        int hit = -1;
        for (std::size_t k = 0; k < r.size(); ++k)
            if (r[k] <= th) {
                hit = static_cast<int>(k) + 1;
                break;
            }
        s.iterations_to_threshold.emplace_back(th, hit);
    }
    return s;
}

}  // namespace hjb
