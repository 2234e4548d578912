#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <ostream>
#include <random>
#include <sstream>

#include "hjb/errors.hpp"
#include "hjb/experiment.hpp"

namespace hjb {

namespace fs = std::filesystem;

namespace {

struct TableSpec {
    const char* table;
    const char* problem;
    std::vector<int> sizes;
    std::vector<Algorithm> algorithms;
};

const std::vector<TableSpec>& paper_tables() {
    using A = Algorithm;
    static const std::vector<TableSpec> t = {
        {"test1", "test1_1d", {81, 161, 321}, {A::VI, A::PI, A::API}},
        {"test2", "test2_vdp", {41, 81, 161}, {A::VI, A::PI, A::API}},
        {"dubins", "test3_dubins", {21, 41}, {A::VI, A::API}},
        {"test4", "test4_eik2d", {41, 81, 161}, {A::VI, A::API}},
        {"test5", "test5_eik2d_disk", {41, 81, 161}, {A::VI, A::API}},
        {"eik3d", "test6_eik3d", {21, 41}, {A::VI, A::API}},
        {"spheres", "test7_eik3d_spheres", {21, 41}, {A::VI, A::API}},
        {"min4d", "test8_min4d", {11, 21}, {A::VI, A::API}},
        {"heat", "heat3_rom", {21, 41}, {A::VI, A::API}},
    };
    return t;
}

std::string fmt(const char* f, double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, x);
    return buf;
}

bool size_allowed(int nodes, int dim, const SuiteOptions& o) {
    if (o.max_nodes > 0 && nodes > o.max_nodes) return false;
    return o.allow_large || nodes <= desk_node_limit(dim);
}

void save_table(const SuiteOptions& o, const std::string& name, const std::string& text) {
    std::error_code ec;
    fs::create_directories(o.output_dir, ec);
    if (ec) throw IoError("cannot create output directory " + o.output_dir.string());
    write_file_atomic(o.output_dir / (name + ".csv"), text);
}

int run_paper_tables(const SuiteOptions& o, std::ostream& out) {
    int failures = 0;
    for (const auto& t : paper_tables()) {
        std::ostringstream table;
        table << "nodes,dx,algorithm,wall_seconds,iterations,node_updates,epsilon,converged,status\n";
        const int dim = catalog(t.problem).spec.state_dim;
        for (int n : t.sizes) {
            if (!size_allowed(n, dim, o)) continue;
            for (Algorithm a : t.algorithms) {
                if (a == Algorithm::API && n % 2 == 0) continue;
                std::string status = "ok";
                RunReport r;
                try {
                    const auto entry = make_entry(t.problem, {}, n);
                    RunSettings s;
                    s.algorithm = a;
                    s.fine_nodes = n;
                    s.record_residuals = false;
                    r = solve(entry, s).report;
                    const double h = r.dx;
                    if (std::abs(r.tolerance - s.stop_constant * h * h) > 1e-15 * r.tolerance)
                        status = "epsilon-mismatch";
                    else if (!r.converged)
                        status = "not-converged";
                } catch (const std::exception& e) {
                    status = std::string("error: ") + e.what();
                    std::replace(status.begin(), status.end(), ',', ';');
                }
                if (status != "ok") ++failures;
                table << n << ',' << fmt("%.6g", r.dx) << ',' << algorithm_name(a) << ','
                      << fmt("%.3f", r.wall_time_seconds) << ',' << r.outer_iterations << ',' << r.node_updates
                      << ',' << fmt("%.6g", r.tolerance) << ',' << (r.converged ? "true" : "false") << ','
                      << status << '\n';
            }
        }
        out << "# " << t.table << " (" << t.problem << ")\n" << table.str() << '\n';
        out.flush();
        save_table(o, t.table, table.str());
    }
    return failures == 0 ? exit_code::ok : exit_code::not_converged;
}

int run_rates(const SuiteOptions& o, std::ostream& out) {
    std::vector<ErrorRecord> records;
    std::vector<int> nodes;
    int status = exit_code::ok;
    for (int n : {41, 81, 161, 321}) {
        if (!size_allowed(n, 2, o)) continue;
        const auto entry = make_entry("test4_eik2d", {}, n);
        RunSettings s;
        s.fine_nodes = n;
        s.record_residuals = false;
        const auto sol = solve(entry, s);
        if (!sol.report.converged) status = exit_code::not_converged;
        records.push_back(error_vs_reference(sol.values, entry.reference));
        nodes.push_back(n);
    }
    if (records.empty()) throw InvalidArgument("rates suite: every grid size exceeds the node limit");
    std::ostringstream table;
    write_rate_table(table, records, nodes);
    out << "# rates (test4_eik2d, API)\n" << table.str();
    save_table(o, "rates", table.str());
    return status;
}

// Property checks on small grids; one row per property.
int run_invariants(const SuiteOptions& o, std::ostream& out) {
    std::ostringstream table;
    table << "property,result,detail\n";
    int failures = 0;
    auto record = [&](const std::string& name, bool ok, const std::string& detail) {
        if (!ok) ++failures;
        table << name << ',' << (ok ? "pass" : "fail") << ',' << detail << '\n';
    };
    auto guarded = [&](const std::string& name, const std::function<void()>& body) {
        try {
            body();
        } catch (const std::exception& e) {
            record(name, false, std::string("error: ") + e.what());
        }
    };
    std::mt19937_64 rng(20240517);

    auto contraction = [&](const char* problem, int n) {
        guarded(std::string("contraction/") + problem, [&] {
            const auto entry = make_entry(problem, {}, n);
            const auto grid = make_grid(entry.spec, n);
            SolverConfig cfg;
            cfg.dt = entry.dt_ratio * grid.min_spacing();
            const double factor =
                entry.spec.is_minimum_time()
                    ? std::exp(-cfg.dt)
                    : std::exp(-std::get<InfiniteHorizon>(entry.spec.kind).discount_rate * cfg.dt);
            const auto base = initial_guess(entry.spec, grid);
            const auto mask = target_mask(entry.spec, grid);
            std::uniform_real_distribution<double> u(0.0, 1.0);
            double worst = 0.0;
            for (int k = 0; k < 20; ++k) {
                ValueField a = base, b = base;
                for (std::size_t f = 0; f < grid.node_count(); ++f) {
                    if (mask.inside[f] || (entry.spec.boundary_value && grid.on_boundary(f))) continue;
                    a[f] = u(rng);
                    b[f] = u(rng);
                }
                const double d0 = sup_diff(a, b);
                const double d1 = sup_diff(bellman_update(entry.spec, grid, a, entry.controls, cfg).values,
                                           bellman_update(entry.spec, grid, b, entry.controls, cfg).values);
                worst = std::max(worst, d1 / d0);
            }
            record(std::string("contraction/") + problem, worst <= factor + 1e-10,
                   "max ratio " + fmt("%.12g", worst) + " vs " + fmt("%.12g", factor));
        });
    };
    contraction("test1_1d", 81);
    contraction("test4_eik2d", 21);

    guarded("prolongation", [&] {
        const auto coarse = RegularGrid::uniform(2, -1.0, 1.0, 11);
        const auto fine = coarse.refined();
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        bool ok = true;
        for (int k = 0; k < 20; ++k) {
            ValueField a(coarse), b(coarse);
            for (std::size_t f = 0; f < coarse.node_count(); ++f) {
                a[f] = u(rng);
                b[f] = u(rng);
            }
            const auto pa = prolongate(a, fine), pb = prolongate(b, fine);
            ok = ok && sup_diff(pa, pb) <= sup_diff(a, b);
            for (std::size_t f = 0; f < coarse.node_count(); ++f) {
                auto m = coarse.unflatten(f);
                for (int i = 0; i < 2; ++i) m[i] *= 2;
                ok = ok && pa[fine.flatten(m)] == a[f];
            }
        }
        record("prolongation", ok, "coincident nodes and residual bound");
    });

    guarded("minimum-time-range", [&] {
        const auto entry = make_entry("test4_eik2d", {}, 41);
        RunSettings s;
        s.fine_nodes = 41;
        const auto sol = solve(entry, s);
        const auto [lo, hi] = std::minmax_element(sol.values.values().begin(), sol.values.values().end());
        const auto grid = sol.values.grid();
        double asym = 0.0;
        for (std::size_t f = 0; f < grid.node_count(); ++f) {
            const auto m = grid.unflatten(f);
            const int n = grid.nodes(0) - 1;
            const int i = m[0], j = m[1];
            const int images[8][2] = {{i, j}, {n - i, j}, {i, n - j}, {n - i, n - j},
                                      {j, i}, {n - j, i}, {j, n - i}, {n - j, n - i}};
            for (const auto& im : images)
                asym = std::max(asym, std::abs(sol.values[f] - sol.values[grid.flatten({im[0], im[1], 0, 0})]));
        }
        const bool ok = *lo >= 0.0 && *hi <= 1.0 && sol.values[grid.node_count() / 2] == 0.0 && asym <= 1e-12;
        record("minimum-time-range", ok,
               "min " + fmt("%.3g", *lo) + " max " + fmt("%.6g", *hi) + " asym " + fmt("%.3g", asym));
    });

    guarded("pi-monotone", [&] {
        const auto entry = make_entry("test1_1d", {}, 81);
        const auto grid = make_grid(entry.spec, 81);
        SolverConfig cfg;
        cfg.dt = entry.dt_ratio * grid.min_spacing();
        const double eps = cfg.tolerance(grid);
        std::optional<ValueField> prev;
        double worst = -1e300;
        policy_iteration(entry.spec, grid, entry.controls, cfg, PolicyField(grid, 0), initial_guess(entry.spec, grid),
                         [&](int, const ValueField& v) {
                             if (prev)
                                 for (std::size_t f = 0; f < v.size(); ++f)
                                     worst = std::max(worst, v[f] - (*prev)[f]);
                             prev = v;
                         });
        record("pi-monotone", worst <= 10 * eps, "max increase " + fmt("%.3g", worst));
    });

    guarded("determinism", [&] {
        const auto entry = make_entry("test4_eik2d", {}, 41);
        RunSettings s;
        s.fine_nodes = 41;
        const int before = worker_count();
        set_worker_count(1);
        const auto a = solve(entry, s);
        set_worker_count(4);
        const auto b = solve(entry, s);
        set_worker_count(before);
        bool same = a.report.outer_iterations == b.report.outer_iterations;
        for (std::size_t f = 0; f < a.values.size(); ++f) same = same && a.values[f] == b.values[f];
        record("determinism", same, "1 vs 4 workers");
    });

    out << "# invariants\n" << table.str();
    save_table(o, "invariants", table.str());
    return failures == 0 ? exit_code::ok : 1;
}

}  // namespace

const std::vector<std::string>& suite_names() {
    static const std::vector<std::string> n = {"paper_tables", "invariants", "rates"};
    return n;
}

int run_suite(const std::string& name, const SuiteOptions& options, std::ostream& out) {
    if (name == "paper_tables") return run_paper_tables(options, out);
    if (name == "invariants") return run_invariants(options, out);
    if (name == "rates") return run_rates(options, out);
    throw InvalidArgument("unknown suite '" + name + "'; valid: paper_tables, invariants, rates");
}

}  // namespace hjb
