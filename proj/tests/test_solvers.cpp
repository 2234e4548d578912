#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "hjb/analysis.hpp"
#include "hjb/catalog.hpp"
#include "hjb/errors.hpp"
#include "hjb/experiment.hpp"
#include "hjb/solvers.hpp"

using namespace hjb;

namespace {

// f = 0, g = cost(a), lambda = 1 on [0, 1].
ProblemSpec still_problem(std::function<double(double)> cost) {
    ProblemSpec s;
    s.name = "still";
    s.state_dim = 1;
    s.dynamics = [](auto, auto, auto v) { v[0] = 0.0; };
    s.running_cost = [cost](auto, auto a) { return cost(a[0]); };
    s.kind = InfiniteHorizon{1.0};
    s.lower = {0.0};
    s.upper = {1.0};
    return s;
}

SolverConfig config_for(const CatalogEntry& e, const RegularGrid& g) {
    SolverConfig c;
    c.dt = e.dt_ratio * g.min_spacing();
    return c;
}

bool within(double value, double target, double rel) { return std::abs(value - target) <= rel * target; }

}  // namespace

TEST_CASE("bellman_update examples") {
    SUBCASE("stage cost only") {
        const auto s = still_problem([](double) { return 1.0; });
        const auto g = RegularGrid::uniform(1, 0.0, 1.0, 5);
        const ControlSet c(std::vector<std::vector<double>>{{0.0}});
        SolverConfig cfg;
        cfg.dt = 0.1;
        const auto r = bellman_update(s, g, ValueField(g, 0.0), c, cfg);
        for (std::size_t i = 0; i < g.node_count(); ++i) CHECK(r.values[i] == doctest::Approx(0.1).epsilon(1e-15));
    }
    SUBCASE("minimum time from the zero field") {
        const auto e = catalog("test4_eik2d");
        const auto g = make_grid(e.spec, 11);
        const auto cfg = config_for(e, g);
        const auto r = bellman_update(e.spec, g, ValueField(g, 0.0), e.controls, cfg);
        const auto mask = target_mask(e.spec, g);
        for (std::size_t i = 0; i < g.node_count(); ++i) {
            if (mask.inside[i]) {
                CHECK(r.values[i] == 0.0);
                CHECK(r.policy.index[i] == PolicyField::kUndefined);
            } else {
                CHECK(r.values[i] == doctest::Approx(1.0 - std::exp(-cfg.dt)).epsilon(1e-14));
            }
        }
    }
    SUBCASE("zero cost keeps the zero field") {
        const auto s = still_problem([](double) { return 0.0; });
        const auto g = RegularGrid::uniform(1, 0.0, 1.0, 5);
        SolverConfig cfg;
        cfg.dt = 0.3;
        const auto r = bellman_update(s, g, ValueField(g, 0.0), ControlSet({{0.0}, {1.0}}), cfg);
        for (std::size_t i = 0; i < g.node_count(); ++i) CHECK(r.values[i] == 0.0);
    }
    SUBCASE("boundary values are pinned") {
        const auto e = catalog("test2_vdp");
        const auto g = make_grid(e.spec, 11);
        const auto r = bellman_update(e.spec, g, ValueField(g, 0.0), e.controls, config_for(e, g));
        for (std::size_t i = 0; i < g.node_count(); ++i)
            if (g.on_boundary(i)) CHECK(r.values[i] == 3.5);
    }
    SUBCASE("non-finite terms name the node and control") {
        auto s = still_problem([](double a) { return a > 0.5 ? std::nan("") : 0.0; });
        const auto g = RegularGrid::uniform(1, 0.0, 1.0, 3);
        SolverConfig cfg;
        cfg.dt = 0.1;
        try {
            bellman_update(s, g, ValueField(g, 0.0), ControlSet({{0.0}, {1.0}}), cfg);
            FAIL("expected NumericError");
        } catch (const NumericError& e) {
            const std::string msg = e.what();
            CHECK(msg.find("node") != std::string::npos);
            CHECK(msg.find("control 1") != std::string::npos);
        }
    }
}

TEST_CASE("Bellman operator contracts sup differences") {
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> u(0.0, 2.0);
    for (const char* name : {"test1_1d", "test2_vdp", "test4_eik2d"}) {
        const auto e = catalog(name);
        const auto g = make_grid(e.spec, e.spec.state_dim == 1 ? 41 : 15);
        const auto cfg = config_for(e, g);
        const double factor = e.spec.is_minimum_time() ? std::exp(-cfg.dt) : std::exp(-cfg.dt);
        const auto base = initial_guess(e.spec, g);
        const auto mask = target_mask(e.spec, g);
        for (int t = 0; t < 10; ++t) {
            ValueField a = base, b = base;
            for (std::size_t i = 0; i < g.node_count(); ++i) {
                if (mask.inside[i] || (e.spec.boundary_value && g.on_boundary(i))) continue;
                a[i] = u(rng);
                b[i] = u(rng);
            }
            const double before = sup_diff(a, b);
            const double after = sup_diff(bellman_update(e.spec, g, a, e.controls, cfg).values,
                                          bellman_update(e.spec, g, b, e.controls, cfg).values);
            CHECK(after <= factor * before + 1e-10);
        }
    }
}

TEST_CASE("value_iteration") {
    SUBCASE("test1 at 161 nodes") {
        const auto e = catalog("test1_1d");
        const auto g = make_grid(e.spec, 161);
        const auto sol = value_iteration(e.spec, g, e.controls, config_for(e, g));
        CHECK(sol.report.converged);
        CHECK(std::abs(sol.values[80] - 1.5) <= 5e-2);
        CHECK(sol.report.residual_history.back() <= sol.report.tolerance);
        CHECK(sol.report.residual_history.size() == static_cast<std::size_t>(sol.report.outer_iterations));
        CHECK(sol.report.tolerance == doctest::Approx(0.2 * g.min_spacing() * g.min_spacing()));
    }
    SUBCASE("stationary closed form") {
        const auto s = still_problem([](double) { return 1.0; });
        const auto g = RegularGrid::uniform(1, 0.0, 1.0, 3);
        SolverConfig cfg;
        cfg.dt = 0.1;
        cfg.stop_constant = 1e-8;
        const auto sol = value_iteration(s, g, ControlSet(std::vector<std::vector<double>>{{0.0}}), cfg);
        const double exact = 0.1 / (1.0 - std::exp(-0.1));
        CHECK(exact == doctest::Approx(1.0508).epsilon(1e-4));
        // Stopped at residual eps, the iterate is within eps / (1 - discount) of the fixed point.
        const double eps = cfg.tolerance(g);
        for (std::size_t i = 0; i < 3; ++i) CHECK(std::abs(sol.values[i] - exact) <= eps / (1.0 - std::exp(-0.1)));
    }
    SUBCASE("non-convergence is reported, not thrown") {
        const auto e = catalog("test1_1d");
        const auto g = make_grid(e.spec, 81);
        auto cfg = config_for(e, g);
        cfg.max_iterations = 3;
        const auto sol = value_iteration(e.spec, g, e.controls, cfg);
        CHECK_FALSE(sol.report.converged);
        CHECK(sol.report.outer_iterations == 3);
        CHECK(sol.report.residual_history.back() > sol.report.tolerance);
    }
    SUBCASE("node update accounting") {
        const auto e = catalog("test4_eik2d");
        const auto g = make_grid(e.spec, 21);
        const auto sol = value_iteration(e.spec, g, e.controls, config_for(e, g));
        const std::uint64_t free = g.node_count() - 1;
        CHECK(sol.report.node_updates == free * sol.report.outer_iterations);
        CHECK(sol.report.interpolations == free * 64 * sol.report.outer_iterations);
    }
}

TEST_CASE("test4 VI iteration count near 37 at 41x41") {
    const auto e = catalog("test4_eik2d");
    const auto g = make_grid(e.spec, 41);
    const auto sol = value_iteration(e.spec, g, e.controls, config_for(e, g));
    CHECK(within(sol.report.outer_iterations, 37, 0.3));
}

TEST_CASE("minimum-time values are in range and monotone in the target") {
    const auto small = catalog("test5_eik2d_disk");
    ProblemOverrides o;
    auto big = catalog("test5_eik2d_disk", o);
    std::get<MinimumTime>(big.spec.kind).target = [](std::span<const double> x) {
        return std::hypot(x[0], x[1]) <= 1.3;
    };
    const auto g = make_grid(small.spec, 41);
    const auto cfg = config_for(small, g);
    const auto a = value_iteration(small.spec, g, small.controls, cfg);
    const auto b = value_iteration(big.spec, g, big.controls, cfg);
    const auto mask = target_mask(small.spec, g);
    for (std::size_t i = 0; i < g.node_count(); ++i) {
        CHECK(a.values[i] >= 0.0);
        CHECK(a.values[i] <= 1.0);
        if (mask.inside[i]) CHECK(a.values[i] == 0.0);
        CHECK(b.values[i] <= a.values[i] + 1e-12);
    }
}

TEST_CASE("fixed-point policy evaluation") {
    SUBCASE("constant cost closed form") {
        const double c = 2.5;
        const auto s = still_problem([c](double) { return c; });
        const auto g = RegularGrid::uniform(1, 0.0, 1.0, 5);
        SolverConfig cfg;
        cfg.dt = 0.05;
        cfg.stop_constant = 1e-9;
        const auto r = policy_evaluation_fixed_point(s, g, PolicyField(g, 0), ControlSet(std::vector<std::vector<double>>{{0.0}}), ValueField(g, 0.0), cfg);
        CHECK(r.converged);
        const double exact = c * 0.05 / (1.0 - std::exp(-0.05));
        for (std::size_t i = 0; i < 5; ++i) CHECK(r.values[i] == doctest::Approx(exact).epsilon(1e-6));
    }
    SUBCASE("re-entry at a converged VI pair") {
        const auto e = catalog("test1_1d");
        const auto g = make_grid(e.spec, 81);
        const auto cfg = config_for(e, g);
        const auto vi = value_iteration(e.spec, g, e.controls, cfg);
        const auto r = policy_evaluation_fixed_point(e.spec, g, vi.policy, e.controls, vi.values, cfg);
        CHECK(r.iterations <= 1);
    }
    SUBCASE("straight-line policy on the eikonal problem") {
        const auto e = catalog("test4_eik2d");
        const auto g = make_grid(e.spec, 41);
        auto cfg = config_for(e, g);
        // Control pointing at the origin along the positive x axis: angle pi, index 32.
        REQUIRE(e.controls[32][0] == doctest::Approx(0.0));
        PolicyField p(g, 0);
        for (std::size_t i = 0; i < g.node_count(); ++i) {
            const auto x = g.node(i);
            const double angle = std::atan2(-x[1], -x[0]);
            int best = 0;
            double gap = 1e9;
            for (std::size_t c = 0; c < e.controls.size(); ++c) {
                const double d = std::abs(std::remainder(e.controls[c][0] - angle, 2 * std::numbers::pi));
                if (d < gap) {
                    gap = d;
                    best = static_cast<int>(c);
                }
            }
            p.index[i] = best;
        }
        p.index[g.node_count() / 2] = PolicyField::kUndefined;
        const auto r = policy_evaluation_fixed_point(e.spec, g, p, e.controls, initial_guess(e.spec, g), cfg);
        CHECK(r.converged);
        for (int k = 21; k < 41; ++k) {
            const std::size_t i = g.flatten({k, 20, 0, 0});
            const double dist = g.coordinate(0, k);
            CHECK(std::abs(r.values[i] - (1.0 - std::exp(-dist))) <= 2.0 * g.spacing(0));
        }
    }
    SUBCASE("undefined policy at a free node") {
        const auto e = catalog("test1_1d");
        const auto g = make_grid(e.spec, 11);
        CHECK_THROWS_AS(policy_evaluation_fixed_point(e.spec, g, PolicyField(g, PolicyField::kUndefined), e.controls,
                                                      ValueField(g, 0.0), config_for(e, g)),
                        InvalidArgument);
    }
}

TEST_CASE("direct policy evaluation") {
    SUBCASE("constant cost closed form") {
        const auto s = still_problem([](double) { return 1.0; });
        const auto g = RegularGrid::uniform(1, 0.0, 1.0, 5);
        SolverConfig cfg;
        cfg.dt = 0.1;
        const auto r = policy_evaluation_direct(s, g, PolicyField(g, 0), ControlSet(std::vector<std::vector<double>>{{0.0}}), cfg);
        const double exact = 0.1 / (1.0 - std::exp(-0.1));
        for (std::size_t i = 0; i < 5; ++i) CHECK(std::abs(r.values[i] - exact) <= cfg.tolerance(g));
    }
    SUBCASE("rows are diagonally dominant") {
        const auto e = catalog("test4_eik2d");
        const auto g = make_grid(e.spec, 21);
        const auto cfg = config_for(e, g);
        const double discount = std::exp(-cfg.dt);
        for (std::size_t i = 0; i < g.node_count(); ++i) {
            const auto x = g.node(i);
            for (std::size_t c = 0; c < e.controls.size(); c += 7) {
                const auto y = euler_arrival(e.spec, std::span<const double>(x.data(), 2), e.controls[c], cfg.dt);
                const auto w = interpolation_weights(g, y);
                double mass = 0.0;
                if (w)
                    for (int k = 0; k < w->count; ++k) {
                        CHECK(w->weight[k] >= 0.0);
                        mass += w->weight[k];
                    }
                CHECK(mass <= 1.0 + 1e-14);
                CHECK(discount * mass < 1.0);
            }
        }
    }
    SUBCASE("agrees with the fixed-point backend on test1") {
        const auto e = catalog("test1_1d");
        const auto g = make_grid(e.spec, 81);
        auto cfg = config_for(e, g);
        const double eps = cfg.tolerance(g);
        const PolicyField p0(g, 0);
        const auto fixed = policy_iteration(e.spec, g, e.controls, cfg, p0, initial_guess(e.spec, g));
        cfg.eval_backend = EvalBackend::DirectLinear;
        const auto direct = policy_iteration(e.spec, g, e.controls, cfg, p0, initial_guess(e.spec, g));
        CHECK(sup_diff(fixed.values, direct.values) <= 2.0 * eps);
    }
}

TEST_CASE("policy_improvement") {
    SUBCASE("stage cost decides when V is zero") {
        const auto s = still_problem([](double a) { return a * a; });
        const auto g = RegularGrid::uniform(1, 0.0, 1.0, 4);
        SolverConfig cfg;
        cfg.dt = 0.1;
        const auto p = policy_improvement(s, g, ValueField(g, 0.0), ControlSet({{-1.0}, {0.5}, {0.0}, {1.0}}), cfg);
        for (int k : p.index) CHECK(k == 2);
    }
    SUBCASE("minimum-time ties resolve to index 0") {
        const auto e = catalog("test4_eik2d");
        const auto g = make_grid(e.spec, 11);
        const auto p = policy_improvement(e.spec, g, ValueField(g, 0.0), e.controls, config_for(e, g));
        // Boundary nodes avoid controls whose arrival leaves the box.
        for (std::size_t i = 0; i < g.node_count(); ++i)
            if (!g.on_boundary(i)) CHECK(p.index[i] == (i == g.node_count() / 2 ? PolicyField::kUndefined : 0));
    }
    SUBCASE("greedy extraction reproduces the VI policy") {
        const auto e = catalog("test2_vdp");
        const auto g = make_grid(e.spec, 21);
        const auto cfg = config_for(e, g);
        const auto vi = value_iteration(e.spec, g, e.controls, cfg);
        const auto p = policy_improvement(e.spec, g, vi.values, e.controls, cfg);
        CHECK(p.index == vi.policy.index);
    }
}

TEST_CASE("policy_iteration") {
    const auto e = catalog("test1_1d");
    SUBCASE("reaches the discrete fixed point from the naive policy") {
        const auto g = make_grid(e.spec, 161);
        auto cfg = config_for(e, g);
        const double eps = cfg.tolerance(g);
        const auto pi = policy_iteration(e.spec, g, e.controls, cfg, PolicyField(g, 0), initial_guess(e.spec, g));
        CHECK(pi.report.converged);
        auto tight = cfg;
        tight.stop_constant = 1e-7;
        const auto vi = value_iteration(e.spec, g, e.controls, tight);
        CHECK(sup_diff(pi.values, vi.values) <= 2.0 * eps);
        CHECK(pi.report.sub_iteration_history.size() == static_cast<std::size_t>(pi.report.outer_iterations));
    }
    SUBCASE("values decrease monotonically") {
        const auto g = make_grid(e.spec, 81);
        const auto cfg = config_for(e, g);
        std::optional<ValueField> prev;
        int calls = 0;
        policy_iteration(e.spec, g, e.controls, cfg, PolicyField(g, 0), initial_guess(e.spec, g),
                         [&](int k, const ValueField& v) {
                             CHECK(k == ++calls);
                             if (prev)
                                 for (std::size_t i = 0; i < v.size(); ++i)
                                     CHECK(v[i] <= (*prev)[i] + 10.0 * cfg.tolerance(g));
                             prev = v;
                         });
        CHECK(calls > 1);
    }
    SUBCASE("outer count near 65 at 321 nodes") {
        const auto g = make_grid(e.spec, 321);
        const auto pi = policy_iteration(e.spec, g, e.controls, config_for(e, g), PolicyField(g, 0),
                                         initial_guess(e.spec, g));
        CHECK(within(pi.report.outer_iterations, 65, 0.3));
    }
    SUBCASE("starting from the exact greedy policy") {
        const auto g = make_grid(e.spec, 161);
        const auto cfg = config_for(e, g);
        ValueField exact(g);
        for (std::size_t i = 0; i < g.node_count(); ++i) {
            const auto x = g.node(i);
            exact[i] = e.reference(std::span<const double>(x.data(), 1));
        }
        const auto p0 = policy_improvement(e.spec, g, exact, e.controls, cfg);
        const auto pi = policy_iteration(e.spec, g, e.controls, cfg, p0, initial_guess(e.spec, g));
        CHECK(pi.report.outer_iterations <= 3);
    }
    SUBCASE("policy on the wrong grid") {
        const auto g = make_grid(e.spec, 21);
        const auto h = make_grid(e.spec, 11);
        CHECK_THROWS_AS(policy_iteration(e.spec, g, e.controls, config_for(e, g), PolicyField(h, 0),
                                         initial_guess(e.spec, g)),
                        InvalidArgument);
    }
}

TEST_CASE("api_solve") {
    SUBCASE("matches VI on test1 within the summed tolerances") {
        const auto e = catalog("test1_1d");
        const auto fine = make_grid(e.spec, 161);
        const auto coarse = make_grid(e.spec, 81);
        auto fcfg = config_for(e, fine);
        auto ccfg = config_for(e, coarse);
        ccfg.stop_constant = 5.0;
        const auto api = api_solve(e.spec, coarse, fine, e.controls, ccfg, fcfg);
        const auto vi = value_iteration(e.spec, fine, e.controls, fcfg);
        CHECK(api.report.converged);
        CHECK(sup_diff(api.values, vi.values) <= 2.0 * (ccfg.tolerance(coarse) + fcfg.tolerance(fine)));
        REQUIRE(api.report.phases.size() == 2);
        CHECK(api.report.outer_iterations ==
              api.report.phases[0].outer_iterations + api.report.phases[1].outer_iterations);
        CHECK(api.report.node_updates == api.report.phases[0].node_updates + api.report.phases[1].node_updates);
    }
    SUBCASE("test4 at 161x161: about 3 fine iterations") {
        const auto e = catalog("test4_eik2d");
        RunSettings s;
        s.fine_nodes = 161;
        const auto api = solve(e, s);
        CHECK(within(api.report.phases[1].outer_iterations, 3, 0.3));
    }
    SUBCASE("loose coarse tolerance degenerates to PI from the prolongated start") {
        const auto e = catalog("test1_1d");
        const auto fine = make_grid(e.spec, 81);
        const auto coarse = make_grid(e.spec, 41);
        auto fcfg = config_for(e, fine);
        auto ccfg = config_for(e, coarse);
        ccfg.stop_constant = 1e9;
        const auto api = api_solve(e.spec, coarse, fine, e.controls, ccfg, fcfg);
        CHECK(api.report.phases[0].outer_iterations == 1);
        const auto vc = value_iteration(e.spec, coarse, e.controls, ccfg);
        const auto start = prolongate(vc.values, fine);
        const auto p0 = policy_improvement(e.spec, fine, start, e.controls, fcfg);
        const auto pi = policy_iteration(e.spec, fine, e.controls, fcfg, p0, start);
        CHECK(sup_diff(pi.values, api.values) == 0.0);
        CHECK(pi.report.outer_iterations == api.report.phases[1].outer_iterations);
    }
    SUBCASE("grids must nest") {
        const auto e = catalog("test1_1d");
        CHECK_THROWS_AS(api_solve(e.spec, make_grid(e.spec, 40), make_grid(e.spec, 81), e.controls,
                                  config_for(e, make_grid(e.spec, 40)), config_for(e, make_grid(e.spec, 81))),
                        InvalidArgument);
    }
    SUBCASE("unresolvable coarse target") {
        ProblemOverrides o;
        o.target_radius = 0.06;
        const auto e = catalog("heat3_rom", o);
        const auto coarse = make_grid(e.spec, 10);
        const auto fine = make_grid(e.spec, 19);
        CHECK_THROWS_AS(api_solve(e.spec, coarse, fine, e.controls, config_for(e, coarse), config_for(e, fine)),
                        InvalidArgument);
    }
}

TEST_CASE("test4 API at 161x161: total iterations near 34" * doctest::may_fail()) {
    const auto e = catalog("test4_eik2d");
    RunSettings s;
    s.fine_nodes = 161;
    CHECK(within(solve(e, s).report.outer_iterations, 34, 0.3));
}

TEST_CASE("greedy_control") {
    SUBCASE("test1 exact value drives toward the boundary") {
        const auto e = catalog("test1_1d");
        const auto g = make_grid(e.spec, 161);
        ValueField v(g);
        for (std::size_t i = 0; i < g.node_count(); ++i) {
            const auto x = g.node(i);
            v[i] = e.reference(std::span<const double>(x.data(), 1));
        }
        const double x[] = {0.5};
        const auto c = greedy_control(e.spec, v, e.controls, x, 0.5 * g.min_spacing());
        CHECK(e.controls[c][0] == 1.0);
    }
    SUBCASE("eikonal distance field points at the origin") {
        const auto e = catalog("test4_eik2d");
        const auto g = make_grid(e.spec, 41);
        ValueField v(g);
        for (std::size_t i = 0; i < g.node_count(); ++i) {
            const auto x = g.node(i);
            v[i] = e.reference(std::span<const double>(x.data(), 2));
        }
        const double x[] = {1.0, 0.0};
        const auto c = greedy_control(e.spec, v, e.controls, x, 0.8 * g.min_spacing());
        CHECK(std::abs(std::remainder(e.controls[c][0] - std::numbers::pi, 2 * std::numbers::pi)) <=
              std::numbers::pi / 64 + 1e-12);
    }
    SUBCASE("constant field ties to index 0") {
        const auto e = catalog("test4_eik2d");
        const auto g = make_grid(e.spec, 11);
        const double x[] = {0.3, -0.2};
        CHECK(greedy_control(e.spec, ValueField(g, 0.5), e.controls, x, 0.1) == 0);
    }
    SUBCASE("outside the domain") {
        const auto e = catalog("test4_eik2d");
        const auto g = make_grid(e.spec, 11);
        const double x[] = {1.3, 0.0};
        CHECK_THROWS_AS(greedy_control(e.spec, ValueField(g, 0.5), e.controls, x, 0.1), InvalidArgument);
    }
}

TEST_CASE("results do not depend on the worker count") {
    const auto e = catalog("test2_vdp");
    RunSettings s;
    s.fine_nodes = 41;
    const int before = worker_count();
    set_worker_count(1);
    const auto a = solve(e, s);
    set_worker_count(3);
    const auto b = solve(e, s);
    set_worker_count(before);
    CHECK(a.report.outer_iterations == b.report.outer_iterations);
    CHECK(a.report.node_updates == b.report.node_updates);
    CHECK(a.report.residual_history == b.report.residual_history);
    for (std::size_t i = 0; i < a.values.size(); ++i) CHECK(a.values[i] == b.values[i]);
    CHECK(a.policy.index == b.policy.index);
}
