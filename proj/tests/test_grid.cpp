#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>
#include <vector>

#include "hjb/errors.hpp"
#include "hjb/grid.hpp"

using namespace hjb;

namespace {

ValueField random_field(const RegularGrid& g, std::mt19937_64& rng, double lo = -1.0, double hi = 1.0) {
    std::uniform_real_distribution<double> u(lo, hi);
    ValueField f(g);
    for (std::size_t i = 0; i < f.size(); ++i) f[i] = u(rng);
    return f;
}

}  // namespace

TEST_CASE("grid construction and indexing") {
    const auto g = RegularGrid::uniform(2, -1.0, 1.0, 5);
    CHECK(g.dim() == 2);
    CHECK(g.node_count() == 25);
    CHECK(g.spacing(0) == doctest::Approx(0.5));
    CHECK(g.stride(0) == 5);
    CHECK(g.stride(1) == 1);
    for (std::size_t f = 0; f < g.node_count(); ++f) CHECK(g.flatten(g.unflatten(f)) == f);
    const auto x = g.node(7);  // (1, 2)
    CHECK(x[0] == -0.5);
    CHECK(x[1] == 0.0);
    CHECK(g.on_boundary(0));
    CHECK_FALSE(g.on_boundary(12));
    for (int k = 0; k < 5; ++k) CHECK(g.coordinate(1, k) == -1.0 + k * 0.5);
}

TEST_CASE("grid rejects bad shapes") {
    const double lo[] = {0.0}, hi[] = {1.0}, bad_hi[] = {0.0};
    const int one[] = {1}, two[] = {2};
    CHECK_THROWS_AS(RegularGrid(lo, hi, one), InvalidArgument);
    CHECK_THROWS_AS(RegularGrid(lo, bad_hi, two), InvalidArgument);
    CHECK_THROWS_AS(RegularGrid::uniform(5, 0.0, 1.0, 3), InvalidArgument);
    CHECK_THROWS_AS(RegularGrid::uniform(4, 0.0, 1.0, 101, 1'000'000), InvalidArgument);
}

TEST_CASE("locate_cell") {
    const auto g = RegularGrid::uniform(1, -1.0, 1.0, 3);
    SUBCASE("cell midpoint") {
        const double p[] = {0.5};
        const auto loc = locate_cell(g, p);
        REQUIRE(loc);
        CHECK(loc->base[0] == 1);
        CHECK(loc->local[0] == doctest::Approx(0.5));
    }
    SUBCASE("exactly at a node") {
        const double p[] = {0.0};
        const auto loc = locate_cell(g, p);
        REQUIRE(loc);
        CHECK(loc->base[0] == 1);
        CHECK(loc->local[0] == 0.0);
    }
    SUBCASE("upper face lands in the last cell") {
        const double p[] = {1.0};
        const auto loc = locate_cell(g, p);
        REQUIRE(loc);
        CHECK(loc->base[0] == 1);
        CHECK(loc->local[0] == 1.0);
    }
    SUBCASE("outside") {
        const double p[] = {1.5};
        CHECK_FALSE(locate_cell(g, p));
    }
    SUBCASE("dimension mismatch") {
        const double p[] = {0.0, 0.0};
        CHECK_THROWS_AS(locate_cell(g, p), InvalidArgument);
    }
}

TEST_CASE("locate_cell reconstructs the point") {
    std::mt19937_64 rng(1);
    const double lo[] = {-2.0, 0.0, 1.0}, hi[] = {2.0, 3.0, 1.5};
    const int n[] = {9, 4, 7};
    const RegularGrid g(lo, hi, n);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int t = 0; t < 1000; ++t) {
        double p[3];
        for (int i = 0; i < 3; ++i) p[i] = lo[i] + u(rng) * (hi[i] - lo[i]);
        const auto loc = locate_cell(g, p);
        REQUIRE(loc);
        for (int i = 0; i < 3; ++i) {
            CHECK(loc->base[i] + 1 < g.nodes(i));
            CHECK(loc->local[i] >= 0.0);
            CHECK(loc->local[i] <= 1.0);
            CHECK(g.coordinate(i, loc->base[i]) + loc->local[i] * g.spacing(i) == doctest::Approx(p[i]).epsilon(1e-12));
        }
    }
}

TEST_CASE("interpolate examples") {
    SUBCASE("1D midpoint") {
        const auto g = RegularGrid::uniform(1, 0.0, 1.0, 2);
        const ValueField f(g, std::vector<double>{1.0, 3.0});
        const double p[] = {0.5};
        CHECK(interpolate(f, p, 0.0) == 2.0);
    }
    SUBCASE("2D cell center") {
        const auto g = RegularGrid::uniform(2, 0.0, 1.0, 2);
        const ValueField f(g, std::vector<double>{0.0, 1.0, 1.0, 2.0});
        const double p[] = {0.5, 0.5};
        CHECK(interpolate(f, p, 0.0) == doctest::Approx(1.0).epsilon(1e-15));
    }
    SUBCASE("outside uses the exterior value") {
        const auto g = RegularGrid::uniform(2, -2.0, 2.0, 5);
        const ValueField f(g, 0.0);
        const double p[] = {2.5, 0.0};
        CHECK(interpolate(f, p, 3.5) == 3.5);
    }
    SUBCASE("exact at nodes") {
        std::mt19937_64 rng(2);
        const auto g = RegularGrid::uniform(2, -1.0, 1.0, 6);
        const auto f = random_field(g, rng);
        for (std::size_t i = 0; i < g.node_count(); ++i) {
            const auto x = g.node(i);
            CHECK(interpolate(f, std::span<const double>(x.data(), 2), 0.0) == doctest::Approx(f[i]).epsilon(1e-14));
        }
    }
    SUBCASE("non-finite entry") {
        const auto g = RegularGrid::uniform(1, 0.0, 1.0, 2);
        ValueField f(g, 0.0);
        f[1] = std::nan("");
        const double p[] = {0.5};
        CHECK_THROWS_AS(interpolate(f, p, 0.0), NumericError);
    }
}

TEST_CASE("interpolation reproduces affine functions") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int d = 1; d <= 4; ++d) {
        const auto g = RegularGrid::uniform(d, -1.0, 1.0, 5);
        double c[5];
        for (double& x : c) x = u(rng);
        ValueField f(g);
        for (std::size_t i = 0; i < g.node_count(); ++i) {
            const auto x = g.node(i);
            double v = c[4];
            for (int k = 0; k < d; ++k) v += c[k] * x[k];
            f[i] = v;
        }
        for (int t = 0; t < 200; ++t) {
            double p[4];
            double expect = c[4];
            for (int k = 0; k < d; ++k) {
                p[k] = u(rng);
                expect += c[k] * p[k];
            }
            CHECK(std::abs(interpolate(f, std::span<const double>(p, d), 0.0) - expect) <= 1e-12);
        }
    }
}

TEST_CASE("interpolation is monotone") {
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(-1.0, 1.0), pos(0.0, 1.0);
    const auto g = RegularGrid::uniform(3, -1.0, 1.0, 6);
    for (int t = 0; t < 20; ++t) {
        const auto a = random_field(g, rng);
        ValueField b = a;
        for (std::size_t i = 0; i < b.size(); ++i) b[i] += pos(rng);
        for (int s = 0; s < 50; ++s) {
            const double p[] = {u(rng), u(rng), u(rng)};
            CHECK(interpolate(a, p, 0.0) <= interpolate(b, p, 0.0));
        }
    }
}

TEST_CASE("interpolation weights agree with interpolate") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-1.2, 1.2);
    const auto g = RegularGrid::uniform(2, -1.0, 1.0, 7);
    const auto f = random_field(g, rng);
    for (int t = 0; t < 500; ++t) {
        const double p[] = {u(rng), u(rng)};
        const auto w = interpolation_weights(g, p);
        if (!g.contains(p)) {
            CHECK_FALSE(w);
            continue;
        }
        REQUIRE(w);
        double sum = 0.0, wsum = 0.0;
        for (int k = 0; k < w->count; ++k) {
            CHECK(w->weight[k] > 0.0);
            sum += w->weight[k] * f[w->index[k]];
            wsum += w->weight[k];
        }
        CHECK(wsum == doctest::Approx(1.0).epsilon(1e-14));
        CHECK(sum == doctest::Approx(interpolate(f, p, 0.0)).epsilon(1e-13));
    }
}

TEST_CASE("prolongate examples") {
    SUBCASE("1D midpoint") {
        const auto c = RegularGrid::uniform(1, -1.0, 1.0, 2);
        const auto p = prolongate(ValueField(c, std::vector<double>{0.0, 2.0}), c.refined());
        REQUIRE(p.size() == 3);
        CHECK(p[0] == 0.0);
        CHECK(p[1] == 1.0);
        CHECK(p[2] == 2.0);
    }
    SUBCASE("constants stay constant") {
        const auto c = RegularGrid::uniform(3, -1.0, 1.0, 4);
        const auto p = prolongate(ValueField(c, 0.7), c.refined());
        for (std::size_t i = 0; i < p.size(); ++i) CHECK(p[i] == 0.7);
    }
    SUBCASE("2D cell with one raised corner") {
        // Corners (0,0)=0, (0,1)=0, (1,0)=0, (1,1)=4 in row-major order.
        const auto c = RegularGrid::uniform(2, 0.0, 1.0, 2);
        const auto fine = c.refined();
        const auto p = prolongate(ValueField(c, std::vector<double>{0.0, 0.0, 0.0, 4.0}), fine);
        auto at = [&](int i, int j) { return p[fine.flatten({i, j, 0, 0})]; };
        CHECK(at(0, 1) == 0.0);
        CHECK(at(1, 2) == 2.0);
        CHECK(at(1, 0) == 0.0);
        CHECK(at(2, 1) == 2.0);
        CHECK(at(1, 1) == 1.0);
    }
    SUBCASE("non-nested grids") {
        const auto c = RegularGrid::uniform(2, 0.0, 1.0, 5);
        CHECK_THROWS_AS(prolongate(ValueField(c), RegularGrid::uniform(2, 0.0, 1.0, 10)), InvalidArgument);
        CHECK_THROWS_AS(prolongate(ValueField(c), RegularGrid::uniform(2, 0.0, 2.0, 9)), InvalidArgument);
    }
}

TEST_CASE("prolongate matches multilinear interpolation and keeps coarse nodes") {
    std::mt19937_64 rng(6);
    for (int d = 1; d <= 4; ++d) {
        const auto c = RegularGrid::uniform(d, -1.0, 1.0, 4);
        const auto fine = c.refined();
        const auto a = random_field(c, rng);
        const auto p = prolongate(a, fine);
        for (std::size_t f = 0; f < fine.node_count(); ++f) {
            auto k = fine.unflatten(f);
            bool even = true;
            for (int i = 0; i < d; ++i) even = even && k[i] % 2 == 0;
            if (even) {
                for (int i = 0; i < d; ++i) k[i] /= 2;
                CHECK(p[f] == a[c.flatten(k)]);
            } else {
                const auto x = fine.node(f);
                CHECK(std::abs(p[f] - interpolate(a, std::span<const double>(x.data(), d), 0.0)) <= 1e-12);
            }
        }
    }
}

TEST_CASE("prolongate does not enlarge sup differences") {
    std::mt19937_64 rng(7);
    const auto c = RegularGrid::uniform(2, -1.0, 1.0, 9);
    const auto fine = c.refined();
    for (int t = 0; t < 100; ++t) {
        const auto a = random_field(c, rng), b = random_field(c, rng);
        CHECK(sup_diff(prolongate(a, fine), prolongate(b, fine)) <= sup_diff(a, b));
    }
}

TEST_CASE("norms") {
    const auto g = RegularGrid::uniform(1, -1.0, 1.0, 3);
    const ValueField zero(g, 0.0);
    const ValueField d(g, std::vector<double>{0.0, 3.0, 0.0});
    CHECK(sup_diff(d, zero) == 3.0);
    CHECK(l1_diff(d, zero) == 3.0);
    CHECK(sup_diff(d, d) == 0.0);
    CHECK(l1_diff(d, d) == 0.0);

    std::mt19937_64 rng(8);
    const auto g2 = RegularGrid::uniform(2, 0.0, 2.0, 11);
    const auto a = random_field(g2, rng);
    ValueField a2 = a;
    for (std::size_t i = 0; i < a2.size(); ++i) a2[i] *= 2.0;
    const ValueField z2(g2, 0.0);
    CHECK(sup_diff(a2, z2) == doctest::Approx(2.0 * sup_diff(a, z2)));
    CHECK(l1_diff(a2, z2) == doctest::Approx(2.0 * l1_diff(a, z2)));
    CHECK_THROWS_AS(sup_diff(a, zero), InvalidArgument);
    CHECK_THROWS_AS(l1_diff(a, zero), InvalidArgument);
}

TEST_CASE("value fields reject non-finite data") {
    const auto g = RegularGrid::uniform(1, 0.0, 1.0, 3);
    CHECK_THROWS_AS(ValueField(g, std::vector<double>{0.0, INFINITY, 0.0}), NumericError);
    CHECK_THROWS_AS(ValueField(g, std::vector<double>{0.0, 0.0}), InvalidArgument);
}

TEST_CASE("field table round trip is bit exact") {
    std::mt19937_64 rng(9);
    const double lo[] = {-1.0, 0.25}, hi[] = {1.0, 3.0};
    const int n[] = {5, 4};
    const RegularGrid g(lo, hi, n);
    const auto a = random_field(g, rng, -1e3, 1e3);
    std::stringstream ss;
    write_field_table(ss, a);
    std::string header;
    std::getline(std::stringstream(ss.str()), header);
    CHECK(header == "x1 x2 value");
    const auto b = read_field_table(ss);
    CHECK(b.grid() == g);
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == b[i]);
}

TEST_CASE("1D export has two columns") {
    const auto g = RegularGrid::uniform(1, 0.0, 1.0, 3);
    std::stringstream ss;
    write_field_table(ss, ValueField(g, 1.5));
    std::string line;
    std::getline(ss, line);
    CHECK(line == "x1 value");
    std::getline(ss, line);
    CHECK(line == "0 1.5");
}

TEST_CASE("slices") {
    SUBCASE("4D field at x4 = 0") {
        const auto g = RegularGrid::uniform(4, -1.0, 1.0, 21);
        ValueField f(g);
        for (std::size_t i = 0; i < f.size(); ++i) f[i] = g.node(i)[3] + 10.0 * g.node(i)[0];
        const auto s = slice(f, 3, 0.0);
        CHECK(s.grid().dim() == 3);
        CHECK(s.size() == 21u * 21u * 21u);
        for (std::size_t i = 0; i < s.size(); ++i) CHECK(s[i] == doctest::Approx(10.0 * s.grid().node(i)[0]));
    }
    SUBCASE("constant field") {
        const auto g = RegularGrid::uniform(2, 0.0, 1.0, 6);
        const auto s = slice(ValueField(g, 2.0), 0, 0.33);
        for (std::size_t i = 0; i < s.size(); ++i) CHECK(s[i] == 2.0);
    }
    SUBCASE("errors") {
        const auto g2 = RegularGrid::uniform(2, 0.0, 1.0, 6);
        CHECK_THROWS_AS(slice(ValueField(g2), 0, 1.5), InvalidArgument);
        CHECK_THROWS_AS(slice(ValueField(g2), 2, 0.5), InvalidArgument);
        CHECK_THROWS_AS(slice(ValueField(RegularGrid::uniform(1, 0.0, 1.0, 3)), 0, 0.5), InvalidArgument);
    }
}
