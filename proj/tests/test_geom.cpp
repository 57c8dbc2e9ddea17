#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "whisker/geom.hpp"
#include "whisker/rng.hpp"

using namespace whisker;

TEST_CASE("world_to_body examples") {
    CHECK(world_to_body({1, 0}, {0, 0, 0}).x() == doctest::Approx(1.0));
    CHECK(world_to_body({1, 0}, {0, 0, 0}).y() == doctest::Approx(0.0));

    const Vec2 q = world_to_body({0, 1}, {0, 0, kPi / 2});
    CHECK(q.x() == doctest::Approx(1.0));
    CHECK(q.y() == doctest::Approx(0.0).epsilon(1e-12));

    // independent 2x2 matrix-vector evaluation
    const Pose2 pose{1, 1, kPi / 4};
    const Vec2 p{2, 3};
    const double c = std::cos(pose.yaw), s = std::sin(pose.yaw);
    const double ex = c * (p.x() - pose.x) + s * (p.y() - pose.y);
    const double ey = -s * (p.x() - pose.x) + c * (p.y() - pose.y);
    const Vec2 got = world_to_body(p, pose);
    CHECK(got.x() == doctest::Approx(ex).epsilon(1e-12));
    CHECK(got.y() == doctest::Approx(ey).epsilon(1e-12));
}

TEST_CASE("frame round trip on random poses") {
    const CounterRng rng{42, 0};
    for (uint64_t i = 0; i < 200; ++i) {
        const Pose2 pose{rng.uniform(i, 0) * 10 - 5, rng.uniform(i, 1) * 10 - 5,
                         normalize_angle(rng.uniform(i, 2) * 20 - 10)};
        const Vec2 p{rng.uniform(i, 3) * 10 - 5, rng.uniform(i, 4) * 10 - 5};
        const Vec2 back = body_to_world(world_to_body(p, pose), pose);
        CHECK(std::abs(back.x() - p.x()) < 1e-12);
        CHECK(std::abs(back.y() - p.y()) < 1e-12);
    }
}

TEST_CASE("yaw normalization periodicity") {
    const CounterRng rng{7, 0};
    for (uint64_t i = 0; i < 100; ++i) {
        const double yaw = rng.uniform(i) * 6.0 - 3.0;
        for (int k = -3; k <= 3; ++k) {
            CHECK(normalize_angle(yaw + 2 * kPi * k) ==
                  doctest::Approx(normalize_angle(yaw)).epsilon(1e-12));
        }
    }
    CHECK(normalize_angle(kPi) == doctest::Approx(kPi));
    CHECK(normalize_angle(-kPi) == doctest::Approx(kPi));
}

TEST_CASE("ray_cast axis aligned and misses") {
    const std::vector<Segment2> world{{{1, -5}, {1, 5}}};
    const auto hit = ray_cast({0, 0}, {1, 0}, world);
    REQUIRE(hit.has_value());
    CHECK(hit->distance == doctest::Approx(1.0));
    CHECK(hit->segment_index == 0);

    // parallel to the wall: no intersection
    CHECK_FALSE(ray_cast({0, 0}, {0, 1}, world).has_value());
    // pointing away
    CHECK_FALSE(ray_cast({0, 0}, {-1, 0}, world).has_value());
}

TEST_CASE("ray into a corner resolves to the lowest segment index") {
    // both segments meet at (1, 0); the ray hits the shared point
    const std::vector<Segment2> world{{{1, 0}, {1, 5}}, {{1, -5}, {1, 0}}};
    const auto hit = ray_cast({0, 0}, {1, 0}, world);
    REQUIRE(hit.has_value());
    CHECK(hit->distance == doctest::Approx(1.0));
    CHECK(hit->segment_index == 0);
}

namespace {
// brute-force per-segment intersection, independent formulation via the
// parametric line equations solved with Cramer's rule on [dir | a-b]
std::optional<double> brute_min_distance(const Vec2& o, const Vec2& d,
                                         const std::vector<Segment2>& world) {
    std::optional<double> best;
    for (const auto& seg : world) {
        const double a11 = d.x(), a12 = seg.a.x() - seg.b.x();
        const double a21 = d.y(), a22 = seg.a.y() - seg.b.y();
        const double det = a11 * a22 - a12 * a21;
        if (std::abs(det) < 1e-15) continue;
        const double bx = seg.a.x() - o.x();
        const double by = seg.a.y() - o.y();
        const double t = (bx * a22 - a12 * by) / det;
        const double u = (a11 * by - bx * a21) / det;
        if (t >= 0 && u >= 0 && u <= 1 && (!best || t < *best)) best = t;
    }
    return best;
}
} // namespace

TEST_CASE("ray_cast equals brute force on random scenes") {
    const CounterRng rng{99, 0};
    for (uint64_t s = 0; s < 50; ++s) {
        std::vector<Segment2> world;
        for (uint64_t k = 0; k < 8; ++k) {
            const uint64_t i = s * 8 + k;
            const Vec2 a{rng.uniform(i, 0) * 8 - 4, rng.uniform(i, 1) * 8 - 4};
            const Vec2 b{rng.uniform(i, 2) * 8 - 4, rng.uniform(i, 3) * 8 - 4};
            if ((a - b).norm() < 1e-3) continue;
            world.push_back({a, b});
        }
        const double ang = rng.uniform(s, 10) * 2 * kPi;
        const Vec2 o{rng.uniform(s, 11) * 2 - 1, rng.uniform(s, 12) * 2 - 1};
        const Vec2 d{std::cos(ang), std::sin(ang)};
        const auto got = ray_cast(o, d, world);
        const auto want = brute_min_distance(o, d, world);
        CHECK(got.has_value() == want.has_value());
        if (got && want) CHECK(got->distance == doctest::Approx(*want).epsilon(1e-9));
    }
}

TEST_CASE("segment helpers") {
    const Segment2 s{{0, 0}, {2, 0}};
    CHECK(point_segment_distance({1, 1}, s) == doctest::Approx(1.0));
    CHECK(point_segment_distance({-1, 0}, s) == doctest::Approx(1.0));
    CHECK(point_segment_distance({3, 4}, s) == doctest::Approx(std::sqrt(1 + 16.0)));

    // normal from below points up (+pi/2), from above points down
    CHECK(wall_normal_toward(s, {1, -1}) == doctest::Approx(kPi / 2));
    CHECK(wall_normal_toward(s, {1, 1}) == doctest::Approx(-kPi / 2));
}

TEST_CASE("grid invariants") {
    CHECK_THROWS_AS(Grid2({0, 0}, 0.1, 1, 5), Error);
    CHECK_THROWS_AS(Grid2({0, 0}, -0.1, 5, 5), Error);
    const Grid2 g({1, 2}, 0.5, 4, 3);
    CHECK(g.values.size() == 12);
    CHECK(g.corner(2, 1).x() == doctest::Approx(2.0));
    CHECK(g.corner(2, 1).y() == doctest::Approx(2.5));
}
