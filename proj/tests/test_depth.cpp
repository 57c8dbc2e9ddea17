#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "whisker/depth.hpp"
#include "whisker/rng.hpp"

using namespace whisker;

namespace {

// forward-projected depth to an infinite line, independent ray-line solve
double line_forward_depth(const Pose2& pose, const Vec2& q0, const Vec2& line_dir) {
    // pose.position + t * heading = q0 + s * line_dir
    const Vec2 h = pose.heading();
    const double det = h.x() * (-line_dir.x()) - (-line_dir.y()) * h.y();
    // solve with Cramer on [h | -line_dir] [t s]^T = q0 - p
    const double a11 = h.x(), a12 = -line_dir.x();
    const double a21 = h.y(), a22 = -line_dir.y();
    const double d = a11 * a22 - a12 * a21;
    (void)det;
    const Vec2 rhs = q0 - pose.position();
    return (rhs.x() * a22 - a12 * rhs.y()) / d;
}

// independent textbook scalar KF
struct OracleKf {
    double d, p, q, r;
    void step(double pred, double meas) {
        const double p_minus = p + q;
        const double k = p_minus / (p_minus + r);
        d = pred + k * (meas - pred);
        p = (1 - k) * p_minus;
    }
};

} // namespace

TEST_CASE("normalizer basics") {
    Normalizer n;
    n.mu = {10, 20, 30};
    n.sigma = {2, 4, 8};
    const auto z = n.normalize({10, 20, 30});
    CHECK(z[0] == doctest::Approx(0.0));
    CHECK(z[1] == doctest::Approx(0.0));
    const auto one = n.normalize({12, 24, 38});
    CHECK(one[0] == doctest::Approx(1.0));
    CHECK(one[1] == doctest::Approx(1.0));
    CHECK(one[2] == doctest::Approx(1.0));

    const CounterRng rng{1, 0};
    for (uint64_t i = 0; i < 50; ++i) {
        const std::array<double, 3> v{rng.gaussian(i, 0) * 5, rng.gaussian(i, 1) * 5,
                                      rng.gaussian(i, 2) * 5};
        const auto back = n.denormalize(n.normalize(v));
        for (int c = 0; c < 3; ++c) {
            CHECK(std::abs(back[static_cast<size_t>(c)] - v[static_cast<size_t>(c)]) < 1e-12);
        }
    }

    Normalizer bad;
    bad.sigma = {1, 0, 1};
    CHECK_THROWS_AS(bad.normalize({1, 2, 3}), Error);
}

TEST_CASE("normalization is idempotent on standardized data") {
    Normalizer id; // mu = 0, sigma = 1
    const std::array<double, 3> v{0.3, -1.2, 2.0};
    const auto w = id.normalize(v);
    CHECK(w == v);
}

TEST_CASE("wall angle from depth difference") {
    CHECK(wall_angle_from_depths(0.08, 0.08, 0.05) == doctest::Approx(0.0));
    CHECK(wall_angle_from_depths(0.10, 0.05, 0.05) == doctest::Approx(kPi / 4));
    CHECK(wall_angle_from_depths(0.10, 0.06, 0.05) ==
          doctest::Approx(std::atan(0.8)).epsilon(1e-12));
}

TEST_CASE("kalman step examples") {
    // P- == R gives K = 1/2 and the midpoint
    KfState s{0.0, 0.5, 0.5, 1.0};
    const KfState out = kf_step(s, 1.0, 3.0);
    CHECK(out.d == doctest::Approx(2.0));
    CHECK(out.P == doctest::Approx(0.5));

    // huge R: pure process
    KfState s2{0.0, 1e-4, 1e-6, 1e12};
    const KfState out2 = kf_step(s2, 0.08, 5.0);
    CHECK(out2.d == doctest::Approx(0.08).epsilon(1e-9));
}

TEST_CASE("kalman trace matches the textbook oracle to 1e-12") {
    KfState s{0.1, 0.01, 1e-6, 2.5e-5};
    OracleKf o{0.1, 0.01, 1e-6, 2.5e-5};
    const CounterRng rng{8, 0};
    for (uint64_t i = 0; i < 100; ++i) {
        const double pred = s.d + 0.001 * rng.gaussian(i, 0);
        const double meas = 0.08 + 0.005 * rng.gaussian(i, 1);
        const double p_prev = s.P;
        s = kf_step(s, pred, meas);
        o.step(pred, meas);
        CHECK(std::abs(s.d - o.d) < 1e-12);
        CHECK(std::abs(s.P - o.p) < 1e-12);
        // variance contracts within the update, gain in (0,1)
        CHECK(s.P > 0.0);
        CHECK(s.P <= p_prev + 1e-6);
        const double k = (p_prev + 1e-6) / (p_prev + 1e-6 + 2.5e-5);
        CHECK(k > 0.0);
        CHECK(k < 1.0);
    }
}

TEST_CASE("process predict holds depth for a stationary drone") {
    WallState wall;
    wall.theta_wall_W = 0.0;
    const Pose2 p{0, 0, 0};
    CHECK(process_predict(0.08, wall, p, p) == doctest::Approx(0.08));
}

TEST_CASE("process predict is invariant to wall-parallel translation") {
    WallState wall;
    wall.theta_wall_W = 0.0; // wall normal along +x; wall is vertical
    const Pose2 a{0, 0, 0.2};
    const Pose2 b{0, 0.5, 0.2}; // pure +y motion, parallel to the wall
    CHECK(process_predict(0.09, wall, a, b) == doctest::Approx(0.09).epsilon(1e-12));
}

TEST_CASE("process predict matches the line-geometry oracle") {
    const CounterRng rng{4321, 0};
    int tested = 0;
    for (uint64_t i = 0; i < 20000 && tested < 10000; ++i) {
        const double wall_dir = rng.uniform(i, 0) * 2 * kPi;
        const Vec2 q0{rng.uniform(i, 1) * 4 - 2, rng.uniform(i, 2) * 4 - 2};
        const Vec2 dir{std::cos(wall_dir), std::sin(wall_dir)};
        const Segment2 seg{q0 - 10 * dir, q0 + 10 * dir};

        Pose2 pa{rng.uniform(i, 3) * 4 - 2, rng.uniform(i, 4) * 4 - 2, 0};
        Pose2 pb{pa.x + rng.uniform(i, 5) * 0.2 - 0.1,
                 pa.y + rng.uniform(i, 6) * 0.2 - 0.1, 0};
        const double theta_w = wall_normal_toward(seg, pa.position());
        pa.yaw = normalize_angle(theta_w + rng.uniform(i, 7) * 2.0 - 1.0);
        pb.yaw = normalize_angle(theta_w + rng.uniform(i, 8) * 2.0 - 1.0);

        const double da = line_forward_depth(pa, q0, dir);
        const double db = line_forward_depth(pb, q0, dir);
        if (!(da > 0.01 && da < 5.0 && db > 0.01 && db < 5.0)) continue;
        if (std::abs(std::cos(normalize_angle(pb.yaw - theta_w))) < 0.1) continue;

        WallState wall;
        wall.theta_wall_W = theta_w;
        const double got = process_predict(da, wall, pa, pb);
        CHECK(std::abs(got - db) < 1e-9);
        ++tested;
    }
    CHECK(tested >= 5000);
}

TEST_CASE("process predict rejects grazing headings") {
    WallState wall;
    wall.theta_wall_W = 0.0;
    const Pose2 a{0, 0, 0};
    const Pose2 b{0, 0, kPi / 2}; // turned parallel to the wall
    CHECK_THROWS_AS(process_predict(0.08, wall, a, b), Error);
}

TEST_CASE("estimator coasts on lost contact with growing variance") {
    EstimatorConfig cfg;
    cfg.variant = EstimatorVariant::KfFull;
    cfg.reset_after_lost = 0;
    DepthEstimator est(cfg);

    Pose2 pose{0, 0, 0};
    est.step(pose, 0.08, 0.08);
    auto tick = est.step(pose, 0.081, 0.079);
    REQUIRE(tick.left.valid);
    double p_prev = tick.left.P;

    for (int i = 0; i < 10; ++i) {
        tick = est.step(pose, std::nullopt, 0.08); // left whisker lost
        CHECK(tick.left.valid);
        CHECK(tick.left.P > p_prev);
        p_prev = tick.left.P;
    }
}

TEST_CASE("full and simplified variants agree head-on") {
    for (const auto variant :
         {EstimatorVariant::KfSimplified, EstimatorVariant::KfFull}) {
        EstimatorConfig cfg;
        cfg.variant = variant;
        DepthEstimator est(cfg);
        Pose2 pose{0, 0, 0};
        DepthEstimator::Tick tick;
        double depth = 0.12;
        for (int i = 0; i < 50; ++i) {
            tick = est.step(pose, depth, depth);
            pose.x += 0.002; // straight toward a perpendicular wall
            depth -= 0.002;
        }
        CHECK(tick.left.d == doctest::Approx(tick.right.d).epsilon(1e-9));
        CHECK(tick.wall.theta_wall_D == doctest::Approx(0.0).epsilon(1e-9));
    }
}

TEST_CASE("model json round trip preserves predictions") {
    DepthModel model;
    model.normalizer.mu = {1, 2, 3};
    model.normalizer.sigma = {4, 5, 6};
    model.mlp = mlp_init(std::vector<int>{3, 8, 1}, 77);

    const DepthModel back = DepthModel::from_json(model.to_json());
    const std::array<double, 3> x{10.0, -3.0, 0.5};
    CHECK(back.predict(x) == doctest::Approx(model.predict(x)).epsilon(1e-15));
}
