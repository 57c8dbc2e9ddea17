#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "whisker/mechanics.hpp"

using namespace whisker;

namespace {
// independent transcription of the PRBM chain, plain scalars
double oracle_normal_force(double d, double alpha, double l_o, double ei) {
    const double theta = std::atan(d * std::sin(alpha) / (l_o - d * std::cos(alpha)));
    const double beta = 1.5 * theta;
    const double n = std::tan(beta);
    const double gamma = 0.841655 - 0.0067807 * n + 0.000438 * n * n;
    const double px = l_o - d * std::cos(alpha);
    const double py = d * std::sin(alpha);
    const double lr = std::sqrt(px * px + py * py) / gamma;
    const double poly = 2.654855 - 0.0509896 * n + 0.0126749 * n * n -
                        0.00142039 * n * n * n + 0.0000584525 * n * n * n * n;
    const double k = gamma * ei * poly / lr;
    const double f = k * theta / (gamma * lr * (std::cos(theta) + n * std::sin(theta)));
    return f / std::sin(beta + alpha);
}
} // namespace

TEST_CASE("prbm_theta geometry") {
    CHECK(prbm_theta(0.0, deg2rad(45), 0.2) == doctest::Approx(0.0));
    CHECK(prbm_theta(0.2, deg2rad(90), 0.2) == doctest::Approx(deg2rad(45)));

    const double expect = std::atan(0.03 * std::sin(deg2rad(45)) /
                                    (0.2 - 0.03 * std::cos(deg2rad(45))));
    CHECK(prbm_theta(0.03, deg2rad(45), 0.2) == doctest::Approx(expect).epsilon(1e-12));

    CHECK_THROWS_AS(prbm_theta(-0.01, deg2rad(45), 0.2), Error);
    // denominator <= 0: d >= l_o / cos(alpha)
    CHECK_THROWS_AS(prbm_theta(0.5, deg2rad(10), 0.2), Error);
}

TEST_CASE("prbm_gamma values and validity window") {
    CHECK(prbm_gamma(0.0, false) == doctest::Approx(0.841655));
    CHECK(prbm_gamma(1.0) ==
          doctest::Approx(0.841655 - 0.0067807 + 0.000438).epsilon(1e-12));
    CHECK_THROWS_AS(prbm_gamma(0.3), Error);
    CHECK_THROWS_AS(prbm_gamma(12.0), Error);
}

TEST_CASE("spring constant scales linearly with EI") {
    const double k1 = prbm_spring(1.0, prbm_gamma(1.0), 1.0, 0.25);
    const double k3 = prbm_spring(1.0, prbm_gamma(1.0), 3.0, 0.25);
    CHECK(k3 == doctest::Approx(3.0 * k1).epsilon(1e-12));
}

TEST_CASE("full chain matches the independent oracle") {
    const WhiskerSpec spec = WhiskerSpec::make_default();
    for (const double d : {0.02, 0.03, 0.05, 0.08}) {
        for (const double a_deg : {25.0, 35.0, 45.0, 60.0}) {
            const double alpha = deg2rad(a_deg);
            const auto r = prbm_evaluate(d, alpha, spec, false);
            const double want =
                oracle_normal_force(d, alpha, spec.length, spec.flexural_rigidity);
            CHECK(r.force_n == doctest::Approx(want).epsilon(1e-10));
        }
    }
}

TEST_CASE("normal force decreases with placement angle") {
    const WhiskerSpec spec = WhiskerSpec::make_default();
    for (const double d : {0.01, 0.02, 0.03, 0.04, 0.05}) {
        double prev = std::numeric_limits<double>::infinity();
        for (double a = 15.0; a <= 45.0; a += 1.0) {
            const double n = prbm_evaluate(d, deg2rad(a), spec, false).force_n;
            CHECK(n > 0.0);
            CHECK(n <= prev * (1 + 1e-12));
            prev = n;
        }
    }
}

TEST_CASE("theta grows with contact depth") {
    double prev = -1.0;
    for (double d = 0.0; d <= 0.1; d += 0.005) {
        const double th = prbm_theta(d, deg2rad(45), 0.2);
        CHECK(th >= prev);
        prev = th;
    }
}

TEST_CASE("vanishing depth means vanishing force") {
    const WhiskerSpec spec = WhiskerSpec::make_default();
    const double n = prbm_evaluate(1e-6, deg2rad(45), spec, false).force_n;
    CHECK(n > 0.0);
    CHECK(n < 1e-4);
}

TEST_CASE("validity window enforced on the checked path") {
    const WhiskerSpec spec = WhiskerSpec::make_default();
    // shallow contact: n < 0.5
    CHECK_THROWS_AS(normal_force(0.01, deg2rad(45), spec), Error);
    // mid-range contact passes
    CHECK(normal_force(0.06, deg2rad(45), spec) > 0.0);
}

TEST_CASE("gamma stays in its expected range inside the window") {
    const WhiskerSpec spec = WhiskerSpec::make_default();
    for (double d = 0.04; d <= 0.12; d += 0.01) {
        const auto r = prbm_evaluate(d, deg2rad(45), spec, false);
        if (r.n > 0.5 && r.n < 10.0) {
            CHECK(r.gamma > 0.8);
            CHECK(r.gamma < 0.85);
        }
    }
}

TEST_CASE("base moment is zero without contact and positive with") {
    const WhiskerSpec spec = WhiskerSpec::make_default();
    CHECK(base_moment(0.0, spec.mount_angle, spec) == 0.0);
    CHECK(base_moment(0.05, spec.mount_angle, spec) > 0.0);
}
