#include "whisker/mechanics.hpp"

#include <cmath>

namespace whisker {

namespace {
// polynomial coefficients of the 1R PRBM stiffness fit, valid 0.5 < n < 10
constexpr double kA0 = 2.654855;
constexpr double kA1 = 0.509896e-1;
constexpr double kA2 = 0.126749e-1;
constexpr double kA3 = 0.142039e-2;
constexpr double kA4 = 0.584525e-4;
constexpr double kNitinolE = 6.5e10; // Pa

void check_validity(double n) {
    if (!(n > 0.5 && n < 10.0)) {
        fail("validity_window", "PRBM force ratio n outside (0.5, 10)");
    }
}
} // namespace

double default_flexural_rigidity(double diameter) {
    const double i = kPi * std::pow(diameter, 4) / 64.0;
    return kNitinolE * i;
}

double prbm_theta(double d, double alpha, double l_o) {
    if (d < 0.0) fail("out_of_range", "contact depth negative");
    const double denom = l_o - d * std::cos(alpha);
    if (denom <= 0.0) fail("out_of_range", "contact point behind whisker root");
    return std::atan(d * std::sin(alpha) / denom);
}

double prbm_gamma(double n, bool enforce_validity) {
    if (enforce_validity) check_validity(n);
    return 0.841655 - 0.0067807 * n + 0.000438 * n * n;
}

double prbm_spring(double n, double gamma, double flexural_rigidity,
                   double beam_length, bool enforce_validity) {
    if (enforce_validity) check_validity(n);
    const double poly = kA0 - kA1 * n + kA2 * n * n - kA3 * n * n * n +
                        kA4 * n * n * n * n;
    return gamma * flexural_rigidity * poly / beam_length;
}

PrbmResult prbm_evaluate(double d, double alpha, const WhiskerSpec& spec,
                         bool enforce_validity) {
    PrbmResult r;
    r.theta = prbm_theta(d, alpha, spec.length);
    r.beta = 1.5 * r.theta;
    r.n = std::tan(r.beta);
    r.gamma = prbm_gamma(r.n, enforce_validity);

    const double px = spec.length - d * std::cos(alpha);
    const double py = d * std::sin(alpha);
    const double contact_radius = std::hypot(px, py);
    r.beam_length = contact_radius / r.gamma;
    r.spring_k = prbm_spring(r.n, r.gamma, spec.flexural_rigidity,
                             r.beam_length, enforce_validity);

    const double load_denom =
        r.gamma * r.beam_length * (std::cos(r.theta) + r.n * std::sin(r.theta));
    r.force_f = r.spring_k * r.theta / load_denom;

    const double s = std::sin(r.beta + alpha);
    if (std::abs(s) < 1e-9) fail("singular", "normal-force projection singular");
    r.force_n = r.force_f / s;
    return r;
}

double normal_force(double d, double alpha, const WhiskerSpec& spec) {
    return prbm_evaluate(d, alpha, spec, true).force_n;
}

double base_moment(double d, double alpha, const WhiskerSpec& spec) {
    if (d <= 0.0) return 0.0;
    const PrbmResult r = prbm_evaluate(d, alpha, spec, false);
    return r.force_n * r.gamma * r.beam_length;
}

} // namespace whisker
