#pragma once

#include "whisker/geom.hpp"

namespace whisker {

// EI for a circular nitinol cross-section (E = 6.5e10 Pa).
double default_flexural_rigidity(double diameter);

struct WhiskerSpec {
    double length = 0.200;      // l_o, m
    double diameter = 4.0e-4;   // m
    double flexural_rigidity = 1.0; // EI, N*m^2 (see make_default)
    double mount_angle = deg2rad(45.0); // alpha, rad, in (0, pi/2)
    Vec2 mount_offset{0.0, 0.0};        // body frame, m

    static WhiskerSpec make_default() {
        WhiskerSpec s;
        s.flexural_rigidity = default_flexural_rigidity(s.diameter);
        return s;
    }
};

struct PrbmResult {
    double theta = 0.0;       // pseudo-rigid-body rotation, rad
    double beta = 0.0;        // force-ratio angle ~ 3/2 theta, rad
    double n = 0.0;           // tan(beta)
    double gamma = 0.0;       // characteristic radius factor
    double beam_length = 0.0; // l_r, m
    double spring_k = 0.0;    // torsion spring constant, N*m/rad
    double force_f = 0.0;     // vertical contact force, N
    double force_n = 0.0;     // contact-normal force, N
};

// Rigid-link rotation from the contact geometry: theta =
// arctan(d sin a / (l_o - d cos a)). Throws out_of_range when the contact
// point would pass the root (denominator <= 0) or d is negative.
double prbm_theta(double d, double alpha, double l_o);

// Characteristic radius factor; validity window 0.5 < n < 10.
double prbm_gamma(double n, bool enforce_validity = true);

// Torsion spring constant K.
double prbm_spring(double n, double gamma, double flexural_rigidity,
                   double beam_length, bool enforce_validity = true);

// Full chain theta -> beta -> n -> gamma -> l_r -> K -> F -> N.
// enforce_validity=false evaluates the polynomial fits outside the stated
// window (used for shallow-contact signal synthesis and trend sweeps).
PrbmResult prbm_evaluate(double d, double alpha, const WhiskerSpec& spec,
                         bool enforce_validity = true);

// Contact-normal force with the validity window enforced.
double normal_force(double d, double alpha, const WhiskerSpec& spec);

// Bending moment at the whisker base (force times contact-point arm).
// Drives the synthetic barometer channels; evaluated unchecked.
double base_moment(double d, double alpha, const WhiskerSpec& spec);

} // namespace whisker
