#pragma once

#include <Eigen/Core>
#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "whisker/errors.hpp"

namespace whisker {

using Vec2 = Eigen::Vector2d;

inline constexpr double kPi = 3.14159265358979323846;

inline double deg2rad(double d) { return d * kPi / 180.0; }
inline double rad2deg(double r) { return r * 180.0 / kPi; }

// Wraps to (-pi, pi]. World frame is right-handed, yaw CCW-positive.
inline double normalize_angle(double a) {
    a = std::remainder(a, 2.0 * kPi);
    if (a <= -kPi) a = kPi;
    return a;
}

struct Pose2 {
    double x = 0.0;   // m, world frame
    double y = 0.0;   // m, world frame
    double yaw = 0.0; // rad, normalized to (-pi, pi]

    Vec2 position() const { return {x, y}; }
    Vec2 heading() const { return {std::cos(yaw), std::sin(yaw)}; }
};

// R_d^T (p_world - p_drone), with R_d the yaw rotation.
Vec2 world_to_body(const Vec2& p_world, const Pose2& pose);
Vec2 body_to_world(const Vec2& p_body, const Pose2& pose);

struct Segment2 {
    Vec2 a{0.0, 0.0};
    Vec2 b{0.0, 0.0};
    std::string name; // optional; tags exits in world files

    double length() const { return (b - a).norm(); }
    // direction angle of the segment in the world frame
    double angle() const { return std::atan2(b.y() - a.y(), b.x() - a.x()); }
};

double point_segment_distance(const Vec2& p, const Segment2& s);

// Angle of the unit normal to the segment's supporting line that points from
// `from` toward the line. The process model expresses wall orientation this
// way (heading == this angle means the drone faces the wall squarely).
double wall_normal_toward(const Segment2& s, const Vec2& from);

struct RayHit {
    double distance = 0.0;   // along the ray, m
    Vec2 point{0.0, 0.0};
    double wall_angle = 0.0; // hit segment's direction angle, world frame
    int segment_index = -1;
};

// Nearest intersection along origin + t*dir, t >= 0; dir must be normalized.
// Equidistant corner hits resolve to the lowest segment index.
std::optional<RayHit> ray_cast(const Vec2& origin, const Vec2& dir,
                               std::span<const Segment2> world);

// Regular corner-sampled scalar field used for GPIS queries and contouring.
struct Grid2 {
    Vec2 origin{0.0, 0.0};
    double spacing = 0.1; // m
    int nx = 2;
    int ny = 2;
    std::vector<double> values; // nx*ny corner samples, row-major in iy

    Grid2() = default;
    Grid2(const Vec2& origin_, double spacing_, int nx_, int ny_);

    int index(int ix, int iy) const { return iy * nx + ix; }
    Vec2 corner(int ix, int iy) const {
        return {origin.x() + spacing * ix, origin.y() + spacing * iy};
    }
    double& at(int ix, int iy) { return values[static_cast<size_t>(index(ix, iy))]; }
    double at(int ix, int iy) const { return values[static_cast<size_t>(index(ix, iy))]; }
};

} // namespace whisker
