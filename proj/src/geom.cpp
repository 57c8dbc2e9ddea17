#include "whisker/geom.hpp"

#include <algorithm>
#include <limits>

namespace whisker {

namespace {
double cross2(const Vec2& u, const Vec2& v) {
    return u.x() * v.y() - u.y() * v.x();
}
} // namespace

Vec2 world_to_body(const Vec2& p_world, const Pose2& pose) {
    const double c = std::cos(pose.yaw);
    const double s = std::sin(pose.yaw);
    const Vec2 d = p_world - pose.position();
    return {c * d.x() + s * d.y(), -s * d.x() + c * d.y()};
}

Vec2 body_to_world(const Vec2& p_body, const Pose2& pose) {
    const double c = std::cos(pose.yaw);
    const double s = std::sin(pose.yaw);
    return {pose.x + c * p_body.x() - s * p_body.y(),
            pose.y + s * p_body.x() + c * p_body.y()};
}

double point_segment_distance(const Vec2& p, const Segment2& s) {
    const Vec2 e = s.b - s.a;
    const double len2 = e.squaredNorm();
    if (len2 <= 0.0) return (p - s.a).norm();
    const double t = std::clamp((p - s.a).dot(e) / len2, 0.0, 1.0);
    return (p - (s.a + t * e)).norm();
}

double wall_normal_toward(const Segment2& s, const Vec2& from) {
    const Vec2 e = (s.b - s.a).normalized();
    Vec2 n{-e.y(), e.x()};
    // orient toward the line
    if ((s.a - from).dot(n) < 0.0) n = -n;
    return std::atan2(n.y(), n.x());
}

std::optional<RayHit> ray_cast(const Vec2& origin, const Vec2& dir,
                               std::span<const Segment2> world) {
    std::optional<RayHit> best;
    for (size_t i = 0; i < world.size(); ++i) {
        const Segment2& seg = world[i];
        const Vec2 e = seg.b - seg.a;
        const double denom = cross2(dir, e);
        if (std::abs(denom) < 1e-15) continue; // parallel
        const Vec2 ao = seg.a - origin;
        const double t = cross2(ao, e) / denom;
        const double s = cross2(ao, dir) / denom;
        if (t < 0.0 || s < 0.0 || s > 1.0) continue;
        if (!best || t < best->distance) {
            best = RayHit{t, origin + t * dir, seg.angle(), static_cast<int>(i)};
        }
    }
    return best;
}

Grid2::Grid2(const Vec2& origin_, double spacing_, int nx_, int ny_)
    : origin(origin_), spacing(spacing_), nx(nx_), ny(ny_) {
    if (nx < 2 || ny < 2) fail("bad_grid", "grid needs at least 2x2 corners");
    if (!(spacing > 0.0)) fail("bad_grid", "grid spacing must be positive");
    values.assign(static_cast<size_t>(nx) * static_cast<size_t>(ny), 0.0);
}

} // namespace whisker
