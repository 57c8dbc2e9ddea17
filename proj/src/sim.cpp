#include "whisker/sim.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace whisker {

namespace {

nlohmann::json segment_to_json(const Segment2& s) {
    nlohmann::json j;
    j["a"] = {s.a.x(), s.a.y()};
    j["b"] = {s.b.x(), s.b.y()};
    if (!s.name.empty()) j["name"] = s.name;
    return j;
}

Segment2 segment_from_json(const nlohmann::json& j) {
    Segment2 s;
    s.a = Vec2{j.at("a").at(0).get<double>(), j.at("a").at(1).get<double>()};
    s.b = Vec2{j.at("b").at(0).get<double>(), j.at("b").at(1).get<double>()};
    if (j.contains("name")) s.name = j.at("name").get<std::string>();
    if (s.length() <= 1e-9) fail("bad_world", "degenerate segment");
    return s;
}

} // namespace

void World::compute_bounds() {
    if (segments.empty()) return;
    bounds_min = segments.front().a;
    bounds_max = segments.front().a;
    for (const auto& s : segments) {
        for (const Vec2& p : {s.a, s.b}) {
            bounds_min = bounds_min.cwiseMin(p);
            bounds_max = bounds_max.cwiseMax(p);
        }
    }
}

World World::rotated(double angle, const Vec2& pivot) const {
    const double c = std::cos(angle), s = std::sin(angle);
    auto rot = [&](const Vec2& p) {
        const Vec2 d = p - pivot;
        return Vec2{pivot.x() + c * d.x() - s * d.y(),
                    pivot.y() + s * d.x() + c * d.y()};
    };
    World w = *this;
    for (auto& seg : w.segments) { seg.a = rot(seg.a); seg.b = rot(seg.b); }
    for (auto& seg : w.exits) { seg.a = rot(seg.a); seg.b = rot(seg.b); }
    w.compute_bounds();
    return w;
}

std::string World::to_json() const {
    nlohmann::json j;
    j["segments"] = nlohmann::json::array();
    for (const auto& s : segments) j["segments"].push_back(segment_to_json(s));
    j["exits"] = nlohmann::json::array();
    for (const auto& s : exits) j["exits"].push_back(segment_to_json(s));
    return j.dump(2);
}

World World::from_json(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text);
    World w;
    for (const auto& js : j.at("segments")) w.segments.push_back(segment_from_json(js));
    if (j.contains("exits")) {
        for (const auto& js : j.at("exits")) w.exits.push_back(segment_from_json(js));
    }
    if (w.segments.empty()) fail("bad_world", "world has no segments");
    w.compute_bounds();
    return w;
}

World World::load(const std::string& path) {
    std::ifstream f(path);
    if (!f) fail("io_error", "cannot read " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return from_json(ss.str());
}

void World::save(const std::string& path) const {
    std::ofstream f(path);
    if (!f) fail("io_error", "cannot write " + path);
    f << to_json() << '\n';
}

World make_square_room(double side, double exit_width) {
    const double h = 0.5 * side;
    const double g = 0.5 * exit_width;
    World w;
    w.segments.push_back({{-h, -h}, {h, -h}, "south"});
    w.segments.push_back({{-h, h}, {h, h}, "north"});
    w.segments.push_back({{-h, -h}, {-h, h}, "west"});
    // east wall split around the exit gap
    w.segments.push_back({{h, -h}, {h, -g}, "east_lo"});
    w.segments.push_back({{h, g}, {h, h}, "east_hi"});
    w.exits.push_back({{h, -g}, {h, g}, "exit"});
    w.compute_bounds();
    return w;
}

std::optional<ContactInfo> whisker_contact(const World& world, const Pose2& pose,
                                           const DroneGeom& geom,
                                           const WhiskerSpec& spec,
                                           WhiskerSide side) {
    const Vec2 origin = body_to_world(geom.mount(side), pose);
    const Vec2 dir = pose.heading();
    const auto hit = ray_cast(origin, dir, world.segments);
    if (!hit) return std::nullopt;
    const double reach = spec.length * std::cos(spec.mount_angle);
    if (hit->distance >= reach) return std::nullopt;
    return ContactInfo{hit->distance, hit->wall_angle, hit->point,
                       hit->segment_index};
}

StepResult integrate_step(const World& world, const Pose2& pose,
                          const VelocityCmd& cmd, double dt, double body_radius) {
    Pose2 next = pose;
    const double c = std::cos(pose.yaw), s = std::sin(pose.yaw);
    next.x += (c * cmd.v_forward - s * cmd.v_side) * dt;
    next.y += (s * cmd.v_forward + c * cmd.v_side) * dt;
    next.yaw = normalize_angle(pose.yaw + cmd.yaw_rate * dt);

    for (const auto& seg : world.segments) {
        if (point_segment_distance(next.position(), seg) < body_radius) {
            Pose2 clamped = pose; // hold position, mission-fatal
            return {clamped, true};
        }
    }
    return {next, false};
}

BaroSynth::BaroSynth(const SensorNoise& noise, const WhiskerSpec& spec,
                     uint64_t seed, int whisker_id)
    : noise_(noise), spec_(spec), rng_{seed, fnv1a("baro_synth")},
      whisker_id_(whisker_id) {
    // dominant channel reads noise.mid_band_counts at 0.08 m forward depth
    const double reach = spec_.length * std::cos(spec_.mount_angle);
    const double mid_moment = base_moment(reach - 0.08, spec_.mount_angle, spec_);
    counts_per_moment_ = noise_.mid_band_counts / mid_moment;
    tau_ = (whisker_id == 0 && noise_.hysteresis_tau_left > 0.0)
               ? noise_.hysteresis_tau_left
               : noise_.hysteresis_tau;
}

std::array<double, 3> BaroSynth::sample(std::optional<double> forward_depth,
                                        const SimClock& clock) {
    const double t = clock.time();
    const double reach = spec_.length * std::cos(spec_.mount_angle);

    double moment = 0.0;
    bool contact = false;
    if (forward_depth && *forward_depth < reach) {
        const double d_prbm = reach - *forward_depth;
        if (d_prbm > 0.0) {
            moment = base_moment(d_prbm, spec_.mount_angle, spec_);
            contact = true;
        }
    }

    // gel hysteresis: the transduced moment lags the true one and decays
    // toward zero after release with the same time constant
    lag_ += (clock.dt / tau_) * (moment - lag_);

    if (contact && !was_contact_) onset_time_ = t;
    was_contact_ = contact;
    double ring = 0.0;
    if (onset_time_ >= 0.0) {
        const double dt_on = t - onset_time_;
        if (dt_on * noise_.ringing_damping < 30.0) {
            ring = noise_.ringing_amp * std::exp(-noise_.ringing_damping * dt_on) *
                   std::sin(2.0 * kPi * noise_.ringing_freq * dt_on);
        }
    }

    std::array<double, 3> out{};
    for (int ch = 0; ch < 3; ++ch) {
        const uint64_t stream = static_cast<uint64_t>(whisker_id_ * 3 + ch);
        CounterRng chan{rng_.seed, rng_.stream ^ mix64(stream)};
        walk_[static_cast<size_t>(ch)] +=
            noise_.drift_walk_sigma * std::sqrt(clock.dt) *
            chan.gaussian(static_cast<uint64_t>(clock.tick), 0);
        const double drift =
            noise_.drift_rate * t + walk_[static_cast<size_t>(ch)];
        const double white =
            noise_.white_sigma * chan.gaussian(static_cast<uint64_t>(clock.tick), 1);
        out[static_cast<size_t>(ch)] =
            gains_[static_cast<size_t>(ch)] * counts_per_moment_ * lag_ +
            gains_[static_cast<size_t>(ch)] * ring + drift + white;
    }
    return out;
}

std::optional<double> ideal_range_sample(std::optional<double> forward_depth,
                                         double sigma, const CounterRng& rng,
                                         int64_t tick) {
    if (!forward_depth) return std::nullopt;
    return *forward_depth + sigma * rng.gaussian(static_cast<uint64_t>(tick));
}

} // namespace whisker
