#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "whisker/depth.hpp"
#include "whisker/geom.hpp"
#include "whisker/mechanics.hpp"
#include "whisker/nav.hpp"
#include "whisker/rng.hpp"
#include "whisker/signal.hpp"

namespace whisker {

struct World {
    std::vector<Segment2> segments;
    std::vector<Segment2> exits; // openings, not obstacles
    Vec2 bounds_min{0.0, 0.0};
    Vec2 bounds_max{0.0, 0.0};

    void compute_bounds();
    World rotated(double angle, const Vec2& pivot) const;

    std::string to_json() const;
    static World from_json(const std::string& text);
    static World load(const std::string& path);
    void save(const std::string& path) const;
};

// Axis-aligned square room of the given side with a centered exit gap in the
// +x wall.
World make_square_room(double side, double exit_width);

enum class WhiskerSide { Left, Right };

struct DroneGeom {
    Vec2 mount_left{0.05, 0.025};   // body frame, m (5 cm baseline)
    Vec2 mount_right{0.05, -0.025};
    double body_radius = 0.06;      // m, collision envelope

    Vec2 mount(WhiskerSide side) const {
        return side == WhiskerSide::Left ? mount_left : mount_right;
    }
};

struct ContactInfo {
    double depth = 0.0;      // forward-projected distance from the mount, m
    double wall_angle = 0.0; // hit segment direction angle, world frame
    Vec2 point{0.0, 0.0};
    int segment_index = -1;
};

// Casts the whisker along the heading from its mount point; a hit counts as
// contact when the shaft (mounted at spec.mount_angle out of the flight
// plane) can reach it, i.e. within length * cos(mount_angle).
std::optional<ContactInfo> whisker_contact(const World& world, const Pose2& pose,
                                           const DroneGeom& geom,
                                           const WhiskerSpec& spec,
                                           WhiskerSide side);

struct SimClock {
    int64_t tick = 0;
    double dt = 0.02; // s
    double time() const { return static_cast<double>(tick) * dt; }
};

struct StepResult {
    Pose2 pose;
    bool collision = false;
};

// Forward-Euler body-velocity integration with a hard collision clamp.
StepResult integrate_step(const World& world, const Pose2& pose,
                          const VelocityCmd& cmd, double dt, double body_radius);

enum class SensorMode { IdealRange, Barometric };

struct SensorNoise {
    SensorMode mode = SensorMode::IdealRange;
    double range_sigma = 0.01;       // m; the idealized single-pixel sensor
    double drift_rate = 2.0;         // counts/s, linear thermal drift
    double drift_walk_sigma = 0.8;   // counts/sqrt(s), random-walk component
    double white_sigma = 0.8;        // counts
    double hysteresis_tau = 0.35;    // s, gel lag / release decay
    double hysteresis_tau_left = -1.0; // <0: same as hysteresis_tau
    double ringing_amp = 25.0;       // counts at contact onset
    double ringing_freq = 12.0;      // Hz
    double ringing_damping = 6.0;    // 1/s
    double mid_band_counts = 100.0;  // dominant-channel level at 0.08 m depth
};

// Synthetic three-barometer whisker channels: PRBM base moment through a
// first-order gel lag, plus a ringing burst at contact onset, linear drift,
// a random walk, and white noise. All randomness is keyed by
// (seed, channel stream, tick).
class BaroSynth {
public:
    BaroSynth(const SensorNoise& noise, const WhiskerSpec& spec, uint64_t seed,
              int whisker_id);

    std::array<double, 3> sample(std::optional<double> forward_depth,
                                 const SimClock& clock);

private:
    SensorNoise noise_;
    WhiskerSpec spec_;
    CounterRng rng_;
    int whisker_id_ = 0;
    double counts_per_moment_ = 1.0;
    double tau_ = 0.35;
    std::array<double, 3> gains_{1.0, 0.65, -0.45};
    std::array<double, 3> walk_{0.0, 0.0, 0.0};
    double lag_ = 0.0;
    bool was_contact_ = false;
    double onset_time_ = -1.0;
};

// Idealized range reading (Gaussian noise on the true forward depth).
std::optional<double> ideal_range_sample(std::optional<double> forward_depth,
                                         double sigma, const CounterRng& rng,
                                         int64_t tick);

// ---------------------------------------------------------------------------
// Episode orchestration

struct MissionConfig {
    std::string kind = "explore"; // "navigate" | "explore"
    FsmConfig fsm{};
    ExploreConfig explore{};
    NavigateGoal goal{};
    Pose2 start{};
    SensorNoise noise{};
    EstimatorConfig estimator{};
    DroneGeom geom{};
    WhiskerSpec whisker = WhiskerSpec::make_default();
    PipelineConfig pipeline{};
    const DepthModel* depth_model = nullptr; // required in Barometric mode
    int max_ticks = 30000;
    double dt = 0.02;
    bool record_snapshots = true;
};

struct EpisodeResult {
    bool exit_found = false;
    bool goal_reached = false;
    bool collision = false;
    bool timed_out = false;
    std::string outcome; // "exit" | "goal" | "landed" | "collision" | "timeout"
    double travel_m = 0.0;
    double recon_mae_m = 0.0;
    double recon_rmse_m = 0.0;
    int64_t ticks = 0;
    int64_t contact_ticks = 0;  // ticks with at least one fused contact depth
    int64_t in_band_ticks = 0;  // of those, all depths inside [d_min, d_max]
    std::string telemetry_csv;
    std::vector<GpisSnapshot> snapshots;
};

EpisodeResult run_episode(const World& world, const MissionConfig& cfg,
                          uint64_t seed);

} // namespace whisker
