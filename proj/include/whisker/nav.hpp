#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "whisker/contour.hpp"
#include "whisker/geom.hpp"
#include "whisker/gpis.hpp"

namespace whisker {

struct FsmConfig {
    double v_max = 0.20;              // m/s
    double omega_max = 0.8;           // rad/s
    double contact_threshold = 20.0;  // T_c, counts
    double d_min = 0.060;             // m, standoff band
    double d_max = 0.100;             // m
    int hover_ticks = 100;            // drift-compensation init (2 s at 50 Hz)
    int follow_ticks = 100;           // wall-follow data window (2 s)
    int retreat_ticks = 50;           // backward leg (1 s)
    double turn_deadband = 0.010;     // m, |d_l - d_r| before turning
    int clear_ticks = 25;             // both contacts lost -> obstacle cleared
    bool sweep_right = true;          // lateral follow direction
};

enum class MissionState { Hovering, FlyingForward, WallFollowing, ResumeForward, Landing };

enum class FollowSubstate { None, FlySideways, FlyForward, FlyBackward, TurnLeft, TurnRight };

struct VelocityCmd {
    double v_forward = 0.0; // body frame, m/s
    double v_side = 0.0;    // body frame, +left, m/s
    double yaw_rate = 0.0;  // rad/s, CCW positive
};

struct NavState {
    MissionState mission = MissionState::Hovering;
    FollowSubstate substate = FollowSubstate::None;
    int ticks_in_state = 0;
    int clear_count = 0;
};

const char* to_string(MissionState s);
const char* to_string(FollowSubstate s);

// Band logic of the wall-follow mode. Depths are used only where the
// corresponding contact flag is set.
FollowSubstate follow_substate(std::optional<double> d_l, std::optional<double> d_r,
                               const FsmConfig& cfg);
VelocityCmd follow_command(FollowSubstate s, const FsmConfig& cfg);

// One mission-level transition. Total on every input; emitted speeds are
// capped at v_max / omega_max.
std::pair<NavState, VelocityCmd> fsm_step(NavState state, std::optional<double> d_l,
                                          std::optional<double> d_r, bool contact_l,
                                          bool contact_r, const FsmConfig& cfg);

// ---------------------------------------------------------------------------
// Exploration mission (bootstrap sorties + GPIS-guided target pursuit)

struct TrainingPoint {
    Vec2 p{0.0, 0.0};
    double label = 0.0; // 0 = surface, -1 = interior
    int64_t tick = 0;
};

struct GpisSnapshot {
    int index = 0;
    std::vector<TrainingPoint> training;
    GpisHyper hyper;
    Grid2 grid;                    // values = posterior mean
    std::vector<double> variance;  // per grid corner
    std::vector<Contour> contours;
    std::vector<Vec2> corners;
    AcquisitionChoice target;
    bool exit_hypothesis = false;
};

struct ExploreConfig {
    FsmConfig fsm{};
    GpisHyper gpis{};
    double corner_threshold = -5.0;  // q, 1/m
    double penalty_radius = 0.4;     // c_pen, m (defaults to kernel scale)
    int bootstrap_count = 4;         // orthogonal sorties
    int follow_points = 4;           // surface points per wall-follow
    int retreat_points = 1;          // interior points per retreat
    double exit_width = 0.5;         // m, contour gap that may be an exit
    double exit_var_frac = 0.5;      // of the prior variance
    double support_radius = 0.15;    // m, surface point backing a contour arc
    double target_tolerance = 0.10;  // m
    double probe_distance = 0.5;     // m beyond an uncontacted target
    double exit_dash = 0.8;          // m flown through a confirmed opening
    double approach_max = 3.0;       // m without contact -> open space
    double home_tolerance = 0.15;    // m
    double align_tolerance = 0.03;   // rad
    double dt = 0.02;                // s
    Vec2 grid_origin{-1.4, -1.4};
    double grid_spacing = 0.0717948718; // 40x40 over 2.8 m by default
    int grid_nx = 40;
    int grid_ny = 40;
};

enum class ExplorePhase {
    Hover, BootstrapAlign, BootstrapApproach, Follow, Retreat, ReturnHome,
    Decide, AlignToTarget, FlyToTarget, Probe, ExitDash, Land
};

const char* to_string(ExplorePhase p);

// Reactive mission controller: consumes fused depths and contact flags,
// owns the training set and the GPIS refits, emits body velocity commands.
class ExplorationController {
public:
    ExplorationController(ExploreConfig cfg, Pose2 start);

    struct Decision {
        VelocityCmd cmd;
        ExplorePhase phase = ExplorePhase::Hover;
        FollowSubstate substate = FollowSubstate::None;
        bool wants_land = false;
    };

    Decision step(const Pose2& pose, std::optional<double> d_l,
                  std::optional<double> d_r, bool contact_l, bool contact_r,
                  const Vec2& mount_left_world, const Vec2& mount_right_world);

    const std::vector<TrainingPoint>& training_points() const { return points_; }
    int refit_count() const { return refits_; }
    bool exit_declared() const { return exit_declared_; }

    std::function<void(const GpisSnapshot&)> on_snapshot;

private:
    void add_point(const Vec2& p, double label);
    void collect_surface(const Pose2& pose, std::optional<double> d_l,
                         std::optional<double> d_r, bool contact_l, bool contact_r,
                         const Vec2& ml, const Vec2& mr);
    void decide(const Pose2& pose);
    VelocityCmd align_toward(double target_yaw, const Pose2& pose, bool& done) const;
    VelocityCmd fly_toward(const Vec2& target, const Pose2& pose) const;

    ExploreConfig cfg_;
    Pose2 start_;
    ExplorePhase phase_ = ExplorePhase::Hover;
    FollowSubstate substate_ = FollowSubstate::None;
    int phase_ticks_ = 0;
    int sortie_ = 0;
    int64_t tick_ = 0;
    double leg_start_yaw_ = 0.0;
    Vec2 leg_start_pos_{0.0, 0.0};
    Vec2 target_{0.0, 0.0};
    bool exit_hypothesis_ = false;
    bool exit_declared_ = false;
    int collected_in_follow_ = 0;
    int lost_in_follow_ = 0;
    ExplorePhase after_follow_ = ExplorePhase::ReturnHome;
    std::vector<TrainingPoint> points_;
    int refits_ = 0;
};

// ---------------------------------------------------------------------------
// Wall-following navigation mission (fly to a goal past obstacles)

struct NavigateGoal {
    Vec2 point{0.0, 0.0};
    double radius = 0.3;
};

class NavigateController {
public:
    NavigateController(FsmConfig cfg, NavigateGoal goal);

    struct Decision {
        VelocityCmd cmd;
        NavState state;
        bool wants_land = false;
    };

    Decision step(const Pose2& pose, std::optional<double> d_l,
                  std::optional<double> d_r, bool contact_l, bool contact_r);

private:
    FsmConfig cfg_;
    NavigateGoal goal_;
    NavState state_{};
};

} // namespace whisker
