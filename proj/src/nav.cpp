#include "whisker/nav.hpp"

#include <algorithm>
#include <cmath>

#include "whisker/errors.hpp"

namespace whisker {

const char* to_string(MissionState s) {
    switch (s) {
        case MissionState::Hovering: return "hovering";
        case MissionState::FlyingForward: return "flying_forward";
        case MissionState::WallFollowing: return "wall_following";
        case MissionState::ResumeForward: return "resume_forward";
        case MissionState::Landing: return "landing";
    }
    return "?";
}

const char* to_string(FollowSubstate s) {
    switch (s) {
        case FollowSubstate::None: return "none";
        case FollowSubstate::FlySideways: return "fly_sideways";
        case FollowSubstate::FlyForward: return "fly_forward";
        case FollowSubstate::FlyBackward: return "fly_backward";
        case FollowSubstate::TurnLeft: return "turn_left";
        case FollowSubstate::TurnRight: return "turn_right";
    }
    return "?";
}

const char* to_string(ExplorePhase p) {
    switch (p) {
        case ExplorePhase::Hover: return "hover";
        case ExplorePhase::BootstrapAlign: return "bootstrap_align";
        case ExplorePhase::BootstrapApproach: return "bootstrap_approach";
        case ExplorePhase::Follow: return "follow";
        case ExplorePhase::Retreat: return "retreat";
        case ExplorePhase::ReturnHome: return "return_home";
        case ExplorePhase::Decide: return "decide";
        case ExplorePhase::AlignToTarget: return "align_to_target";
        case ExplorePhase::FlyToTarget: return "fly_to_target";
        case ExplorePhase::Probe: return "probe";
        case ExplorePhase::ExitDash: return "exit_dash";
        case ExplorePhase::Land: return "land";
    }
    return "?";
}

FollowSubstate follow_substate(std::optional<double> d_l, std::optional<double> d_r,
                               const FsmConfig& cfg) {
    const bool have_l = d_l.has_value();
    const bool have_r = d_r.has_value();
    if (!have_l && !have_r) return FollowSubstate::FlySideways;

    const auto below = [&](std::optional<double> d) { return d && *d < cfg.d_min; };
    const auto above = [&](std::optional<double> d) { return d && *d > cfg.d_max; };
    if (below(d_l) || below(d_r)) return FollowSubstate::FlyBackward;
    if (above(d_l) || above(d_r)) return FollowSubstate::FlyForward;
    if (have_l && have_r && std::abs(*d_l - *d_r) > cfg.turn_deadband) {
        // deeper left reading means the heading is rotated past the wall
        // normal CCW; turn clockwise to square up (and vice versa)
        return (*d_l > *d_r) ? FollowSubstate::TurnRight : FollowSubstate::TurnLeft;
    }
    return FollowSubstate::FlySideways;
}

VelocityCmd follow_command(FollowSubstate s, const FsmConfig& cfg) {
    VelocityCmd cmd;
    switch (s) {
        case FollowSubstate::FlySideways:
            cmd.v_side = cfg.sweep_right ? -cfg.v_max : cfg.v_max;
            break;
        case FollowSubstate::FlyForward:
            cmd.v_forward = 0.5 * cfg.v_max;
            break;
        case FollowSubstate::FlyBackward:
            cmd.v_forward = -0.5 * cfg.v_max;
            break;
        case FollowSubstate::TurnLeft:
            cmd.yaw_rate = cfg.omega_max;
            break;
        case FollowSubstate::TurnRight:
            cmd.yaw_rate = -cfg.omega_max;
            break;
        case FollowSubstate::None:
            break;
    }
    return cmd;
}

std::pair<NavState, VelocityCmd> fsm_step(NavState state, std::optional<double> d_l,
                                          std::optional<double> d_r, bool contact_l,
                                          bool contact_r, const FsmConfig& cfg) {
    // depth readings count only while the whisker reports contact
    if (!contact_l) d_l.reset();
    if (!contact_r) d_r.reset();
    const bool any_contact = contact_l || contact_r;

    VelocityCmd cmd;
    NavState next = state;
    ++next.ticks_in_state;

    switch (state.mission) {
        case MissionState::Hovering:
            if (next.ticks_in_state >= cfg.hover_ticks) {
                next.mission = MissionState::FlyingForward;
                next.ticks_in_state = 0;
            }
            break;
        case MissionState::FlyingForward:
        case MissionState::ResumeForward:
            if (any_contact) {
                next.mission = MissionState::WallFollowing;
                next.ticks_in_state = 0;
                next.clear_count = 0;
                next.substate = follow_substate(d_l, d_r, cfg);
                cmd = follow_command(next.substate, cfg);
            } else {
                cmd.v_forward = cfg.v_max;
            }
            break;
        case MissionState::WallFollowing:
            if (!any_contact) {
                ++next.clear_count;
                next.substate = FollowSubstate::FlySideways; // keep sweeping past the edge
                cmd = follow_command(next.substate, cfg);
                if (next.clear_count >= cfg.clear_ticks) {
                    next.mission = MissionState::ResumeForward;
                    next.substate = FollowSubstate::None;
                    next.ticks_in_state = 0;
                    next.clear_count = 0;
                    cmd = VelocityCmd{};
                    cmd.v_forward = cfg.v_max;
                }
            } else {
                next.clear_count = 0;
                next.substate = follow_substate(d_l, d_r, cfg);
                cmd = follow_command(next.substate, cfg);
            }
            break;
        case MissionState::Landing:
            break;
    }

    cmd.v_forward = std::clamp(cmd.v_forward, -cfg.v_max, cfg.v_max);
    cmd.v_side = std::clamp(cmd.v_side, -cfg.v_max, cfg.v_max);
    cmd.yaw_rate = std::clamp(cmd.yaw_rate, -cfg.omega_max, cfg.omega_max);
    return {next, cmd};
}

// ---------------------------------------------------------------------------

ExplorationController::ExplorationController(ExploreConfig cfg, Pose2 start)
    : cfg_(cfg), start_(start) {}

void ExplorationController::add_point(const Vec2& p, double label) {
    if (static_cast<int>(points_.size()) >= cfg_.gpis.cap) {
        // Cap reached: evict the oldest surface point outside the current
        // region of interest (near the point being added), else the oldest.
        size_t victim = 0;
        bool found = false;
        for (size_t i = 0; i < points_.size(); ++i) {
            if (points_[i].label == 0.0 && (points_[i].p - p).norm() > 0.5) {
                victim = i;
                found = true;
                break;
            }
        }
        points_.erase(points_.begin() + static_cast<std::ptrdiff_t>(found ? victim : 0));
    }
    points_.push_back({p, label, tick_});
}

void ExplorationController::collect_surface(const Pose2& pose,
                                            std::optional<double> d_l,
                                            std::optional<double> d_r,
                                            bool contact_l, bool contact_r,
                                            const Vec2& ml, const Vec2& mr) {
    const Vec2 h = pose.heading();
    Vec2 sum{0.0, 0.0};
    int n = 0;
    if (contact_l && d_l) {
        sum += ml + *d_l * h;
        ++n;
    }
    if (contact_r && d_r) {
        sum += mr + *d_r * h;
        ++n;
    }
    if (n > 0) add_point(sum / n, 0.0);
}

VelocityCmd ExplorationController::align_toward(double target_yaw, const Pose2& pose,
                                                bool& done) const {
    const double err = normalize_angle(target_yaw - pose.yaw);
    VelocityCmd cmd;
    cmd.yaw_rate = std::clamp(err / cfg_.dt, -cfg_.fsm.omega_max, cfg_.fsm.omega_max);
    done = std::abs(err) < cfg_.align_tolerance;
    return cmd;
}

VelocityCmd ExplorationController::fly_toward(const Vec2& target,
                                              const Pose2& pose) const {
    const Vec2 to = target - pose.position();
    const double bearing = std::atan2(to.y(), to.x());
    const double err = normalize_angle(bearing - pose.yaw);
    VelocityCmd cmd;
    cmd.yaw_rate = std::clamp(err / cfg_.dt, -cfg_.fsm.omega_max, cfg_.fsm.omega_max);
    if (std::abs(err) < 0.3) cmd.v_forward = cfg_.fsm.v_max;
    return cmd;
}

void ExplorationController::decide(const Pose2& pose) {
    exit_hypothesis_ = false;
    ++refits_;

    std::vector<Vec2> xs;
    Eigen::VectorXd ys(static_cast<Eigen::Index>(points_.size()));
    xs.reserve(points_.size());
    for (size_t i = 0; i < points_.size(); ++i) {
        xs.push_back(points_[i].p);
        ys(static_cast<Eigen::Index>(i)) = points_[i].label;
    }

    Grid2 grid(cfg_.grid_origin, cfg_.grid_spacing, cfg_.grid_nx, cfg_.grid_ny);
    GpisSnapshot snap;
    snap.index = refits_;
    snap.training = points_;
    snap.hyper = cfg_.gpis;

    std::vector<Contour> contours;
    GpisModel model;
    try {
        model = GpisModel::fit(std::move(xs), std::move(ys), cfg_.gpis);
        const FieldResult field = model.eval_field(grid);
        grid.values = field.mean;
        snap.variance = field.variance;
        contours = marching_squares(grid, 0.0, [&model](const Vec2& p) {
            return model.mean_at(p);
        });
    } catch (const Error&) {
        // degenerate map (no crossing yet): fall back to another sortie
        snap.grid = grid;
        if (on_snapshot) on_snapshot(snap);
        sortie_ = (sortie_ + 1) % std::max(1, cfg_.bootstrap_count);
        phase_ = ExplorePhase::BootstrapAlign;
        phase_ticks_ = 0;
        return;
    }
    snap.grid = grid;
    snap.contours = contours;

    // curvature along every contour; corner clustering per contour
    CornerSet all_corners;
    all_corners.threshold = cfg_.corner_threshold;
    std::vector<Vec2> candidates;
    std::vector<double> cand_var;
    for (const Contour& c : contours) {
        const auto queries = model.query_batch(c.points);
        std::vector<double> kappa(c.points.size());
        for (size_t i = 0; i < queries.size(); ++i) {
            kappa[i] = queries[i].curvature_valid ? queries[i].curvature : 0.0;
        }
        const CornerSet cs =
            detect_corners(c.points, kappa, cfg_.corner_threshold, c.closed);
        all_corners.centroids.insert(all_corners.centroids.end(),
                                     cs.centroids.begin(), cs.centroids.end());
        for (size_t i = 0; i < c.points.size(); ++i) {
            candidates.push_back(c.points[i]);
            cand_var.push_back(queries[i].variance);
        }
    }
    snap.corners = all_corners.centroids;

    // Exit test: a contour arc with no supporting surface point whose chord
    // is wider than the configured exit width and whose variance has dropped
    // (the flanks are mapped) is treated as an opening.
    const double var_limit = cfg_.exit_var_frac * model.prior_variance();
    double best_gap = 0.0;
    Vec2 gap_mid{0.0, 0.0};
    size_t cand_base = 0;
    for (const Contour& c : contours) {
        const size_t n = c.points.size();
        std::vector<bool> supported(n, false);
        for (size_t i = 0; i < n; ++i) {
            for (const auto& tp : points_) {
                if (tp.label == 0.0 &&
                    (tp.p - c.points[i]).norm() < cfg_.support_radius) {
                    supported[i] = true;
                    break;
                }
            }
        }
        // maximal unsupported runs, as index lists (circular on closed loops)
        std::vector<std::vector<size_t>> runs;
        size_t i = 0;
        while (i < n) {
            if (supported[i]) { ++i; continue; }
            runs.emplace_back();
            while (i < n && !supported[i]) runs.back().push_back(i++);
        }
        if (!runs.empty() &&
            !(c.closed && runs.size() == 1 && runs[0].size() == n)) {
            if (c.closed && runs.size() >= 2 && runs.front().front() == 0 &&
                runs.back().back() == n - 1) {
                // gap spans the loop seam: join tail run ahead of head run
                std::vector<size_t> joined = runs.back();
                joined.insert(joined.end(), runs.front().begin(), runs.front().end());
                runs.front() = std::move(joined);
                runs.pop_back();
            }
            for (const auto& run : runs) {
                double var_sum = 0.0;
                for (size_t k : run) var_sum += cand_var[cand_base + k];
                const double mean_var = var_sum / static_cast<double>(run.size());
                const double chord =
                    (c.points[run.front()] - c.points[run.back()]).norm();
                if (chord > cfg_.exit_width && mean_var < var_limit &&
                    chord > best_gap) {
                    best_gap = chord;
                    gap_mid = c.points[run[run.size() / 2]];
                }
            }
        }
        cand_base += n;
    }

    if (best_gap > 0.0) {
        exit_hypothesis_ = true;
        target_ = gap_mid;
        snap.exit_hypothesis = true;
        snap.target.point = gap_mid;
        snap.target.index = -1;
    } else {
        const AcquisitionChoice choice =
            acquisition(model, all_corners, candidates, cfg_.penalty_radius);
        target_ = choice.point;
        snap.target = choice;
    }

    if (on_snapshot) on_snapshot(snap);
    phase_ = ExplorePhase::AlignToTarget;
    phase_ticks_ = 0;
}

ExplorationController::Decision ExplorationController::step(
    const Pose2& pose, std::optional<double> d_l, std::optional<double> d_r,
    bool contact_l, bool contact_r, const Vec2& mount_left_world,
    const Vec2& mount_right_world) {
    if (!contact_l) d_l.reset();
    if (!contact_r) d_r.reset();
    const bool any_contact = contact_l || contact_r;

    Decision out;
    ++tick_;
    ++phase_ticks_;

    auto enter = [&](ExplorePhase p) {
        phase_ = p;
        phase_ticks_ = 0;
        substate_ = FollowSubstate::None;
    };
    auto begin_follow = [&](ExplorePhase after) {
        after_follow_ = after;
        collected_in_follow_ = 0;
        lost_in_follow_ = 0;
        enter(ExplorePhase::Follow);
    };

    switch (phase_) {
        case ExplorePhase::Hover:
            if (phase_ticks_ >= cfg_.fsm.hover_ticks) enter(ExplorePhase::BootstrapAlign);
            break;

        case ExplorePhase::BootstrapAlign: {
            const double spacing = 2.0 * kPi / std::max(1, cfg_.bootstrap_count);
            const double want = normalize_angle(start_.yaw + sortie_ * spacing);
            bool done = false;
            out.cmd = align_toward(want, pose, done);
            if (done) {
                leg_start_pos_ = pose.position();
                enter(ExplorePhase::BootstrapApproach);
            }
            break;
        }

        case ExplorePhase::BootstrapApproach:
            if (any_contact) {
                begin_follow(ExplorePhase::ReturnHome);
            } else if ((pose.position() - leg_start_pos_).norm() > cfg_.approach_max) {
                // no wall within reach: flew through an opening
                exit_declared_ = true;
                leg_start_pos_ = pose.position();
                enter(ExplorePhase::ExitDash);
            } else {
                out.cmd.v_forward = cfg_.fsm.v_max;
            }
            break;

        case ExplorePhase::Follow: {
            if (!any_contact) {
                ++lost_in_follow_;
            } else {
                lost_in_follow_ = 0;
            }
            substate_ = follow_substate(d_l, d_r, cfg_.fsm);
            out.cmd = follow_command(substate_, cfg_.fsm);

            // downsampled surface points, evenly spread over the window
            if (collected_in_follow_ < cfg_.follow_points) {
                const int due = (2 * collected_in_follow_ + 1) * cfg_.fsm.follow_ticks /
                                (2 * cfg_.follow_points);
                if (phase_ticks_ >= due && any_contact) {
                    collect_surface(pose, d_l, d_r, contact_l, contact_r,
                                    mount_left_world, mount_right_world);
                    ++collected_in_follow_;
                }
            }
            if (phase_ticks_ >= cfg_.fsm.follow_ticks ||
                lost_in_follow_ > cfg_.fsm.clear_ticks) {
                enter(ExplorePhase::Retreat);
            }
            break;
        }

        case ExplorePhase::Retreat:
            out.cmd.v_forward = -0.5 * cfg_.fsm.v_max;
            if (phase_ticks_ >= cfg_.fsm.retreat_ticks) {
                for (int i = 0; i < cfg_.retreat_points; ++i) {
                    add_point(pose.position(), -1.0);
                }
                enter(after_follow_);
            }
            break;

        case ExplorePhase::ReturnHome:
            if ((pose.position() - start_.position()).norm() < cfg_.home_tolerance) {
                ++sortie_;
                enter(sortie_ < cfg_.bootstrap_count ? ExplorePhase::BootstrapAlign
                                                     : ExplorePhase::Decide);
            } else {
                out.cmd = fly_toward(start_.position(), pose);
            }
            break;

        case ExplorePhase::Decide:
            decide(pose);
            break;

        case ExplorePhase::AlignToTarget: {
            const Vec2 to = target_ - pose.position();
            bool done = false;
            out.cmd = align_toward(std::atan2(to.y(), to.x()), pose, done);
            if (done) {
                leg_start_pos_ = pose.position();
                enter(ExplorePhase::FlyToTarget);
            }
            break;
        }

        case ExplorePhase::FlyToTarget:
            if (any_contact) {
                begin_follow(ExplorePhase::Decide);
            } else if ((target_ - pose.position()).norm() < cfg_.target_tolerance) {
                leg_start_pos_ = pose.position();
                enter(ExplorePhase::Probe);
            } else {
                out.cmd = fly_toward(target_, pose);
            }
            break;

        case ExplorePhase::Probe:
            if (any_contact) {
                exit_hypothesis_ = false;
                begin_follow(ExplorePhase::Decide);
            } else if ((pose.position() - leg_start_pos_).norm() > cfg_.probe_distance) {
                add_point(pose.position(), -1.0); // free space past the contour
                if (exit_hypothesis_) {
                    exit_declared_ = true;
                    leg_start_pos_ = pose.position();
                    enter(ExplorePhase::ExitDash);
                } else {
                    enter(ExplorePhase::Decide);
                }
            } else {
                out.cmd.v_forward = 0.5 * cfg_.fsm.v_max;
            }
            break;

        case ExplorePhase::ExitDash:
            if (any_contact) {
                // not an opening after all
                exit_declared_ = false;
                exit_hypothesis_ = false;
                begin_follow(ExplorePhase::Decide);
            } else if ((pose.position() - leg_start_pos_).norm() > cfg_.exit_dash) {
                enter(ExplorePhase::Land);
            } else {
                out.cmd.v_forward = cfg_.fsm.v_max;
            }
            break;

        case ExplorePhase::Land:
            out.wants_land = true;
            break;
    }

    out.phase = phase_;
    out.substate = substate_;
    if (phase_ == ExplorePhase::Land) out.wants_land = true;

    out.cmd.v_forward = std::clamp(out.cmd.v_forward, -cfg_.fsm.v_max, cfg_.fsm.v_max);
    out.cmd.v_side = std::clamp(out.cmd.v_side, -cfg_.fsm.v_max, cfg_.fsm.v_max);
    out.cmd.yaw_rate = std::clamp(out.cmd.yaw_rate, -cfg_.fsm.omega_max, cfg_.fsm.omega_max);
    return out;
}

// ---------------------------------------------------------------------------

NavigateController::NavigateController(FsmConfig cfg, NavigateGoal goal)
    : cfg_(cfg), goal_(goal) {}

NavigateController::Decision NavigateController::step(const Pose2& pose,
                                                      std::optional<double> d_l,
                                                      std::optional<double> d_r,
                                                      bool contact_l, bool contact_r) {
    if ((pose.position() - goal_.point).norm() < goal_.radius) {
        state_.mission = MissionState::Landing;
        state_.substate = FollowSubstate::None;
    }
    auto [next, cmd] = fsm_step(state_, d_l, d_r, contact_l, contact_r, cfg_);
    state_ = next;
    Decision out;
    out.cmd = cmd;
    out.state = state_;
    out.wants_land = state_.mission == MissionState::Landing;
    return out;
}

} // namespace whisker
