#include <cmath>
#include <cstdio>

#include "whisker/sim.hpp"

namespace whisker {

namespace {

double cross2(const Vec2& u, const Vec2& v) {
    return u.x() * v.y() - u.y() * v.x();
}

bool segments_cross(const Vec2& p1, const Vec2& p2, const Segment2& s) {
    const double d1 = cross2(s.b - s.a, p1 - s.a);
    const double d2 = cross2(s.b - s.a, p2 - s.a);
    const double d3 = cross2(p2 - p1, s.a - p1);
    const double d4 = cross2(p2 - p1, s.b - p1);
    return ((d1 > 0.0) != (d2 > 0.0)) && ((d3 > 0.0) != (d4 > 0.0));
}

void append_num(std::string& out, double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    out += buf;
}

double min_wall_distance(const World& world, const Vec2& p) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& seg : world.segments) {
        best = std::min(best, point_segment_distance(p, seg));
    }
    return best;
}

} // namespace

EpisodeResult run_episode(const World& world, const MissionConfig& cfg,
                          uint64_t seed) {
    EpisodeResult result;
    const bool explore = cfg.kind == "explore";
    if (!explore && cfg.kind != "navigate") {
        fail("bad_config", "unknown mission kind: " + cfg.kind);
    }
    if (cfg.noise.mode == SensorMode::Barometric && !cfg.depth_model) {
        fail("bad_config", "barometric mission needs a depth model");
    }

    SimClock clock{0, cfg.dt};
    Pose2 pose = cfg.start;

    EstimatorConfig est_cfg = cfg.estimator;
    est_cfg.mount_left = cfg.geom.mount_left;
    est_cfg.mount_right = cfg.geom.mount_right;
    DepthEstimator estimator(est_cfg);

    ExploreConfig ex_cfg = cfg.explore;
    ex_cfg.dt = cfg.dt;
    ex_cfg.fsm = cfg.fsm;
    ExplorationController explorer(ex_cfg, pose);
    NavigateController navigator(cfg.fsm, cfg.goal);
    if (explore && cfg.record_snapshots) {
        explorer.on_snapshot = [&result](const GpisSnapshot& s) {
            result.snapshots.push_back(s);
        };
    }

    SignalPipeline pipe_l(cfg.pipeline), pipe_r(cfg.pipeline);
    BaroSynth synth_l(cfg.noise, cfg.whisker, derive_seed(seed, "baro", 0), 0);
    BaroSynth synth_r(cfg.noise, cfg.whisker, derive_seed(seed, "baro", 1), 1);
    const CounterRng range_l{derive_seed(seed, "range", 0), 0};
    const CounterRng range_r{derive_seed(seed, "range", 1), 0};

    std::string& csv = result.telemetry_csv;
    csv = "tick,x,y,yaw,mode,substate,contact_l,contact_r,meas_l,meas_r,"
          "d_l,d_r,v_forward,v_side,yaw_rate\n";

    double recon_abs = 0.0, recon_sq = 0.0;
    int64_t recon_n = 0;
    int64_t contact_ticks = 0, in_band_ticks = 0;
    bool landed = false;

    for (; clock.tick < cfg.max_ticks; ++clock.tick) {
        const auto gt_l = whisker_contact(world, pose, cfg.geom, cfg.whisker,
                                          WhiskerSide::Left);
        const auto gt_r = whisker_contact(world, pose, cfg.geom, cfg.whisker,
                                          WhiskerSide::Right);

        bool contact_l = false, contact_r = false;
        std::optional<double> m_l, m_r;
        if (cfg.noise.mode == SensorMode::IdealRange) {
            m_l = ideal_range_sample(gt_l ? std::optional(gt_l->depth) : std::nullopt,
                                     cfg.noise.range_sigma, range_l, clock.tick);
            m_r = ideal_range_sample(gt_r ? std::optional(gt_r->depth) : std::nullopt,
                                     cfg.noise.range_sigma, range_r, clock.tick);
            contact_l = m_l.has_value();
            contact_r = m_r.has_value();
        } else {
            const auto raw_l = synth_l.sample(
                gt_l ? std::optional(gt_l->depth) : std::nullopt, clock);
            const auto raw_r = synth_r.sample(
                gt_r ? std::optional(gt_r->depth) : std::nullopt, clock);
            const auto out_l = pipe_l.step(raw_l);
            const auto out_r = pipe_r.step(raw_r);
            contact_l = out_l.calibrated && out_l.contact;
            contact_r = out_r.calibrated && out_r.contact;
            if (contact_l) m_l = cfg.depth_model->predict(out_l.s_p);
            if (contact_r) m_r = cfg.depth_model->predict(out_r.s_p);
        }

        const auto est = estimator.step(pose, m_l, m_r);
        const std::optional<double> d_l =
            (contact_l && est.left.valid) ? std::optional(est.left.d) : std::nullopt;
        const std::optional<double> d_r =
            (contact_r && est.right.valid) ? std::optional(est.right.d) : std::nullopt;

        VelocityCmd cmd;
        const char* mode_str = "";
        const char* sub_str = "";
        bool wants_land = false;
        if (explore) {
            const auto dec = explorer.step(
                pose, d_l, d_r, contact_l, contact_r,
                body_to_world(cfg.geom.mount_left, pose),
                body_to_world(cfg.geom.mount_right, pose));
            cmd = dec.cmd;
            mode_str = to_string(dec.phase);
            sub_str = to_string(dec.substate);
            wants_land = dec.wants_land;
        } else {
            const auto dec = navigator.step(pose, d_l, d_r, contact_l, contact_r);
            cmd = dec.cmd;
            mode_str = to_string(dec.state.mission);
            sub_str = to_string(dec.state.substate);
            wants_land = dec.wants_land;
            if (dec.state.mission == MissionState::Landing) result.goal_reached = true;
        }

        // reconstruction metric: estimated contact points vs true walls
        const Vec2 h = pose.heading();
        if (d_l) {
            const Vec2 p = body_to_world(cfg.geom.mount_left, pose) + *d_l * h;
            const double e = min_wall_distance(world, p);
            recon_abs += e;
            recon_sq += e * e;
            ++recon_n;
        }
        if (d_r) {
            const Vec2 p = body_to_world(cfg.geom.mount_right, pose) + *d_r * h;
            const double e = min_wall_distance(world, p);
            recon_abs += e;
            recon_sq += e * e;
            ++recon_n;
        }
        if (d_l || d_r) {
            ++contact_ticks;
            bool in_band = true;
            if (d_l && (*d_l < cfg.fsm.d_min || *d_l > cfg.fsm.d_max)) in_band = false;
            if (d_r && (*d_r < cfg.fsm.d_min || *d_r > cfg.fsm.d_max)) in_band = false;
            if (in_band) ++in_band_ticks;
        }

        // telemetry row
        append_num(csv, static_cast<double>(clock.tick));
        csv += ',';
        append_num(csv, pose.x);
        csv += ',';
        append_num(csv, pose.y);
        csv += ',';
        append_num(csv, pose.yaw);
        csv += ',';
        csv += mode_str;
        csv += ',';
        csv += sub_str;
        csv += ',';
        csv += contact_l ? '1' : '0';
        csv += ',';
        csv += contact_r ? '1' : '0';
        csv += ',';
        append_num(csv, m_l.value_or(std::nan("")));
        csv += ',';
        append_num(csv, m_r.value_or(std::nan("")));
        csv += ',';
        append_num(csv, d_l.value_or(std::nan("")));
        csv += ',';
        append_num(csv, d_r.value_or(std::nan("")));
        csv += ',';
        append_num(csv, cmd.v_forward);
        csv += ',';
        append_num(csv, cmd.v_side);
        csv += ',';
        append_num(csv, cmd.yaw_rate);
        csv += '\n';

        const StepResult step = integrate_step(world, pose, cmd, clock.dt,
                                               cfg.geom.body_radius);
        if (step.collision) {
            result.collision = true;
            result.outcome = "collision";
            break;
        }
        result.travel_m += (step.pose.position() - pose.position()).norm();

        for (const auto& exit : world.exits) {
            if (segments_cross(pose.position(), step.pose.position(), exit)) {
                result.exit_found = true;
            }
        }
        pose = step.pose;

        if (wants_land) {
            landed = true;
            break;
        }
    }

    result.ticks = clock.tick;
    if (result.outcome.empty()) {
        if (result.exit_found) result.outcome = "exit";
        else if (result.goal_reached) result.outcome = "goal";
        else if (landed) result.outcome = "landed";
        else {
            result.timed_out = true;
            result.outcome = "timeout";
        }
    }
    if (recon_n > 0) {
        result.recon_mae_m = recon_abs / static_cast<double>(recon_n);
        result.recon_rmse_m = std::sqrt(recon_sq / static_cast<double>(recon_n));
    }
    result.contact_ticks = contact_ticks;
    result.in_band_ticks = in_band_ticks;
    return result;
}

} // namespace whisker
