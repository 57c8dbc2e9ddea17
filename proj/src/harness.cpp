#include "whisker/harness.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace whisker {

namespace {

double uniform_in(const CounterRng& rng, uint64_t counter, double lo, double hi) {
    return lo + (hi - lo) * rng.uniform(counter);
}

struct Accum {
    double abs = 0.0, sq = 0.0;
    int64_t n = 0;
    void add(double e) {
        abs += std::abs(e);
        sq += e * e;
        ++n;
    }
    MetricPair metric() const {
        MetricPair m;
        if (n > 0) {
            m.mae = abs / static_cast<double>(n);
            m.rmse = std::sqrt(sq / static_cast<double>(n));
        }
        return m;
    }
};

void mean_std(const std::vector<double>& xs, double& mean, double& sd) {
    mean = 0.0;
    sd = 0.0;
    if (xs.empty()) return;
    for (double x : xs) mean += x;
    mean /= static_cast<double>(xs.size());
    if (xs.size() < 2) return;
    double acc = 0.0;
    for (double x : xs) acc += (x - mean) * (x - mean);
    sd = std::sqrt(acc / static_cast<double>(xs.size() - 1));
}

} // namespace

// ---------------------------------------------------------------------------

SweepDataset gen_sweep_dataset(const SweepConfig& cfg, uint64_t seed) {
    if (cfg.noise.mode != SensorMode::Barometric) {
        fail("bad_config", "sweep datasets use the barometric sensor mode");
    }
    SweepDataset ds;

    for (int f = 0; f < cfg.flights; ++f) {
        const uint64_t fseed = derive_seed(seed, "flight", static_cast<uint64_t>(f));
        const CounterRng rng{fseed, fnv1a("sweep_setup")};

        const double dist = uniform_in(rng, 0, cfg.wall_distance_min, cfg.wall_distance_max);
        const double tilt = uniform_in(rng, 1, -cfg.wall_tilt_range, cfg.wall_tilt_range);
        const double stop_depth = uniform_in(rng, 2, cfg.stop_depth_min, cfg.stop_depth_max);
        const double wobble_phase = uniform_in(rng, 3, 0.0, 2.0 * kPi);

        const double dir_angle = 0.5 * kPi + tilt;
        const Vec2 center{dist, 0.0};
        const Vec2 dir{std::cos(dir_angle), std::sin(dir_angle)};
        Segment2 wall{center - 1.5 * dir, center + 1.5 * dir, "sweep_wall"};

        World world;
        world.segments.push_back(wall);
        world.compute_bounds();

        SweepDataset::FlightMeta meta;
        meta.id = f;
        meta.train = f < cfg.train_flights;
        meta.wall = wall;
        meta.seed = fseed;
        ds.flights.push_back(meta);

        SignalPipeline pipe_l(cfg.pipeline), pipe_r(cfg.pipeline);
        BaroSynth synth_l(cfg.noise, cfg.whisker, derive_seed(fseed, "baro", 0), 0);
        BaroSynth synth_r(cfg.noise, cfg.whisker, derive_seed(fseed, "baro", 1), 1);

        SimClock clock{0, cfg.dt};
        Pose2 pose{0.0, 0.0, 0.0};
        const int hover_ticks = cfg.pipeline.window + 10;
        const int sweep_ticks = static_cast<int>(cfg.sweep_seconds / cfg.dt);
        enum class Phase { Hover, Approach, Sweep } phase = Phase::Hover;
        int sweep_done = 0;

        while (sweep_done < sweep_ticks && clock.tick < 20000) {
            const auto gt_l = whisker_contact(world, pose, cfg.geom, cfg.whisker,
                                              WhiskerSide::Left);
            const auto gt_r = whisker_contact(world, pose, cfg.geom, cfg.whisker,
                                              WhiskerSide::Right);
            const auto raw_l = synth_l.sample(
                gt_l ? std::optional(gt_l->depth) : std::nullopt, clock);
            const auto raw_r = synth_r.sample(
                gt_r ? std::optional(gt_r->depth) : std::nullopt, clock);
            const auto out_l = pipe_l.step(raw_l);
            const auto out_r = pipe_r.step(raw_r);

            VelocityCmd cmd;
            switch (phase) {
                case Phase::Hover:
                    if (clock.tick >= hover_ticks) phase = Phase::Approach;
                    break;
                case Phase::Approach: {
                    const double d_now = std::min(
                        gt_l ? gt_l->depth : std::numeric_limits<double>::infinity(),
                        gt_r ? gt_r->depth : std::numeric_limits<double>::infinity());
                    if (d_now <= stop_depth) {
                        phase = Phase::Sweep;
                    } else {
                        cmd.v_forward = cfg.approach_speed;
                    }
                    break;
                }
                case Phase::Sweep: {
                    const double ts = static_cast<double>(sweep_done) * cfg.dt;
                    cmd.v_side = -cfg.sweep_speed; // lateral right
                    cmd.v_forward = cfg.forward_wobble *
                                    std::sin(2.0 * kPi * cfg.wobble_hz * ts + wobble_phase);
                    SweepSample row;
                    row.flight = f;
                    row.tick = clock.tick;
                    row.pose = pose;
                    row.sp_l = out_l.s_p;
                    row.sp_r = out_r.s_p;
                    row.contact_l = out_l.calibrated && out_l.contact;
                    row.contact_r = out_r.calibrated && out_r.contact;
                    if (gt_l) row.d_l_gt = gt_l->depth;
                    if (gt_r) row.d_r_gt = gt_r->depth;
                    ds.samples.push_back(row);
                    ++sweep_done;
                    break;
                }
            }

            const StepResult step =
                integrate_step(world, pose, cmd, cfg.dt, cfg.geom.body_radius);
            if (step.collision) break;
            pose = step.pose;
            ++clock.tick;
        }
    }
    return ds;
}

void SweepDataset::save(const std::string& dir) const {
    namespace fs = std::filesystem;
    fs::create_directories(dir);

    nlohmann::json meta;
    meta["flights"] = nlohmann::json::array();
    for (const auto& f : flights) {
        nlohmann::json jf;
        jf["id"] = f.id;
        jf["train"] = f.train;
        jf["seed"] = f.seed;
        jf["wall"]["a"] = {f.wall.a.x(), f.wall.a.y()};
        jf["wall"]["b"] = {f.wall.b.x(), f.wall.b.y()};
        meta["flights"].push_back(jf);
    }
    std::ofstream mf(dir + "/meta.json");
    if (!mf) fail("io_error", "cannot write " + dir + "/meta.json");
    mf << meta.dump(2) << '\n';

    std::ofstream df(dir + "/data.csv");
    if (!df) fail("io_error", "cannot write " + dir + "/data.csv");
    df << "flight,tick,x,y,yaw,spl1,spl2,spl3,spr1,spr2,spr3,"
          "contact_l,contact_r,d_l_gt,d_r_gt\n";
    char buf[512];
    for (const auto& s : samples) {
        std::snprintf(buf, sizeof(buf),
                      "%d,%lld,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,"
                      "%.12g,%d,%d,%.12g,%.12g\n",
                      s.flight, static_cast<long long>(s.tick), s.pose.x, s.pose.y,
                      s.pose.yaw, s.sp_l[0], s.sp_l[1], s.sp_l[2], s.sp_r[0],
                      s.sp_r[1], s.sp_r[2], s.contact_l ? 1 : 0, s.contact_r ? 1 : 0,
                      s.d_l_gt, s.d_r_gt);
        df << buf;
    }
}

SweepDataset SweepDataset::load(const std::string& dir) {
    SweepDataset ds;
    std::ifstream mf(dir + "/meta.json");
    if (!mf) fail("io_error", "cannot read " + dir + "/meta.json");
    nlohmann::json meta = nlohmann::json::parse(mf);
    for (const auto& jf : meta.at("flights")) {
        FlightMeta f;
        f.id = jf.at("id").get<int>();
        f.train = jf.at("train").get<bool>();
        f.seed = jf.at("seed").get<uint64_t>();
        f.wall.a = Vec2{jf.at("wall").at("a").at(0).get<double>(),
                        jf.at("wall").at("a").at(1).get<double>()};
        f.wall.b = Vec2{jf.at("wall").at("b").at(0).get<double>(),
                        jf.at("wall").at("b").at(1).get<double>()};
        ds.flights.push_back(f);
    }

    std::ifstream df(dir + "/data.csv");
    if (!df) fail("io_error", "cannot read " + dir + "/data.csv");
    std::string line;
    std::getline(df, line); // header
    while (std::getline(df, line)) {
        if (line.empty()) continue;
        SweepSample s;
        long long tick = 0;
        int cl = 0, cr = 0;
        const int got = std::sscanf(
            line.c_str(),
            "%d,%lld,%lf,%lf,%lf,%lf,%lf,%lf,%lf,%lf,%lf,%d,%d,%lf,%lf",
            &s.flight, &tick, &s.pose.x, &s.pose.y, &s.pose.yaw, &s.sp_l[0],
            &s.sp_l[1], &s.sp_l[2], &s.sp_r[0], &s.sp_r[1], &s.sp_r[2], &cl, &cr,
            &s.d_l_gt, &s.d_r_gt);
        if (got != 15) fail("bad_dataset", "malformed dataset row");
        s.tick = tick;
        s.contact_l = cl != 0;
        s.contact_r = cr != 0;
        ds.samples.push_back(s);
    }
    return ds;
}

DepthTrainReport train_depth_model(const SweepDataset& ds,
                                   const std::vector<int>& arch,
                                   const TrainConfig& cfg) {
    std::vector<std::array<double, 3>> rows;
    std::vector<double> labels;
    for (const auto& s : ds.samples) {
        const bool train = ds.flights[static_cast<size_t>(s.flight)].train;
        if (!train) continue;
        if (s.contact_l && std::isfinite(s.d_l_gt)) {
            rows.push_back(s.sp_l);
            labels.push_back(s.d_l_gt);
        }
        if (s.contact_r && std::isfinite(s.d_r_gt)) {
            rows.push_back(s.sp_r);
            labels.push_back(s.d_r_gt);
        }
    }
    if (rows.size() < 10) fail("empty_dataset", "not enough in-contact samples");

    Eigen::MatrixXd channels(static_cast<Eigen::Index>(rows.size()), 3);
    Eigen::VectorXd y(static_cast<Eigen::Index>(rows.size()));
    for (size_t i = 0; i < rows.size(); ++i) {
        for (int c = 0; c < 3; ++c) {
            channels(static_cast<Eigen::Index>(i), c) = rows[i][static_cast<size_t>(c)];
        }
        y(static_cast<Eigen::Index>(i)) = labels[i];
    }

    DepthTrainReport report;
    report.model.normalizer = Normalizer::fit(channels);
    Eigen::MatrixXd x_norm = channels;
    for (int c = 0; c < 3; ++c) {
        x_norm.col(c) = (channels.col(c).array() -
                         report.model.normalizer.mu[static_cast<size_t>(c)]) /
                        report.model.normalizer.sigma[static_cast<size_t>(c)];
    }

    const TrainResult tr = mlp_train(x_norm, y, arch, cfg);
    report.model.mlp = tr.model;
    report.train_mse = tr.final_mse;
    report.epochs_run = tr.epochs_run;
    report.converged = tr.converged;
    report.samples = static_cast<int>(rows.size());
    return report;
}

MetricsReport eval_depth(const SweepDataset& ds, const DepthModel& model,
                         EstimatorVariant variant, const EstimatorConfig& base_cfg) {
    MetricsReport rep;
    Accum left, right, orient, recon;

    for (const auto& flight : ds.flights) {
        if (flight.train) continue;

        EstimatorConfig ec = base_cfg;
        ec.variant = variant;
        DepthEstimator est(ec);

        for (const auto& s : ds.samples) {
            if (s.flight != flight.id) continue;
            std::optional<double> m_l, m_r;
            if (s.contact_l) m_l = model.predict(s.sp_l);
            if (s.contact_r) m_r = model.predict(s.sp_r);
            const auto tick = est.step(s.pose, m_l, m_r);

            const Vec2 h = s.pose.heading();
            if (s.contact_l && tick.left.valid && std::isfinite(s.d_l_gt)) {
                left.add((tick.left.d - s.d_l_gt) * 1000.0);
                const Vec2 p = body_to_world(ec.mount_left, s.pose) + tick.left.d * h;
                recon.add(point_segment_distance(p, flight.wall) * 1000.0);
            }
            if (s.contact_r && tick.right.valid && std::isfinite(s.d_r_gt)) {
                right.add((tick.right.d - s.d_r_gt) * 1000.0);
                const Vec2 p = body_to_world(ec.mount_right, s.pose) + tick.right.d * h;
                recon.add(point_segment_distance(p, flight.wall) * 1000.0);
            }
            if (tick.wall_valid && std::isfinite(s.d_l_gt) && std::isfinite(s.d_r_gt)) {
                const double gt_theta =
                    wall_angle_from_depths(s.d_l_gt, s.d_r_gt, ec.separation);
                orient.add(rad2deg(tick.wall.theta_wall_D - gt_theta));
            }
        }
    }

    rep.whisker_left = left.metric();
    rep.whisker_right = right.metric();
    rep.orientation_deg = orient.metric();
    rep.reconstruction = recon.metric();
    rep.samples = left.n + right.n;
    return rep;
}

namespace {
nlohmann::json metric_json(const MetricsReport& r) {
    nlohmann::json j;
    j["whisker_left"] = {{"mae", r.whisker_left.mae}, {"rmse", r.whisker_left.rmse}};
    j["whisker_right"] = {{"mae", r.whisker_right.mae}, {"rmse", r.whisker_right.rmse}};
    j["orientation_deg"] = {{"mae", r.orientation_deg.mae},
                            {"rmse", r.orientation_deg.rmse}};
    j["reconstruction"] = {{"mae", r.reconstruction.mae},
                           {"rmse", r.reconstruction.rmse}};
    j["samples"] = r.samples;
    return j;
}
} // namespace

std::string metrics_to_json(const std::map<std::string, MetricsReport>& by_variant) {
    nlohmann::json j;
    for (const auto& [name, rep] : by_variant) j[name] = metric_json(rep);
    return j.dump(2);
}

std::string metrics_to_csv(const std::map<std::string, MetricsReport>& by_variant) {
    std::ostringstream os;
    os << "variant,category,mae,rmse\n";
    for (const auto& [name, rep] : by_variant) {
        const auto row = [&](const char* cat, const MetricPair& m) {
            os << name << ',' << cat << ',' << m.mae << ',' << m.rmse << '\n';
        };
        row("whisker_left_mm", rep.whisker_left);
        row("whisker_right_mm", rep.whisker_right);
        row("orientation_deg", rep.orientation_deg);
        row("reconstruction_mm", rep.reconstruction);
    }
    return os.str();
}

// ---------------------------------------------------------------------------

CampaignReport run_campaign(const CampaignConfig& cfg) {
    if (cfg.seeds.empty()) fail("bad_config", "campaign needs at least one seed");
    CampaignReport rep;
    rep.episodes.resize(cfg.seeds.size());

    const Vec2 pivot = 0.5 * (cfg.world.bounds_min + cfg.world.bounds_max);
    const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(cfg.seeds.size());

#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic) if (cfg.exec == Exec::Parallel && n > 1)
#endif
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        const uint64_t seed = cfg.seeds[static_cast<size_t>(i)];
        World w = cfg.world;
        if (cfg.rotate_room) {
            const CounterRng rng{derive_seed(seed, "room_rotation"), 0};
            w = cfg.world.rotated(rng.uniform(0) * 2.0 * kPi, pivot);
        }
        rep.episodes[static_cast<size_t>(i)] =
            CampaignReport::PerSeed{seed, run_episode(w, cfg.mission, seed)};
    }

    std::vector<double> travel, recon;
    for (const auto& e : rep.episodes) {
        if (e.result.exit_found) ++rep.exits_found;
        travel.push_back(e.result.travel_m);
        recon.push_back(e.result.recon_mae_m);
    }
    mean_std(travel, rep.travel_mean, rep.travel_std);
    mean_std(recon, rep.recon_mean, rep.recon_std);
    return rep;
}

std::string campaign_to_json(const CampaignReport& report) {
    nlohmann::json j;
    j["episodes"] = nlohmann::json::array();
    for (const auto& e : report.episodes) {
        nlohmann::json je;
        je["seed"] = e.seed;
        je["outcome"] = e.result.outcome;
        je["exit_found"] = e.result.exit_found;
        je["collision"] = e.result.collision;
        je["travel_m"] = e.result.travel_m;
        je["recon_mae_m"] = e.result.recon_mae_m;
        je["recon_rmse_m"] = e.result.recon_rmse_m;
        je["ticks"] = e.result.ticks;
        j["episodes"].push_back(je);
    }
    j["exits_found"] = report.exits_found;
    j["trials"] = report.episodes.size();
    j["travel_m"] = {{"mean", report.travel_mean}, {"std", report.travel_std}};
    j["recon_mae_m"] = {{"mean", report.recon_mean}, {"std", report.recon_std}};
    return j.dump(2);
}

// ---------------------------------------------------------------------------

std::vector<std::array<double, 3>> synth_free_flight_trace(const TraceParams& p,
                                                           uint64_t seed) {
    const int ticks = static_cast<int>(p.seconds / p.dt);
    std::vector<std::array<double, 3>> trace(static_cast<size_t>(ticks));
    const std::array<double, 3> ring_gain{1.0, 0.7, -0.5};

    std::array<double, 3> walk{0.0, 0.0, 0.0};
    for (int k = 0; k < ticks; ++k) {
        const double t = k * p.dt;
        double ring = 0.0;
        if (p.ring_interval > 0.0 && t >= p.ring_interval) {
            const double t0 =
                std::floor(t / p.ring_interval) * p.ring_interval;
            const double dt_on = t - t0;
            if (dt_on * p.ring_damping < 30.0) {
                ring = p.ring_amp * std::exp(-p.ring_damping * dt_on) *
                       std::sin(2.0 * kPi * p.ring_freq * dt_on);
            }
        }
        for (int ch = 0; ch < 3; ++ch) {
            const CounterRng rng{seed, static_cast<uint64_t>(ch)};
            walk[static_cast<size_t>(ch)] +=
                p.walk_sigma * std::sqrt(p.dt) * rng.gaussian(static_cast<uint64_t>(k), 0);
            trace[static_cast<size_t>(k)][static_cast<size_t>(ch)] =
                p.drift_rate * t + walk[static_cast<size_t>(ch)] +
                p.white_sigma * rng.gaussian(static_cast<uint64_t>(k), 1) +
                ring_gain[static_cast<size_t>(ch)] * ring;
        }
    }
    return trace;
}

std::vector<uint8_t> pipeline_contacts(const std::vector<std::array<double, 3>>& trace,
                                       PipelineConfig cfg) {
    SignalPipeline pipe(cfg);
    std::vector<uint8_t> contacts;
    contacts.reserve(trace.size());
    for (const auto& s : trace) {
        contacts.push_back(pipe.step(s).contact ? 1 : 0);
    }
    return contacts;
}

FprReport evaluate_trace_fpr(const std::vector<std::array<double, 3>>& trace,
                             PipelineConfig base) {
    const std::vector<uint8_t> free(trace.size(), 1);
    FprReport rep;
    const auto run = [&](PipelineMode mode) {
        PipelineConfig cfg = base;
        cfg.mode = mode;
        const auto contacts = pipeline_contacts(trace, cfg);
        return fpr(contacts, free);
    };
    rep.raw = run(PipelineMode::Raw);
    rep.bandpass = run(PipelineMode::Bandpass);
    rep.tdoc = run(PipelineMode::Tdoc);
    rep.tdorc = run(PipelineMode::Tdorc);
    return rep;
}

std::vector<std::array<double, 3>> load_trace_csv(const std::string& path) {
    std::ifstream f(path);
    if (!f) fail("io_error", "cannot read " + path);
    std::vector<std::array<double, 3>> trace;
    std::string line;
    std::getline(f, line); // header
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        double t = 0.0;
        std::array<double, 3> ch{};
        if (std::sscanf(line.c_str(), "%lf,%lf,%lf,%lf", &t, &ch[0], &ch[1], &ch[2]) != 4) {
            fail("bad_trace", "malformed trace row");
        }
        trace.push_back(ch);
    }
    return trace;
}

void save_trace_csv(const std::string& path,
                    const std::vector<std::array<double, 3>>& trace) {
    std::ofstream f(path);
    if (!f) fail("io_error", "cannot write " + path);
    f << "t,ch1,ch2,ch3\n";
    char buf[160];
    for (size_t i = 0; i < trace.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%zu,%.12g,%.12g,%.12g\n", i, trace[i][0],
                      trace[i][1], trace[i][2]);
        f << buf;
    }
}

void save_processed_trace_csv(const std::string& path,
                              const std::vector<std::array<double, 3>>& trace,
                              PipelineConfig cfg) {
    std::ofstream f(path);
    if (!f) fail("io_error", "cannot write " + path);
    f << "t,ch1,ch2,ch3,sc1,sc2,sc3,sp1,sp2,sp3,contact\n";
    SignalPipeline pipe(cfg);
    char buf[320];
    for (size_t i = 0; i < trace.size(); ++i) {
        const auto out = pipe.step(trace[i]);
        std::snprintf(buf, sizeof(buf),
                      "%zu,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%d\n",
                      i, trace[i][0], trace[i][1], trace[i][2], out.s_c[0],
                      out.s_c[1], out.s_c[2], out.s_p[0], out.s_p[1], out.s_p[2],
                      out.contact ? 1 : 0);
        f << buf;
    }
}

// ---------------------------------------------------------------------------

MemoryReport embedded_memory_report(const GpisHyper& hyper, int grid_nx,
                                    int grid_ny, const std::vector<int>& arch) {
    constexpr size_t kScalar = 4; // 32-bit floats on the target MCU
    const size_t cap = static_cast<size_t>(hyper.cap);
    const size_t cells = static_cast<size_t>(grid_nx - 1) * static_cast<size_t>(grid_ny - 1);
    const size_t corners = static_cast<size_t>(grid_nx) * static_cast<size_t>(grid_ny);

    MemoryReport rep;
    rep.gpis_bytes = kScalar * (cap * 2      // training points
                                + cap        // labels
                                + cap * cap  // SPD factor
                                + cap        // alpha
                                + 2 * cap    // query scratch (k-vector, solve)
                                + 2 * corners // posterior mean + variance grids
                                + 2 * cells * 3 // contour points + curvature, worst case
                                + 16 * 2);   // corner centroids
    size_t params = 0, acts = 0;
    for (size_t k = 0; k + 1 < arch.size(); ++k) {
        params += static_cast<size_t>(arch[k]) * static_cast<size_t>(arch[k + 1]) +
                  static_cast<size_t>(arch[k + 1]);
        acts += static_cast<size_t>(arch[k + 1]);
    }
    rep.estimator_bytes = kScalar * (params + acts   // network + activations
                                     + 6             // normalizer
                                     + 2 * 4         // two KF states
                                     + 3 + 3);       // wall state + odometry
    rep.total_bytes = rep.gpis_bytes + rep.estimator_bytes;
    return rep;
}

// ---------------------------------------------------------------------------

uint64_t file_content_hash(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) fail("io_error", "cannot read " + path);
    uint64_t h = 0xCBF29CE484222325ULL;
    char buf[4096];
    while (f.read(buf, sizeof(buf)) || f.gcount() > 0) {
        h = fnv1a(std::string_view(buf, static_cast<size_t>(f.gcount())), h);
    }
    return h;
}

void write_manifest(const std::string& out_dir, const std::string& subcommand,
                    const std::string& config_json,
                    const std::vector<uint64_t>& seeds,
                    const std::vector<std::string>& inputs,
                    const std::vector<std::string>& outputs) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    nlohmann::json j;
    j["subcommand"] = subcommand;
    j["config"] = nlohmann::json::parse(config_json);
    char hex[32];
    std::snprintf(hex, sizeof(hex), "%016llx",
                  static_cast<unsigned long long>(fnv1a(config_json)));
    j["config_hash"] = hex;
    j["seeds"] = seeds;
    j["inputs"] = nlohmann::json::object();
    for (const auto& in : inputs) {
        std::snprintf(hex, sizeof(hex), "%016llx",
                      static_cast<unsigned long long>(file_content_hash(in)));
        j["inputs"][in] = hex;
    }
    j["outputs"] = outputs;
    std::ofstream f(out_dir + "/manifest.json");
    if (!f) fail("io_error", "cannot write manifest");
    f << j.dump(2) << '\n';
}

std::string snapshot_to_json(const GpisSnapshot& snap) {
    nlohmann::json j;
    j["index"] = snap.index;
    j["training"] = nlohmann::json::array();
    for (const auto& tp : snap.training) {
        j["training"].push_back({{"p", {tp.p.x(), tp.p.y()}},
                                 {"label", tp.label},
                                 {"tick", tp.tick}});
    }
    j["hyper"] = {{"kernel_scale", snap.hyper.kernel_scale},
                  {"kernel_beta", snap.hyper.kernel_beta},
                  {"noise_var", snap.hyper.noise_var},
                  {"cap", snap.hyper.cap}};
    j["grid"] = {{"origin", {snap.grid.origin.x(), snap.grid.origin.y()}},
                 {"spacing", snap.grid.spacing},
                 {"nx", snap.grid.nx},
                 {"ny", snap.grid.ny},
                 {"mean", snap.grid.values},
                 {"variance", snap.variance}};
    j["contours"] = nlohmann::json::array();
    for (const auto& c : snap.contours) {
        nlohmann::json jc;
        jc["closed"] = c.closed;
        jc["points"] = nlohmann::json::array();
        for (const auto& p : c.points) jc["points"].push_back({p.x(), p.y()});
        j["contours"].push_back(jc);
    }
    j["corners"] = nlohmann::json::array();
    for (const auto& c : snap.corners) j["corners"].push_back({c.x(), c.y()});
    j["target"] = {{"index", snap.target.index},
                   {"point", {snap.target.point.x(), snap.target.point.y()}},
                   {"variance", snap.target.variance},
                   {"penalty", snap.target.penalty},
                   {"score", snap.target.score}};
    j["exit_hypothesis"] = snap.exit_hypothesis;
    return j.dump(2);
}

} // namespace whisker
