#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "whisker/sim.hpp"

namespace whisker {

// ---------------------------------------------------------------------------
// Wall-sweep dataset (sensor-model training / estimator evaluation)

struct SweepConfig {
    int flights = 12;
    int train_flights = 9;
    double approach_speed = 0.20;     // m/s
    double sweep_speed = 0.20;        // m/s, lateral right
    double sweep_seconds = 2.0;
    double wall_distance_min = 0.45;  // m, initial wall offset
    double wall_distance_max = 0.70;
    double wall_tilt_range = deg2rad(12.0); // per-flight wall tilt
    double stop_depth_min = 0.055;    // m, approach stop band
    double stop_depth_max = 0.090;
    double forward_wobble = 0.02;     // m/s sinusoidal depth excitation
    double wobble_hz = 0.8;
    double dt = 0.02;
    SensorNoise noise{};              // Barometric by default for datasets
    PipelineConfig pipeline{};
    WhiskerSpec whisker = WhiskerSpec::make_default();
    DroneGeom geom{};

    SweepConfig() { noise.mode = SensorMode::Barometric; }
};

struct SweepSample {
    int flight = 0;
    int64_t tick = 0;
    Pose2 pose{};
    std::array<double, 3> sp_l{0, 0, 0};
    std::array<double, 3> sp_r{0, 0, 0};
    bool contact_l = false; // pipeline contact flag
    bool contact_r = false;
    double d_l_gt = std::numeric_limits<double>::quiet_NaN(); // m, from geometry
    double d_r_gt = std::numeric_limits<double>::quiet_NaN();
};

struct SweepDataset {
    struct FlightMeta {
        int id = 0;
        bool train = true;
        Segment2 wall;
        uint64_t seed = 0;
    };
    std::vector<FlightMeta> flights;
    std::vector<SweepSample> samples;

    void save(const std::string& dir) const; // data.csv + meta.json
    static SweepDataset load(const std::string& dir);
};

SweepDataset gen_sweep_dataset(const SweepConfig& cfg, uint64_t seed);

// Train the shared sensor model on the train split (both whiskers pooled).
struct DepthTrainReport {
    DepthModel model;
    double train_mse = 0.0;
    int epochs_run = 0;
    bool converged = true;
    int samples = 0;
};
DepthTrainReport train_depth_model(const SweepDataset& ds,
                                   const std::vector<int>& arch,
                                   const TrainConfig& cfg);

// ---------------------------------------------------------------------------
// Estimator evaluation on the dataset test split

struct MetricPair {
    double mae = 0.0;
    double rmse = 0.0;
};

struct MetricsReport {
    // category -> metric; depths/reconstruction in mm, orientation in deg
    MetricPair whisker_left, whisker_right, orientation_deg, reconstruction;
    int64_t samples = 0;
};

MetricsReport eval_depth(const SweepDataset& ds, const DepthModel& model,
                         EstimatorVariant variant,
                         const EstimatorConfig& est_cfg = {});

std::string metrics_to_json(const std::map<std::string, MetricsReport>& by_variant);
std::string metrics_to_csv(const std::map<std::string, MetricsReport>& by_variant);

// ---------------------------------------------------------------------------
// Exploration campaign

struct CampaignConfig {
    World world;
    MissionConfig mission{};
    std::vector<uint64_t> seeds;
    bool rotate_room = true; // random room rotation per seed
    Exec exec = Exec::Parallel;
};

struct CampaignReport {
    struct PerSeed {
        uint64_t seed = 0;
        EpisodeResult result;
    };
    std::vector<PerSeed> episodes; // sorted by seed order in config
    int exits_found = 0;
    double travel_mean = 0.0, travel_std = 0.0;
    double recon_mean = 0.0, recon_std = 0.0;
};

CampaignReport run_campaign(const CampaignConfig& cfg);
std::string campaign_to_json(const CampaignReport& report);

// ---------------------------------------------------------------------------
// Synthetic free-flight traces and the pipeline-mode FPR benchmark

struct TraceParams {
    double seconds = 60.0;
    double dt = 0.02;
    double drift_rate = 2.0;       // counts/s
    double walk_sigma = 0.8;       // counts/sqrt(s)
    double white_sigma = 0.8;      // counts
    double ring_amp = 40.0;        // counts, vibration bursts
    double ring_freq = 12.0;       // Hz
    double ring_damping = 6.0;     // 1/s
    double ring_interval = 10.0;   // s between bursts
};

std::vector<std::array<double, 3>> synth_free_flight_trace(const TraceParams& p,
                                                           uint64_t seed);

struct FprReport {
    double raw = 0.0;
    double bandpass = 0.0;
    double tdoc = 0.0;
    double tdorc = 0.0;
};

FprReport evaluate_trace_fpr(const std::vector<std::array<double, 3>>& trace,
                             PipelineConfig base);

// Runs one pipeline over a trace; returns per-tick contact flags.
std::vector<uint8_t> pipeline_contacts(const std::vector<std::array<double, 3>>& trace,
                                       PipelineConfig cfg);

// CSV trace I/O (columns t,ch1,ch2,ch3; output adds s_c*,s_p*,contact)
std::vector<std::array<double, 3>> load_trace_csv(const std::string& path);
void save_trace_csv(const std::string& path,
                    const std::vector<std::array<double, 3>>& trace);
void save_processed_trace_csv(const std::string& path,
                              const std::vector<std::array<double, 3>>& trace,
                              PipelineConfig cfg);

// ---------------------------------------------------------------------------
// Embedded-parity working-set accounting (32-bit scalars)

struct MemoryReport {
    size_t gpis_bytes = 0;
    size_t estimator_bytes = 0;
    size_t total_bytes = 0;
};

MemoryReport embedded_memory_report(const GpisHyper& hyper, int grid_nx,
                                    int grid_ny, const std::vector<int>& arch);

// ---------------------------------------------------------------------------
// Run manifests (config hash, seeds, input hashes) for exact replay

uint64_t file_content_hash(const std::string& path);
void write_manifest(const std::string& out_dir, const std::string& subcommand,
                    const std::string& config_json,
                    const std::vector<uint64_t>& seeds,
                    const std::vector<std::string>& inputs,
                    const std::vector<std::string>& outputs);

std::string snapshot_to_json(const GpisSnapshot& snap);

} // namespace whisker
