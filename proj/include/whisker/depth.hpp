#pragma once

#include <array>
#include <optional>
#include <string>

#include "whisker/geom.hpp"
#include "whisker/mlp.hpp"

namespace whisker {

// Per-channel standardization fitted on training data.
struct Normalizer {
    std::array<double, 3> mu{0.0, 0.0, 0.0};
    std::array<double, 3> sigma{1.0, 1.0, 1.0};

    std::array<double, 3> normalize(const std::array<double, 3>& s_p) const;
    std::array<double, 3> denormalize(const std::array<double, 3>& s_n) const;

    static Normalizer fit(const Eigen::MatrixXd& channels); // samples x 3
};

// Wall orientation in the drone frame from the two whisker depths.
inline double wall_angle_from_depths(double d_l, double d_r, double separation) {
    return std::atan((d_l - d_r) / separation);
}

// Wall orientation conventions:
//   theta_wall_W is the world angle of the normal pointing from the drone
//   toward the wall; theta_wall_D = yaw - theta_wall_W. Facing the wall
//   squarely gives theta_wall_D = 0 and forward depth == perpendicular depth.
struct WallState {
    double d_wall = 0.0;       // perpendicular distance, m
    double theta_wall_D = 0.0; // rad, drone frame
    double theta_wall_W = 0.0; // rad, world frame
};

struct OdomDelta {
    double dx = 0.0;
    double dy = 0.0;
    double dpsi = 0.0;
};

// Scalar per-whisker filter state.
struct KfState {
    double d = 0.0;    // fused depth, m
    double P = 1.0;    // variance, m^2
    double Q = 1e-6;   // process noise per step, m^2
    double R = 2.5e-5; // measurement noise, m^2
};

inline KfState kf_predict(KfState s, double d_pred) {
    s.d = d_pred;
    s.P = s.P + s.Q;
    return s;
}

// Predict + scalar measurement update.
KfState kf_step(const KfState& s, double d_pred, double m_meas);

// One-step propagation of a forward-projected depth against a static,
// locally planar wall. Poses are for the point the depth is measured from
// (drone center or a whisker mount). Exact for straight walls.
// Throws grazing_angle when the new heading is near-parallel to the wall.
double process_predict(double d_k, const WallState& wall, const Pose2& pose_k,
                       const Pose2& pose_k1);

enum class EstimatorVariant { MeasurementOnly, KfSimplified, KfFull };

struct EstimatorConfig {
    EstimatorVariant variant = EstimatorVariant::KfFull;
    double separation = 0.05; // whisker baseline s, m
    double q = 1e-6;          // (1 mm)^2
    double r = 2.5e-5;        // (5 mm)^2
    Vec2 mount_left{0.05, 0.025};
    Vec2 mount_right{0.05, -0.025};
    // Drop all estimates after this many consecutive ticks with neither
    // whisker measuring (obstacle cleared). 0 disables.
    int reset_after_lost = 25;
};

struct WhiskerEstimate {
    bool valid = false;
    double d = 0.0;
    double P = 0.0;
};

// Two-whisker fusion coordinator. Measurements are sensor-model outputs,
// present only while the corresponding whisker is in contact; without a
// measurement the filter coasts on the process prediction.
class DepthEstimator {
public:
    explicit DepthEstimator(EstimatorConfig cfg);

    struct Tick {
        WhiskerEstimate left, right;
        WallState wall;
        bool wall_valid = false;
    };

    Tick step(const Pose2& pose, std::optional<double> m_left,
              std::optional<double> m_right);
    void reset();

    const EstimatorConfig& config() const { return cfg_; }

private:
    Pose2 mount_pose(const Pose2& pose, const Vec2& offset) const;

    EstimatorConfig cfg_;
    std::optional<Pose2> prev_pose_;
    KfState left_{}, right_{};
    bool left_valid_ = false, right_valid_ = false;
    std::optional<double> wall_normal_world_;
    int lost_ticks_ = 0;
};

// Persisted sensor model: normalizer + MLP, JSON with row-major weights.
struct DepthModel {
    Normalizer normalizer;
    MlpModel mlp;

    double predict(const std::array<double, 3>& s_p) const;

    std::string to_json() const;
    static DepthModel from_json(const std::string& text);
    void save(const std::string& path) const;
    static DepthModel load(const std::string& path);
};

} // namespace whisker
