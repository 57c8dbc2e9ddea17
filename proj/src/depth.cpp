#include "whisker/depth.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace whisker {

std::array<double, 3> Normalizer::normalize(const std::array<double, 3>& s_p) const {
    std::array<double, 3> out{};
    for (size_t i = 0; i < 3; ++i) {
        if (!(sigma[i] > 0.0)) fail("zero_sigma", "normalizer sigma must be positive");
        out[i] = (s_p[i] - mu[i]) / sigma[i];
    }
    return out;
}

std::array<double, 3> Normalizer::denormalize(const std::array<double, 3>& s_n) const {
    std::array<double, 3> out{};
    for (size_t i = 0; i < 3; ++i) out[i] = s_n[i] * sigma[i] + mu[i];
    return out;
}

Normalizer Normalizer::fit(const Eigen::MatrixXd& channels) {
    if (channels.rows() < 2 || channels.cols() != 3) {
        fail("zero_sigma", "normalizer fit needs >= 2 samples of 3 channels");
    }
    Normalizer n;
    for (int c = 0; c < 3; ++c) {
        const double mean = channels.col(c).mean();
        const double var =
            (channels.col(c).array() - mean).square().sum() /
            static_cast<double>(channels.rows());
        n.mu[static_cast<size_t>(c)] = mean;
        n.sigma[static_cast<size_t>(c)] = std::sqrt(var);
        if (!(n.sigma[static_cast<size_t>(c)] > 0.0)) {
            fail("zero_sigma", "training channel has zero variance");
        }
    }
    return n;
}

KfState kf_step(const KfState& s, double d_pred, double m_meas) {
    KfState out = s;
    const double p_minus = s.P + s.Q;
    const double k = p_minus / (p_minus + s.R);
    out.d = d_pred + k * (m_meas - d_pred);
    out.P = (1.0 - k) * p_minus;
    return out;
}

double process_predict(double d_k, const WallState& wall, const Pose2& pose_k,
                       const Pose2& pose_k1) {
    const double theta_d_k = normalize_angle(pose_k.yaw - wall.theta_wall_W);
    const double theta_d_k1 = normalize_angle(pose_k1.yaw - wall.theta_wall_W);
    const double denom = std::cos(theta_d_k1);
    if (std::abs(denom) < 1e-6) {
        fail("grazing_angle", "heading near-parallel to wall");
    }
    const double dx = pose_k1.x - pose_k.x;
    const double dy = pose_k1.y - pose_k.y;
    const double dp = std::hypot(dx, dy);
    double motion = 0.0;
    if (dp > 0.0) {
        // projection of the displacement onto the toward-wall normal
        motion = -dp * std::cos(std::atan2(dy, dx) - wall.theta_wall_W);
    }
    return (d_k * std::cos(theta_d_k) + motion) / denom;
}

DepthEstimator::DepthEstimator(EstimatorConfig cfg) : cfg_(cfg) {}

void DepthEstimator::reset() {
    prev_pose_.reset();
    left_valid_ = right_valid_ = false;
    wall_normal_world_.reset();
    lost_ticks_ = 0;
}

Pose2 DepthEstimator::mount_pose(const Pose2& pose, const Vec2& offset) const {
    const Vec2 p = body_to_world(offset, pose);
    return Pose2{p.x(), p.y(), pose.yaw};
}

DepthEstimator::Tick DepthEstimator::step(const Pose2& pose,
                                          std::optional<double> m_left,
                                          std::optional<double> m_right) {
    Tick out;

    if (!m_left && !m_right) {
        ++lost_ticks_;
        if (cfg_.reset_after_lost > 0 && lost_ticks_ >= cfg_.reset_after_lost) {
            reset();
        }
    } else {
        lost_ticks_ = 0;
    }

    if (cfg_.variant == EstimatorVariant::MeasurementOnly) {
        left_valid_ = m_left.has_value();
        right_valid_ = m_right.has_value();
        if (m_left) left_ = KfState{*m_left, cfg_.r, cfg_.q, cfg_.r};
        if (m_right) right_ = KfState{*m_right, cfg_.r, cfg_.q, cfg_.r};
    } else {
        const bool simplified = cfg_.variant == EstimatorVariant::KfSimplified;

        auto advance = [&](KfState& st, bool& valid, const Vec2& offset,
                           std::optional<double> meas) {
            double d_pred = st.d;
            double p_pred = st.P + st.Q;
            if (valid && prev_pose_) {
                WallState wall;
                wall.theta_wall_W = simplified
                                        ? prev_pose_->yaw
                                        : wall_normal_world_.value_or(prev_pose_->yaw);
                try {
                    d_pred = process_predict(st.d, wall,
                                             mount_pose(*prev_pose_, offset),
                                             mount_pose(pose, offset));
                } catch (const Error&) {
                    d_pred = st.d; // grazing: hold the last estimate
                }
            }
            if (meas) {
                if (valid) {
                    KfState prior = st;
                    prior.d = d_pred;
                    st = kf_step(prior, d_pred, *meas);
                } else {
                    st = KfState{*meas, cfg_.r, cfg_.q, cfg_.r};
                    valid = true;
                }
            } else if (valid) {
                st.d = d_pred;
                st.P = p_pred;
            }
        };

        advance(left_, left_valid_, cfg_.mount_left, m_left);
        advance(right_, right_valid_, cfg_.mount_right, m_right);

        // Wall orientation from the fused pair; the world-frame angle is
        // retained while contact persists (static-wall assumption).
        if (!simplified) {
            if (left_valid_ && right_valid_) {
                const double theta_d =
                    wall_angle_from_depths(left_.d, right_.d, cfg_.separation);
                wall_normal_world_ = normalize_angle(pose.yaw - theta_d);
            } else if ((left_valid_ || right_valid_) && !wall_normal_world_) {
                wall_normal_world_ = pose.yaw;
            }
        }
    }

    out.left = WhiskerEstimate{left_valid_, left_.d, left_.P};
    out.right = WhiskerEstimate{right_valid_, right_.d, right_.P};

    double theta_w;
    if (cfg_.variant == EstimatorVariant::KfFull && wall_normal_world_) {
        theta_w = *wall_normal_world_;
        out.wall_valid = left_valid_ || right_valid_;
    } else if (left_valid_ && right_valid_) {
        const double theta_d =
            wall_angle_from_depths(left_.d, right_.d, cfg_.separation);
        theta_w = normalize_angle(pose.yaw - theta_d);
        out.wall_valid = true;
    } else {
        theta_w = pose.yaw;
        out.wall_valid = false;
    }
    out.wall.theta_wall_W = theta_w;
    out.wall.theta_wall_D = normalize_angle(pose.yaw - theta_w);
    double dsum = 0.0;
    int dn = 0;
    if (left_valid_) { dsum += left_.d; ++dn; }
    if (right_valid_) { dsum += right_.d; ++dn; }
    out.wall.d_wall = dn ? (dsum / dn) * std::cos(out.wall.theta_wall_D) : 0.0;

    prev_pose_ = pose;
    return out;
}

double DepthModel::predict(const std::array<double, 3>& s_p) const {
    const auto s_n = normalizer.normalize(s_p);
    Eigen::Vector3d x{s_n[0], s_n[1], s_n[2]};
    return mlp_forward(mlp, x);
}

std::string DepthModel::to_json() const {
    nlohmann::json j;
    j["normalizer"]["mu"] = normalizer.mu;
    j["normalizer"]["sigma"] = normalizer.sigma;
    std::vector<int> arch{mlp.input_dim()};
    for (const auto& l : mlp.layers) arch.push_back(static_cast<int>(l.weights.rows()));
    j["arch"] = arch;
    auto& layers = j["layers"];
    layers = nlohmann::json::array();
    for (const auto& l : mlp.layers) {
        nlohmann::json jl;
        std::vector<std::vector<double>> w(static_cast<size_t>(l.weights.rows()));
        for (Eigen::Index r = 0; r < l.weights.rows(); ++r) {
            w[static_cast<size_t>(r)].assign(l.weights.row(r).begin(),
                                             l.weights.row(r).end());
        }
        jl["weights"] = w; // row-major
        jl["bias"] = std::vector<double>(l.bias.begin(), l.bias.end());
        layers.push_back(std::move(jl));
    }
    return j.dump(2);
}

DepthModel DepthModel::from_json(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text);
    DepthModel m;
    m.normalizer.mu = j.at("normalizer").at("mu").get<std::array<double, 3>>();
    m.normalizer.sigma = j.at("normalizer").at("sigma").get<std::array<double, 3>>();
    for (const auto& jl : j.at("layers")) {
        const auto w = jl.at("weights").get<std::vector<std::vector<double>>>();
        const auto b = jl.at("bias").get<std::vector<double>>();
        if (w.empty() || w.size() != b.size()) {
            fail("dim_mismatch", "malformed model layer");
        }
        MlpLayer layer;
        layer.weights.resize(static_cast<Eigen::Index>(w.size()),
                             static_cast<Eigen::Index>(w[0].size()));
        for (size_t r = 0; r < w.size(); ++r) {
            if (w[r].size() != w[0].size()) fail("dim_mismatch", "ragged weight rows");
            for (size_t c = 0; c < w[r].size(); ++c) {
                layer.weights(static_cast<Eigen::Index>(r),
                              static_cast<Eigen::Index>(c)) = w[r][c];
            }
        }
        layer.bias = Eigen::Map<const Eigen::VectorXd>(b.data(),
                                                       static_cast<Eigen::Index>(b.size()));
        m.mlp.layers.push_back(std::move(layer));
    }
    m.mlp.validate();
    return m;
}

void DepthModel::save(const std::string& path) const {
    std::ofstream f(path);
    if (!f) fail("io_error", "cannot write " + path);
    f << to_json() << '\n';
}

DepthModel DepthModel::load(const std::string& path) {
    std::ifstream f(path);
    if (!f) fail("io_error", "cannot read " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return from_json(ss.str());
}

} // namespace whisker
