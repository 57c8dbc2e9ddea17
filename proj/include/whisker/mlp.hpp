#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <span>
#include <vector>

#include "whisker/errors.hpp"
#include "whisker/parallel.hpp"

namespace whisker {

struct MlpLayer {
    Eigen::MatrixXd weights; // out x in
    Eigen::VectorXd bias;    // out
};

// Fully connected network: ReLU on hidden layers, linear output.
struct MlpModel {
    std::vector<MlpLayer> layers;

    int input_dim() const;
    int output_dim() const;
    int parameter_count() const;
    void validate() const; // throws dim_mismatch when layer dims don't chain
};

// He-normal init on hidden layers, deterministic for a given seed.
// dims is the full width chain, e.g. {3, 32, 32, 1}.
MlpModel mlp_init(std::span<const int> dims, uint64_t seed);

Eigen::VectorXd mlp_forward_vec(const MlpModel& model, const Eigen::VectorXd& x);

// Scalar-output convenience (depth head).
double mlp_forward(const MlpModel& model, const Eigen::VectorXd& x);

using MlpGradient = std::vector<MlpLayer>; // same shapes as the model

// MSE loss over the batch and its gradient w.r.t. all parameters.
// X is samples x input_dim, y is samples (scalar targets). The parallel
// path accumulates per fixed-size chunk and reduces in chunk order, so the
// result is identical for any thread count.
double mlp_loss_gradient(const MlpModel& model, const Eigen::MatrixXd& X,
                         const Eigen::VectorXd& y, MlpGradient* grad,
                         Exec exec = Exec::Serial);

struct TrainConfig {
    int epochs = 600;
    double learning_rate = 3e-3;
    uint64_t seed = 1;
    double target_mse = 0.0; // early stop when reached; 0 disables
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    Exec exec = Exec::Parallel;
};

struct TrainResult {
    MlpModel model;
    double final_mse = 0.0;
    int epochs_run = 0;
    bool converged = true; // false when target_mse was set and not reached
};

// Full-batch Adam on the MSE loss; deterministic for a given seed.
TrainResult mlp_train(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                      std::span<const int> dims, const TrainConfig& cfg);

} // namespace whisker
