#include "whisker/mlp.hpp"

#include <cmath>

#include "whisker/rng.hpp"

namespace whisker {

int MlpModel::input_dim() const {
    return layers.empty() ? 0 : static_cast<int>(layers.front().weights.cols());
}

int MlpModel::output_dim() const {
    return layers.empty() ? 0 : static_cast<int>(layers.back().weights.rows());
}

int MlpModel::parameter_count() const {
    int n = 0;
    for (const auto& l : layers) {
        n += static_cast<int>(l.weights.size() + l.bias.size());
    }
    return n;
}

void MlpModel::validate() const {
    if (layers.empty()) fail("dim_mismatch", "model has no layers");
    for (size_t k = 0; k < layers.size(); ++k) {
        if (layers[k].bias.size() != layers[k].weights.rows()) {
            fail("dim_mismatch", "bias size does not match layer rows");
        }
        if (k > 0 && layers[k].weights.cols() != layers[k - 1].weights.rows()) {
            fail("dim_mismatch", "layer widths do not chain");
        }
    }
}

MlpModel mlp_init(std::span<const int> dims, uint64_t seed) {
    if (dims.size() < 2) fail("dim_mismatch", "need at least input and output widths");
    MlpModel m;
    CounterRng rng{seed, fnv1a("mlp_init")};
    uint64_t counter = 0;
    for (size_t k = 0; k + 1 < dims.size(); ++k) {
        const int in = dims[k];
        const int out = dims[k + 1];
        if (in < 1 || out < 1) fail("dim_mismatch", "layer widths must be positive");
        const bool hidden = (k + 2 < dims.size());
        const double scale = hidden ? std::sqrt(2.0 / in) : std::sqrt(1.0 / in);
        MlpLayer layer;
        layer.weights.resize(out, in);
        for (int r = 0; r < out; ++r) {
            for (int c = 0; c < in; ++c) {
                layer.weights(r, c) = scale * rng.gaussian(counter++);
            }
        }
        layer.bias = Eigen::VectorXd::Zero(out);
        m.layers.push_back(std::move(layer));
    }
    return m;
}

Eigen::VectorXd mlp_forward_vec(const MlpModel& model, const Eigen::VectorXd& x) {
    if (model.layers.empty() || x.size() != model.input_dim()) {
        fail("dim_mismatch", "input width does not match model");
    }
    Eigen::VectorXd h = x;
    for (size_t k = 0; k < model.layers.size(); ++k) {
        h = (model.layers[k].weights * h + model.layers[k].bias).eval();
        if (k + 1 < model.layers.size()) h = h.cwiseMax(0.0);
    }
    return h;
}

double mlp_forward(const MlpModel& model, const Eigen::VectorXd& x) {
    const Eigen::VectorXd out = mlp_forward_vec(model, x);
    if (out.size() != 1) fail("dim_mismatch", "model output is not scalar");
    return out(0);
}

namespace {

MlpGradient zero_gradient(const MlpModel& model) {
    MlpGradient g;
    g.reserve(model.layers.size());
    for (const auto& l : model.layers) {
        g.push_back({Eigen::MatrixXd::Zero(l.weights.rows(), l.weights.cols()),
                     Eigen::VectorXd::Zero(l.bias.size())});
    }
    return g;
}

// Dense forward/backward over a row block. Adds the block's gradient
// contribution (scaled by 2/n_total) into `g`; returns the block's summed
// squared error.
double block_backprop(const MlpModel& model, const Eigen::MatrixXd& X,
                      const Eigen::VectorXd& y, Eigen::Index row0,
                      Eigen::Index rows, double inv_n, MlpGradient& g) {
    const size_t depth = model.layers.size();
    std::vector<Eigen::MatrixXd> acts(depth + 1);
    acts[0] = X.middleRows(row0, rows);
    for (size_t k = 0; k < depth; ++k) {
        acts[k + 1] = (acts[k] * model.layers[k].weights.transpose()).rowwise() +
                      model.layers[k].bias.transpose();
        if (k + 1 < depth) acts[k + 1] = acts[k + 1].cwiseMax(0.0);
    }

    const Eigen::VectorXd err = acts[depth].col(0) - y.segment(row0, rows);
    Eigen::MatrixXd delta = (2.0 * inv_n) * err;
    for (size_t k = depth; k-- > 0;) {
        g[k].weights.noalias() += delta.transpose() * acts[k];
        g[k].bias.noalias() += delta.colwise().sum().transpose();
        if (k > 0) {
            delta = (delta * model.layers[k].weights)
                        .cwiseProduct((acts[k].array() > 0.0).cast<double>().matrix());
        }
    }
    return err.squaredNorm();
}

} // namespace

double mlp_loss_gradient(const MlpModel& model, const Eigen::MatrixXd& X,
                         const Eigen::VectorXd& y, MlpGradient* grad, Exec exec) {
    model.validate();
    if (X.rows() == 0 || X.rows() != y.size() || X.cols() != model.input_dim() ||
        model.output_dim() != 1) {
        fail("dim_mismatch", "batch does not match model dims");
    }
    const Eigen::Index n = X.rows();
    const double inv_n = 1.0 / static_cast<double>(n);

    constexpr Eigen::Index kChunk = 256;
    const Eigen::Index chunks = (n + kChunk - 1) / kChunk;

    std::vector<MlpGradient> partial;
    std::vector<double> sq(static_cast<size_t>(chunks), 0.0);
    if (grad) partial.assign(static_cast<size_t>(chunks), zero_gradient(model));

#ifdef _OPENMP
#pragma omp parallel for schedule(static) if (exec == Exec::Parallel && chunks > 1)
#endif
    for (Eigen::Index c = 0; c < chunks; ++c) {
        const Eigen::Index row0 = c * kChunk;
        const Eigen::Index rows = std::min(kChunk, n - row0);
        if (grad) {
            sq[static_cast<size_t>(c)] = block_backprop(
                model, X, y, row0, rows, inv_n, partial[static_cast<size_t>(c)]);
        } else {
            MlpGradient dummy = zero_gradient(model);
            sq[static_cast<size_t>(c)] =
                block_backprop(model, X, y, row0, rows, inv_n, dummy);
        }
    }

    if (grad) {
        *grad = zero_gradient(model);
        for (Eigen::Index c = 0; c < chunks; ++c) { // fixed reduction order
            for (size_t k = 0; k < grad->size(); ++k) {
                (*grad)[k].weights += partial[static_cast<size_t>(c)][k].weights;
                (*grad)[k].bias += partial[static_cast<size_t>(c)][k].bias;
            }
        }
    }

    double loss = 0.0;
    for (Eigen::Index c = 0; c < chunks; ++c) loss += sq[static_cast<size_t>(c)];
    return loss * inv_n;
}

TrainResult mlp_train(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                      std::span<const int> dims, const TrainConfig& cfg) {
    if (X.rows() == 0) fail("empty_dataset", "training set is empty");
    TrainResult result;
    result.model = mlp_init(dims, cfg.seed);

    MlpGradient grad;
    MlpGradient m = zero_gradient(result.model);
    MlpGradient v = zero_gradient(result.model);

    double loss = 0.0;
    int epoch = 0;
    for (; epoch < cfg.epochs; ++epoch) {
        loss = mlp_loss_gradient(result.model, X, y, &grad, cfg.exec);
        if (cfg.target_mse > 0.0 && loss < cfg.target_mse) break;

        const double t = static_cast<double>(epoch + 1);
        const double bc1 = 1.0 - std::pow(cfg.beta1, t);
        const double bc2 = 1.0 - std::pow(cfg.beta2, t);
        for (size_t k = 0; k < grad.size(); ++k) {
            auto adam = [&](Eigen::MatrixXd& mom, Eigen::MatrixXd& vel,
                            const Eigen::MatrixXd& g, Eigen::MatrixXd& p) {
                mom = cfg.beta1 * mom + (1.0 - cfg.beta1) * g;
                vel = cfg.beta2 * vel.array().matrix() +
                      (1.0 - cfg.beta2) * g.array().square().matrix();
                p.array() -= cfg.learning_rate * (mom.array() / bc1) /
                             ((vel.array() / bc2).sqrt() + cfg.eps);
            };
            adam(m[k].weights, v[k].weights, grad[k].weights,
                 result.model.layers[k].weights);
            Eigen::MatrixXd mb = m[k].bias, vb = v[k].bias, gb = grad[k].bias,
                            pb = result.model.layers[k].bias;
            adam(mb, vb, gb, pb);
            m[k].bias = mb;
            v[k].bias = vb;
            result.model.layers[k].bias = pb;
        }
    }

    result.final_mse = mlp_loss_gradient(result.model, X, y, nullptr, cfg.exec);
    result.epochs_run = epoch;
    result.converged = cfg.target_mse <= 0.0 || result.final_mse < cfg.target_mse;
    return result;
}

} // namespace whisker
