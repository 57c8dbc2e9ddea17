#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <vector>

#include "whisker/mlp.hpp"
#include "whisker/rng.hpp"

using namespace whisker;

namespace {
// plain-loop forward pass, no Eigen, as an independent oracle
double loop_forward(const MlpModel& m, const std::vector<double>& x) {
    std::vector<double> h = x;
    for (size_t k = 0; k < m.layers.size(); ++k) {
        const auto& l = m.layers[k];
        std::vector<double> next(static_cast<size_t>(l.weights.rows()), 0.0);
        for (Eigen::Index r = 0; r < l.weights.rows(); ++r) {
            double acc = l.bias(r);
            for (Eigen::Index c = 0; c < l.weights.cols(); ++c) {
                acc += l.weights(r, c) * h[static_cast<size_t>(c)];
            }
            if (k + 1 < m.layers.size() && acc < 0) acc = 0;
            next[static_cast<size_t>(r)] = acc;
        }
        h = std::move(next);
    }
    return h[0];
}

double flatten_rel_err(const MlpGradient& a, const MlpGradient& b) {
    double worst = 0;
    for (size_t k = 0; k < a.size(); ++k) {
        for (Eigen::Index i = 0; i < a[k].weights.size(); ++i) {
            const double ga = a[k].weights.data()[i];
            const double gb = b[k].weights.data()[i];
            const double denom = std::max(1e-6, std::abs(ga) + std::abs(gb));
            worst = std::max(worst, std::abs(ga - gb) / denom);
        }
        for (Eigen::Index i = 0; i < a[k].bias.size(); ++i) {
            const double ga = a[k].bias(i);
            const double gb = b[k].bias(i);
            const double denom = std::max(1e-6, std::abs(ga) + std::abs(gb));
            worst = std::max(worst, std::abs(ga - gb) / denom);
        }
    }
    return worst;
}
} // namespace

TEST_CASE("zero model maps everything to zero") {
    MlpModel m;
    m.layers.push_back({Eigen::MatrixXd::Zero(4, 3), Eigen::VectorXd::Zero(4)});
    m.layers.push_back({Eigen::MatrixXd::Zero(1, 4), Eigen::VectorXd::Zero(1)});
    CHECK(mlp_forward(m, Eigen::Vector3d{1, 2, 3}) == doctest::Approx(0.0));
}

TEST_CASE("single linear layer sums its inputs") {
    MlpModel m;
    Eigen::MatrixXd w(1, 3);
    w << 1, 1, 1;
    m.layers.push_back({w, Eigen::VectorXd::Zero(1)});
    CHECK(mlp_forward(m, Eigen::Vector3d{1, 2, 3}) == doctest::Approx(6.0));
}

TEST_CASE("forward pass matches a plain-loop oracle") {
    const std::vector<int> dims{3, 8, 6, 1};
    const MlpModel m = mlp_init(dims, 99);
    const CounterRng rng{123, 0};
    for (uint64_t i = 0; i < 50; ++i) {
        const std::vector<double> x{rng.gaussian(i, 0), rng.gaussian(i, 1),
                                    rng.gaussian(i, 2)};
        const double want = loop_forward(m, x);
        const double got = mlp_forward(m, Eigen::Vector3d{x[0], x[1], x[2]});
        CHECK(got == doctest::Approx(want).epsilon(1e-6));
    }
}

TEST_CASE("dimension mismatches are rejected") {
    MlpModel m;
    m.layers.push_back({Eigen::MatrixXd::Zero(4, 3), Eigen::VectorXd::Zero(4)});
    m.layers.push_back({Eigen::MatrixXd::Zero(1, 5), Eigen::VectorXd::Zero(1)});
    CHECK_THROWS_AS(m.validate(), Error);
    CHECK_THROWS_AS(mlp_forward(m, Eigen::Vector2d{1, 2}), Error);
}

TEST_CASE("deterministic init") {
    const std::vector<int> dims{3, 16, 1};
    const MlpModel a = mlp_init(dims, 7);
    const MlpModel b = mlp_init(dims, 7);
    CHECK(a.layers[0].weights == b.layers[0].weights);
    const MlpModel c = mlp_init(dims, 8);
    CHECK(a.layers[0].weights != c.layers[0].weights);
}

TEST_CASE("backprop matches central finite differences on random nets") {
    for (uint64_t rep = 0; rep < 20; ++rep) {
        const std::vector<int> dims{3, 5, 4, 1};
        MlpModel m = mlp_init(dims, 1000 + rep);
        const CounterRng rng{rep, 77};
        const int n = 8;
        Eigen::MatrixXd x(n, 3);
        Eigen::VectorXd y(n);
        for (int i = 0; i < n; ++i) {
            for (int c = 0; c < 3; ++c) {
                x(i, c) = rng.gaussian(static_cast<uint64_t>(i), static_cast<uint64_t>(c));
            }
            y(i) = rng.gaussian(static_cast<uint64_t>(i), 9);
        }

        MlpGradient analytic;
        mlp_loss_gradient(m, x, y, &analytic);

        MlpGradient fd = analytic; // same shapes
        const double h = 1e-6;
        for (size_t k = 0; k < m.layers.size(); ++k) {
            for (Eigen::Index i = 0; i < m.layers[k].weights.size(); ++i) {
                double& w = m.layers[k].weights.data()[i];
                const double w0 = w;
                w = w0 + h;
                const double lp = mlp_loss_gradient(m, x, y, nullptr);
                w = w0 - h;
                const double lm = mlp_loss_gradient(m, x, y, nullptr);
                w = w0;
                fd[k].weights.data()[i] = (lp - lm) / (2 * h);
            }
            for (Eigen::Index i = 0; i < m.layers[k].bias.size(); ++i) {
                double& b = m.layers[k].bias(i);
                const double b0 = b;
                b = b0 + h;
                const double lp = mlp_loss_gradient(m, x, y, nullptr);
                b = b0 - h;
                const double lm = mlp_loss_gradient(m, x, y, nullptr);
                b = b0;
                fd[k].bias(i) = (lp - lm) / (2 * h);
            }
        }
        CHECK(flatten_rel_err(analytic, fd) < 1e-4);
    }
}

TEST_CASE("parallel gradient equals the serial reference exactly") {
    const std::vector<int> dims{3, 16, 16, 1};
    const MlpModel m = mlp_init(dims, 5);
    const CounterRng rng{55, 0};
    const int n = 1500; // several chunks
    Eigen::MatrixXd x(n, 3);
    Eigen::VectorXd y(n);
    for (int i = 0; i < n; ++i) {
        for (int c = 0; c < 3; ++c) {
            x(i, c) = rng.gaussian(static_cast<uint64_t>(i), static_cast<uint64_t>(c));
        }
        y(i) = rng.gaussian(static_cast<uint64_t>(i), 7);
    }
    MlpGradient gs, gp;
    const double ls = mlp_loss_gradient(m, x, y, &gs, Exec::Serial);
    const double lp = mlp_loss_gradient(m, x, y, &gp, Exec::Parallel);
    CHECK(ls == lp);
    for (size_t k = 0; k < gs.size(); ++k) {
        CHECK(gs[k].weights == gp[k].weights);
        CHECK(gs[k].bias == gp[k].bias);
    }
}

TEST_CASE("trains a realizable linear target below 1e-6 MSE") {
    const CounterRng rng{31, 0};
    const int n = 200;
    Eigen::MatrixXd x(n, 3);
    Eigen::VectorXd y(n);
    for (int i = 0; i < n; ++i) {
        for (int c = 0; c < 3; ++c) {
            x(i, c) = rng.gaussian(static_cast<uint64_t>(i), static_cast<uint64_t>(c));
        }
        y(i) = 0.4 * x(i, 0) - 1.1 * x(i, 1) + 0.25 * x(i, 2) + 0.07;
    }
    TrainConfig cfg;
    cfg.epochs = 4000;
    cfg.learning_rate = 0.02;
    cfg.target_mse = 1e-7;
    cfg.seed = 2;
    const std::vector<int> dims{3, 1};
    const TrainResult r = mlp_train(x, y, dims, cfg);
    CHECK(r.final_mse < 1e-6);
    CHECK(r.converged);
    // recovered the map
    CHECK(r.model.layers[0].weights(0, 0) == doctest::Approx(0.4).epsilon(1e-2));
    CHECK(r.model.layers[0].weights(0, 1) == doctest::Approx(-1.1).epsilon(1e-2));
}
