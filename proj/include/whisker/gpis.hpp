#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <limits>
#include <span>
#include <vector>

#include "whisker/geom.hpp"
#include "whisker/parallel.hpp"

namespace whisker {

struct GpisHyper {
    double kernel_scale = 0.4; // c, m
    double kernel_beta = 0.5;  // IMQ decay exponent
    double noise_var = 1e-4;   // observation noise sigma^2
    int cap = 50;              // training-set cap
};

// Inverse multiquadric covariance (c^2 + ||x - x'||^2)^(-beta).
double imq_kernel(const Vec2& a, const Vec2& b, double c, double beta);

struct SurfaceQuery {
    double mean = 0.0;
    double variance = 0.0;
    Vec2 grad{0.0, 0.0};
    Eigen::Matrix2d hessian = Eigen::Matrix2d::Zero();
    double curvature = std::numeric_limits<double>::quiet_NaN();
    bool curvature_valid = false;
};

// kappa = (g^T H g - |g|^2 tr H) / |g|^3. Throws zero_gradient when the
// gradient is too small to define a curvature.
double surface_curvature(const Vec2& grad, const Eigen::Matrix2d& hessian);

struct FieldResult {
    std::vector<double> mean;
    std::vector<double> variance;
};

// GP over signed occupancy labels (0 = surface, -1 = interior); the zero
// level set is the environment surface. Immutable after fit; queries are
// pure and safe to run in parallel.
class GpisModel {
public:
    GpisModel() = default;

    // Throws cap_exceeded past the training cap and not_positive_definite
    // when K + sigma^2 I cannot be factorized (with noise_var > 0 a jitter
    // of 1e-9 is tried first; exact duplicates at noise_var == 0 fail).
    static GpisModel fit(std::vector<Vec2> points, Eigen::VectorXd labels,
                         GpisHyper hyper);

    bool fitted() const { return !x_.empty(); }
    int size() const { return static_cast<int>(x_.size()); }
    const std::vector<Vec2>& points() const { return x_; }
    const Eigen::VectorXd& labels() const { return y_; }
    const GpisHyper& hyper() const { return hyper_; }
    double prior_variance() const; // k(x, x)

    SurfaceQuery query(const Vec2& x) const;
    double mean_at(const Vec2& x) const;

    std::vector<SurfaceQuery> query_batch(std::span<const Vec2> xs,
                                          Exec exec = Exec::Parallel) const;

    // Posterior mean/variance at every grid corner.
    FieldResult eval_field(const Grid2& grid, Exec exec = Exec::Parallel) const;

private:
    std::vector<Vec2> x_;
    Eigen::VectorXd y_;
    GpisHyper hyper_;
    Eigen::LLT<Eigen::MatrixXd> llt_;
    Eigen::VectorXd alpha_; // (K + sigma^2 I)^{-1} y
};

} // namespace whisker
