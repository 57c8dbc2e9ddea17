#include "whisker/gpis.hpp"

#include <cmath>

#include "whisker/errors.hpp"

namespace whisker {

double imq_kernel(const Vec2& a, const Vec2& b, double c, double beta) {
    const double u = c * c + (a - b).squaredNorm();
    return std::pow(u, -beta);
}

double surface_curvature(const Vec2& grad, const Eigen::Matrix2d& hessian) {
    const double g = grad.norm();
    if (g < 1e-9) fail("zero_gradient", "curvature undefined at zero gradient");
    const double quad = grad.dot(hessian * grad);
    return (quad - g * g * hessian.trace()) / (g * g * g);
}

GpisModel GpisModel::fit(std::vector<Vec2> points, Eigen::VectorXd labels,
                         GpisHyper hyper) {
    const int n = static_cast<int>(points.size());
    if (n == 0) fail("empty_training_set", "GPIS fit needs at least one point");
    if (labels.size() != n) fail("dim_mismatch", "labels do not match points");
    if (n > hyper.cap) fail("cap_exceeded", "training set exceeds cap");
    if (!(hyper.kernel_scale > 0.0) || !(hyper.kernel_beta > 0.0)) {
        fail("bad_hyper", "kernel scale and beta must be positive");
    }

    Eigen::MatrixXd k(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = i; j < n; ++j) {
            const double v = imq_kernel(points[static_cast<size_t>(i)],
                                        points[static_cast<size_t>(j)],
                                        hyper.kernel_scale, hyper.kernel_beta);
            k(i, j) = v;
            k(j, i) = v;
        }
    }
    k.diagonal().array() += hyper.noise_var;

    GpisModel m;
    m.llt_.compute(k);
    if (m.llt_.info() != Eigen::Success) {
        if (hyper.noise_var > 0.0) {
            k.diagonal().array() += 1e-9; // jitter for roundoff
            m.llt_.compute(k);
        }
        if (m.llt_.info() != Eigen::Success) {
            fail("not_positive_definite", "kernel matrix is not SPD");
        }
    }
    m.alpha_ = m.llt_.solve(labels);
    m.x_ = std::move(points);
    m.y_ = std::move(labels);
    m.hyper_ = hyper;
    return m;
}

double GpisModel::prior_variance() const {
    return std::pow(hyper_.kernel_scale * hyper_.kernel_scale, -hyper_.kernel_beta);
}

double GpisModel::mean_at(const Vec2& x) const {
    const double c = hyper_.kernel_scale;
    const double beta = hyper_.kernel_beta;
    double mean = 0.0;
    for (size_t i = 0; i < x_.size(); ++i) {
        mean += alpha_(static_cast<Eigen::Index>(i)) * imq_kernel(x, x_[i], c, beta);
    }
    return mean;
}

SurfaceQuery GpisModel::query(const Vec2& x) const {
    const int n = size();
    const double c = hyper_.kernel_scale;
    const double beta = hyper_.kernel_beta;

    Eigen::VectorXd kv(n);
    SurfaceQuery q;
    Eigen::Matrix2d hess = Eigen::Matrix2d::Zero();
    Vec2 grad{0.0, 0.0};
    for (int i = 0; i < n; ++i) {
        const Vec2 delta = x - x_[static_cast<size_t>(i)];
        const double u = c * c + delta.squaredNorm();
        const double k0 = std::pow(u, -beta);
        kv(i) = k0;
        const double a = alpha_(i);
        // dk/dx = -2 beta (x - x_i) u^{-beta-1}
        const double d1 = -2.0 * beta * std::pow(u, -beta - 1.0);
        grad += a * d1 * delta;
        // d2k/dx2 = -2 beta u^{-beta-1} I + 4 beta (beta+1) u^{-beta-2} dd^T
        const double d2 = 4.0 * beta * (beta + 1.0) * std::pow(u, -beta - 2.0);
        hess += a * (d1 * Eigen::Matrix2d::Identity() + d2 * delta * delta.transpose());
    }

    q.mean = kv.dot(alpha_);
    const Eigen::VectorXd w = llt_.solve(kv);
    q.variance = std::max(0.0, prior_variance() - kv.dot(w));
    q.grad = grad;
    q.hessian = hess;
    if (grad.norm() >= 1e-9) {
        q.curvature = surface_curvature(grad, hess);
        q.curvature_valid = true;
    }
    return q;
}

std::vector<SurfaceQuery> GpisModel::query_batch(std::span<const Vec2> xs,
                                                 Exec exec) const {
    std::vector<SurfaceQuery> out(xs.size());
#ifdef _OPENMP
#pragma omp parallel for schedule(static) if (exec == Exec::Parallel)
#endif
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(xs.size()); ++i) {
        out[static_cast<size_t>(i)] = query(xs[static_cast<size_t>(i)]);
    }
    (void)exec;
    return out;
}

FieldResult GpisModel::eval_field(const Grid2& grid, Exec exec) const {
    const size_t total = static_cast<size_t>(grid.nx) * static_cast<size_t>(grid.ny);
    FieldResult f;
    f.mean.resize(total);
    f.variance.resize(total);
#ifdef _OPENMP
#pragma omp parallel for schedule(static) if (exec == Exec::Parallel)
#endif
    for (std::ptrdiff_t idx = 0; idx < static_cast<std::ptrdiff_t>(total); ++idx) {
        const int ix = static_cast<int>(idx) % grid.nx;
        const int iy = static_cast<int>(idx) / grid.nx;
        const SurfaceQuery q = query(grid.corner(ix, iy));
        f.mean[static_cast<size_t>(idx)] = q.mean;
        f.variance[static_cast<size_t>(idx)] = q.variance;
    }
    (void)exec;
    return f;
}

} // namespace whisker
