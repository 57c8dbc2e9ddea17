#pragma once

#include <functional>
#include <span>
#include <vector>

#include "whisker/geom.hpp"
#include "whisker/gpis.hpp"

namespace whisker {

struct Contour {
    std::vector<Vec2> points; // ordered; closed loops do not repeat the start
    bool closed = false;
};

using FieldSampler = std::function<double(const Vec2&)>;

// Level-set polylines of a corner-sampled field, linear interpolation along
// cell edges, segments chained into ordered paths/loops. Saddle cells are
// disambiguated by the field sign at the cell center: `sampler` when given,
// otherwise the corner average. Closed loops are oriented CCW.
// Throws empty_contour when no cell edge crosses the level.
std::vector<Contour> marching_squares(const Grid2& grid, double level = 0.0,
                                      const FieldSampler& sampler = {});

// Fills the grid with posterior means and contours it, with model-based
// saddle disambiguation.
std::vector<Contour> extract_contours(const GpisModel& model, Grid2 grid,
                                      double level = 0.0,
                                      Exec exec = Exec::Parallel);

struct CornerSet {
    std::vector<Vec2> centroids;
    double threshold = -5.0; // q, 1/m (negative)
};

// Clusters maximal runs of consecutive contour points with kappa < q into
// corner centroids. On a closed loop whose first and last runs touch the
// contour ends, the two centroids merge as (c_1 + c_m) / 2.
CornerSet detect_corners(std::span<const Vec2> points,
                         std::span<const double> kappa, double q, bool closed);

// Repulsive potential of the nearest corner: min_k -exp(-|x-c_k|^2/(2 r^2)).
// Zero when no corners exist.
double corner_penalty(const Vec2& x, std::span<const Vec2> corners, double radius);

struct AcquisitionChoice {
    int index = -1;
    Vec2 point{0.0, 0.0};
    double variance = 0.0;
    double penalty = 0.0;
    double score = 0.0;
};

// argmax over candidates of posterior variance + corner penalty; ties break
// to the lowest candidate index. Throws no_candidates on an empty set.
AcquisitionChoice acquisition(const GpisModel& model, const CornerSet& corners,
                              std::span<const Vec2> candidates,
                              double penalty_radius,
                              Exec exec = Exec::Parallel);

} // namespace whisker
