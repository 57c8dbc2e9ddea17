#include "whisker/contour.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <unordered_map>

#include "whisker/errors.hpp"

namespace whisker {

namespace {

// Global edge ids: horizontal (ix,iy)->(ix+1,iy) even, vertical
// (ix,iy)->(ix,iy+1) odd.
int64_t h_edge(const Grid2& g, int ix, int iy) {
    return 2 * (static_cast<int64_t>(iy) * g.nx + ix);
}
int64_t v_edge(const Grid2& g, int ix, int iy) {
    return 2 * (static_cast<int64_t>(iy) * g.nx + ix) + 1;
}

double signed_area(const std::vector<Vec2>& pts) {
    double a = 0.0;
    for (size_t i = 0; i < pts.size(); ++i) {
        const Vec2& p = pts[i];
        const Vec2& n = pts[(i + 1) % pts.size()];
        a += p.x() * n.y() - n.x() * p.y();
    }
    return 0.5 * a;
}

} // namespace

std::vector<Contour> marching_squares(const Grid2& grid, double level,
                                      const FieldSampler& sampler) {
    if (grid.nx < 2 || grid.ny < 2 ||
        grid.values.size() != static_cast<size_t>(grid.nx) * grid.ny) {
        fail("bad_grid", "grid not filled");
    }
    const auto inside = [&](double v) { return v < level; };

    std::unordered_map<int64_t, int> edge_point;
    std::vector<Vec2> pts;
    std::vector<std::array<int, 2>> segs;

    auto crossing = [&](int64_t id, int ix0, int iy0, int ix1, int iy1) -> int {
        auto it = edge_point.find(id);
        if (it != edge_point.end()) return it->second;
        const double f0 = grid.at(ix0, iy0);
        const double f1 = grid.at(ix1, iy1);
        const double t = (level - f0) / (f1 - f0);
        const Vec2 p0 = grid.corner(ix0, iy0);
        const Vec2 p1 = grid.corner(ix1, iy1);
        pts.push_back(p0 + t * (p1 - p0));
        const int idx = static_cast<int>(pts.size()) - 1;
        edge_point.emplace(id, idx);
        return idx;
    };

    for (int cy = 0; cy + 1 < grid.ny; ++cy) {
        for (int cx = 0; cx + 1 < grid.nx; ++cx) {
            const bool b00 = inside(grid.at(cx, cy));
            const bool b10 = inside(grid.at(cx + 1, cy));
            const bool b11 = inside(grid.at(cx + 1, cy + 1));
            const bool b01 = inside(grid.at(cx, cy + 1));
            const int code = (b00 ? 1 : 0) | (b10 ? 2 : 0) | (b11 ? 4 : 0) |
                             (b01 ? 8 : 0);
            if (code == 0 || code == 15) continue;

            enum Edge { kBottom, kRight, kTop, kLeft };
            auto edge_pt = [&](Edge e) -> int {
                switch (e) {
                    case kBottom:
                        return crossing(h_edge(grid, cx, cy), cx, cy, cx + 1, cy);
                    case kTop:
                        return crossing(h_edge(grid, cx, cy + 1), cx, cy + 1,
                                        cx + 1, cy + 1);
                    case kLeft:
                        return crossing(v_edge(grid, cx, cy), cx, cy, cx, cy + 1);
                    default:
                        return crossing(v_edge(grid, cx + 1, cy), cx + 1, cy,
                                        cx + 1, cy + 1);
                }
            };
            auto emit = [&](Edge a, Edge b) {
                segs.push_back({edge_pt(a), edge_pt(b)});
            };

            switch (code) {
                case 1: emit(kLeft, kBottom); break;
                case 2: emit(kBottom, kRight); break;
                case 3: emit(kLeft, kRight); break;
                case 4: emit(kTop, kRight); break;
                case 6: emit(kBottom, kTop); break;
                case 7: emit(kLeft, kTop); break;
                case 8: emit(kLeft, kTop); break;
                case 9: emit(kBottom, kTop); break;
                case 11: emit(kTop, kRight); break;
                case 12: emit(kLeft, kRight); break;
                case 13: emit(kBottom, kRight); break;
                case 14: emit(kLeft, kBottom); break;
                case 5:
                case 10: {
                    const Vec2 center =
                        grid.corner(cx, cy) + Vec2{0.5, 0.5} * grid.spacing;
                    const double fc =
                        sampler ? sampler(center)
                                : 0.25 * (grid.at(cx, cy) + grid.at(cx + 1, cy) +
                                          grid.at(cx, cy + 1) +
                                          grid.at(cx + 1, cy + 1));
                    const bool center_inside = inside(fc);
                    // code 5: inside corners are 00 and 11; code 10: 10 and 01.
                    // A center sample matching the inside diagonal connects it;
                    // the contour then isolates the two opposite corners.
                    if (code == 5) {
                        if (center_inside) {
                            emit(kLeft, kTop);
                            emit(kBottom, kRight);
                        } else {
                            emit(kLeft, kBottom);
                            emit(kTop, kRight);
                        }
                    } else {
                        if (center_inside) {
                            emit(kLeft, kBottom);
                            emit(kTop, kRight);
                        } else {
                            emit(kBottom, kRight);
                            emit(kLeft, kTop);
                        }
                    }
                    break;
                }
                default: break;
            }
        }
    }

    if (segs.empty()) fail("empty_contour", "no level crossing in grid");

    // adjacency: each crossing point touches at most two segments
    std::vector<std::array<int, 2>> incident(pts.size(), {-1, -1});
    for (size_t s = 0; s < segs.size(); ++s) {
        for (int end : segs[s]) {
            auto& slots = incident[static_cast<size_t>(end)];
            if (slots[0] < 0) slots[0] = static_cast<int>(s);
            else slots[1] = static_cast<int>(s);
        }
    }

    std::vector<bool> visited(segs.size(), false);
    std::vector<Contour> out;

    auto walk = [&](int start_pt, int first_seg) {
        Contour c;
        c.points.push_back(pts[static_cast<size_t>(start_pt)]);
        int cur_pt = start_pt;
        int cur_seg = first_seg;
        while (true) {
            visited[static_cast<size_t>(cur_seg)] = true;
            const auto& s = segs[static_cast<size_t>(cur_seg)];
            const int next_pt = (s[0] == cur_pt) ? s[1] : s[0];
            if (next_pt == start_pt) {
                c.closed = true;
                break;
            }
            c.points.push_back(pts[static_cast<size_t>(next_pt)]);
            const auto& slots = incident[static_cast<size_t>(next_pt)];
            int next_seg = -1;
            for (int cand : slots) {
                if (cand >= 0 && cand != cur_seg && !visited[static_cast<size_t>(cand)]) {
                    next_seg = cand;
                }
            }
            if (next_seg < 0) break;
            cur_pt = next_pt;
            cur_seg = next_seg;
        }
        if (c.closed && signed_area(c.points) < 0.0) {
            std::reverse(c.points.begin() + 1, c.points.end());
        }
        out.push_back(std::move(c));
    };

    // open chains first (endpoints have a single incident segment)
    for (size_t p = 0; p < pts.size(); ++p) {
        const auto& slots = incident[p];
        if (slots[0] >= 0 && slots[1] < 0 &&
            !visited[static_cast<size_t>(slots[0])]) {
            walk(static_cast<int>(p), slots[0]);
        }
    }
    for (size_t s = 0; s < segs.size(); ++s) {
        if (!visited[s]) walk(segs[s][0], static_cast<int>(s));
    }
    return out;
}

std::vector<Contour> extract_contours(const GpisModel& model, Grid2 grid,
                                      double level, Exec exec) {
    const FieldResult f = model.eval_field(grid, exec);
    grid.values = f.mean;
    return marching_squares(grid, level,
                            [&model](const Vec2& p) { return model.mean_at(p); });
}

CornerSet detect_corners(std::span<const Vec2> points,
                         std::span<const double> kappa, double q, bool closed) {
    if (points.size() != kappa.size()) {
        fail("length_mismatch", "kappa not aligned with contour points");
    }
    if (!(q < 0.0)) fail("bad_threshold", "corner threshold q must be negative");

    CornerSet set;
    set.threshold = q;
    struct Run { size_t start, end; Vec2 centroid; };
    std::vector<Run> runs;
    size_t i = 0;
    const size_t n = points.size();
    while (i < n) {
        if (!(kappa[i] < q)) { ++i; continue; }
        const size_t start = i;
        Vec2 sum{0.0, 0.0};
        while (i < n && kappa[i] < q) {
            sum += points[i];
            ++i;
        }
        runs.push_back({start, i - 1, sum / static_cast<double>(i - start)});
    }

    const bool wraps = closed && runs.size() >= 2 && runs.front().start == 0 &&
                       runs.back().end == n - 1;
    if (wraps) {
        set.centroids.push_back(0.5 * (runs.front().centroid + runs.back().centroid));
        for (size_t r = 1; r + 1 < runs.size(); ++r) {
            set.centroids.push_back(runs[r].centroid);
        }
    } else {
        for (const auto& r : runs) set.centroids.push_back(r.centroid);
    }
    return set;
}

double corner_penalty(const Vec2& x, std::span<const Vec2> corners, double radius) {
    if (corners.empty()) return 0.0;
    double best = 0.0;
    bool first = true;
    for (const Vec2& c : corners) {
        const double v = -std::exp(-(x - c).squaredNorm() / (2.0 * radius * radius));
        if (first || v < best) {
            best = v;
            first = false;
        }
    }
    return best;
}

AcquisitionChoice acquisition(const GpisModel& model, const CornerSet& corners,
                              std::span<const Vec2> candidates,
                              double penalty_radius, Exec exec) {
    if (candidates.empty()) fail("no_candidates", "acquisition needs candidates");
    const auto queries = model.query_batch(candidates, exec);

    AcquisitionChoice best;
    for (size_t i = 0; i < candidates.size(); ++i) {
        const double pen = corner_penalty(candidates[i], corners.centroids,
                                          penalty_radius);
        const double score = queries[i].variance + pen;
        if (best.index < 0 || score > best.score) {
            best.index = static_cast<int>(i);
            best.point = candidates[i];
            best.variance = queries[i].variance;
            best.penalty = pen;
            best.score = score;
        }
    }
    return best;
}

} // namespace whisker
