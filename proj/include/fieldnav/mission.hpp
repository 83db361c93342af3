#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "fieldnav/errors.hpp"
#include "fieldnav/geometry.hpp"
#include "fieldnav/roadmap.hpp"
#include "fieldnav/terrain.hpp"

namespace fieldnav {

struct Tour {
    std::vector<int> order;  // waypoint indices, first == last == home
    double total_cost = 0.0;
};

namespace detail {

inline void check_connected(const CostMatrix& m) {
    for (int i = 0; i < m.n; ++i)
        for (int j = 0; j < m.n; ++j)
            if (i != j && !std::isfinite(m.at(i, j)))
                throw DisconnectedError("cost matrix entry " + std::to_string(i) + "->" +
                                        std::to_string(j) + " is infinite");
}

// Held-Karp over subsets of the non-home waypoints; exact optimum.
inline Tour solve_exact(const CostMatrix& m, int home) {
    std::vector<int> wp;
    for (int i = 0; i < m.n; ++i)
        if (i != home) wp.push_back(i);
    const int w = static_cast<int>(wp.size());
    const std::uint32_t full = (1u << w) - 1;

    std::vector<double> dp(static_cast<size_t>(full + 1) * w, kInf);
    std::vector<int> par(dp.size(), -1);
    auto idx = [w](std::uint32_t mask, int j) { return static_cast<size_t>(mask) * w + j; };

    for (int j = 0; j < w; ++j) dp[idx(1u << j, j)] = m.at(home, wp[j]);
    for (std::uint32_t mask = 1; mask <= full; ++mask) {
        for (int j = 0; j < w; ++j) {
            if (!(mask & (1u << j))) continue;
            double base = dp[idx(mask, j)];
            if (!std::isfinite(base)) continue;
            for (int t = 0; t < w; ++t) {
                if (mask & (1u << t)) continue;
                double cand = base + m.at(wp[j], wp[t]);
                size_t ti = idx(mask | (1u << t), t);
                if (cand < dp[ti]) {
                    dp[ti] = cand;
                    par[ti] = j;
                }
            }
        }
    }

    double best = kInf;
    int best_end = -1;
    for (int j = 0; j < w; ++j) {
        double cand = dp[idx(full, j)] + m.at(wp[j], home);
        if (cand < best) {
            best = cand;
            best_end = j;
        }
    }

    Tour tour;
    tour.total_cost = best;
    std::vector<int> rev;
    std::uint32_t mask = full;
    for (int j = best_end; j != -1;) {
        rev.push_back(wp[j]);
        int p = par[idx(mask, j)];
        mask &= ~(1u << j);
        j = p;
    }
    tour.order.push_back(home);
    for (auto it = rev.rbegin(); it != rev.rend(); ++it) tour.order.push_back(*it);
    tour.order.push_back(home);
    return tour;
}

inline double tour_cost(const CostMatrix& m, const std::vector<int>& order) {
    double c = 0.0;
    for (size_t i = 0; i + 1 < order.size(); ++i) c += m.at(order[i], order[i + 1]);
    return c;
}

// Nearest-neighbour construction then Or-opt: relocate runs of 1-3 waypoints
// without reversing them, which keeps the move valid under asymmetric costs.
inline Tour solve_heuristic(const CostMatrix& m, int home) {
    std::vector<char> used(m.n, 0);
    used[home] = 1;
    std::vector<int> order{home};
    int cur = home;
    for (int step = 1; step < m.n; ++step) {
        int best = -1;
        double best_c = kInf;
        for (int j = 0; j < m.n; ++j) {
            if (used[j]) continue;
            if (m.at(cur, j) < best_c) {
                best_c = m.at(cur, j);
                best = j;
            }
        }
        order.push_back(best);
        used[best] = 1;
        cur = best;
    }
    order.push_back(home);

    bool improved = true;
    while (improved) {
        improved = false;
        const int n = static_cast<int>(order.size());
        for (int len = 1; len <= 3 && !improved; ++len) {
            for (int i = 1; i + len < n && !improved; ++i) {
                double removal = m.at(order[i - 1], order[i]) +
                                 m.at(order[i + len - 1], order[i + len]) -
                                 m.at(order[i - 1], order[i + len]);
                for (int j = 0; j + 1 < n; ++j) {
                    if (j >= i - 1 && j <= i + len - 1) continue;
                    double insertion = m.at(order[j], order[i]) +
                                       m.at(order[i + len - 1], order[j + 1]) -
                                       m.at(order[j], order[j + 1]);
                    if (insertion - removal < -1e-12) {
                        std::vector<int> seg(order.begin() + i, order.begin() + i + len);
                        order.erase(order.begin() + i, order.begin() + i + len);
                        int target = j < i ? j + 1 : j + 1 - len;
                        order.insert(order.begin() + target, seg.begin(), seg.end());
                        improved = true;
                        break;
                    }
                }
            }
        }
    }

    Tour tour;
    tour.order = std::move(order);
    tour.total_cost = tour_cost(m, tour.order);
    return tour;
}

}  // namespace detail

// Waypoint ordering over the asymmetric cost matrix. Exact dynamic
// programming up to 12 waypoints (the mission sizes used here are 5-8),
// nearest-neighbour plus Or-opt beyond that.
inline Tour solve_tour(const CostMatrix& m, int home) {
    if (m.n < 1 || home < 0 || home >= m.n)
        throw ConfigError("solve_tour: invalid matrix or home index");
    detail::check_connected(m);
    if (m.n == 1) return Tour{{home, home}, 0.0};
    if (m.n - 1 <= 12) return detail::solve_exact(m, home);
    return detail::solve_heuristic(m, home);
}

// Stitched tour polyline with 3D cumulative arc length and the arc positions
// of each tour stop.
struct ReferencePath {
    std::vector<Vec2> points;
    std::vector<double> arc;      // cumulative 3D length per vertex, arc[0] == 0
    std::vector<int> source;      // waypoint index at stops, -1 for interior nodes
    std::vector<double> stop_arc;  // arc position of each tour stop
    std::vector<int> stop_waypoint;  // waypoint index of each tour stop

    double total_length() const { return arc.empty() ? 0.0 : arc.back(); }

    // index of the segment containing arc position s
    size_t segment_at(double s) const {
        auto it = std::upper_bound(arc.begin(), arc.end(), s);
        size_t i = static_cast<size_t>(it - arc.begin());
        if (i == 0) return 0;
        if (i >= arc.size()) return arc.size() - 2;
        return i - 1;
    }

    Vec2 point_at(double s) const {
        if (points.size() < 2) return points.empty() ? Vec2{} : points.front();
        s = std::clamp(s, 0.0, total_length());
        size_t i = segment_at(s);
        double seg = arc[i + 1] - arc[i];
        double t = seg > 0.0 ? (s - arc[i]) / seg : 0.0;
        return points[i] + (points[i + 1] - points[i]) * t;
    }

    Vec2 tangent_at(double s) const {
        if (points.size() < 2) return {0.0, 0.0};
        size_t i = segment_at(std::clamp(s, 0.0, total_length()));
        return normalized(points[i + 1] - points[i]);
    }

    // Arc position of the closest point to p, restricted to [s_lo, s_hi].
    double project(Vec2 p, double s_lo, double s_hi) const {
        if (points.size() < 2) return 0.0;
        s_lo = std::clamp(s_lo, 0.0, total_length());
        s_hi = std::clamp(s_hi, s_lo, total_length());
        size_t first = segment_at(s_lo);
        size_t last = segment_at(s_hi);
        double best_d = kInf, best_s = s_lo;
        for (size_t i = first; i <= last && i + 1 < points.size(); ++i) {
            Vec2 a = points[i], b = points[i + 1];
            Vec2 ab = b - a;
            double len_sq = norm_sq(ab);
            double t = len_sq > 0.0 ? std::clamp(dot(p - a, ab) / len_sq, 0.0, 1.0) : 0.0;
            double s = arc[i] + t * (arc[i + 1] - arc[i]);
            s = std::clamp(s, s_lo, s_hi);
            double d = distance(p, point_at(s));
            if (d < best_d) {
                best_d = d;
                best_s = s;
            }
        }
        return best_s;
    }

    // Min distance from p to the polyline restricted to [s_lo, s_hi].
    double distance_to(Vec2 p, double s_lo, double s_hi) const {
        return distance(p, point_at(project(p, s_lo, s_hi)));
    }
};

inline ReferencePath stitch_reference_path(const Roadmap& rm, const CostMatrix& costs,
                                           const Tour& tour, const TerrainMap& map) {
    ReferencePath path;
    for (size_t leg = 0; leg + 1 < tour.order.size(); ++leg) {
        int a = tour.order[leg], b = tour.order[leg + 1];
        const std::vector<int>& nodes = costs.path(a, b);
        if (nodes.empty() || nodes.front() != costs.waypoint_nodes[a] ||
            nodes.back() != costs.waypoint_nodes[b])
            throw MissingCachedPathError("no cached path for tour leg " + std::to_string(a) +
                                         "->" + std::to_string(b));
        for (size_t i = 0; i < nodes.size(); ++i) {
            Vec2 p = rm.nodes[nodes[i]];
            if (!path.points.empty() && distance(path.points.back(), p) < 1e-12)
                continue;  // duplicate junction vertex
            if (path.points.empty()) {
                path.arc.push_back(0.0);
            } else {
                Vec2 prev = path.points.back();
                double dz = map.height_at(p) - map.height_at(prev);
                path.arc.push_back(path.arc.back() + std::hypot(distance(prev, p), dz));
            }
            path.points.push_back(p);
            path.source.push_back(-1);
        }
        if (leg == 0) {
            path.stop_arc.push_back(0.0);
            path.stop_waypoint.push_back(a);
            path.source.front() = a;
        }
        path.stop_arc.push_back(path.arc.back());
        path.stop_waypoint.push_back(b);
        path.source.back() = b;
    }
    return path;
}

}  // namespace fieldnav
