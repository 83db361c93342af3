// Independent reference implementations used only by tests. These stay
// deliberately naive (dense matrices, factorial enumeration, exhaustive
// search) so they cannot share a bug with the algorithms they check.
#pragma once

#include <algorithm>
#include <numeric>
#include <vector>

#include "fieldnav/geometry.hpp"
#include "fieldnav/mission.hpp"
#include "fieldnav/roadmap.hpp"

namespace oracles {

// All-pairs shortest path costs by Floyd-Warshall over the roadmap adjacency.
inline std::vector<std::vector<double>> floyd_warshall(const fieldnav::Roadmap& rm) {
    const int n = static_cast<int>(rm.nodes.size());
    std::vector<std::vector<double>> d(n, std::vector<double>(n, fieldnav::kInf));
    for (int i = 0; i < n; ++i) d[i][i] = 0.0;
    for (int i = 0; i < n; ++i)
        for (const auto& e : rm.adj[i]) d[i][e.to] = std::min(d[i][e.to], e.cost);
    for (int k = 0; k < n; ++k)
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                if (d[i][k] + d[k][j] < d[i][j]) d[i][j] = d[i][k] + d[k][j];
    return d;
}

// Optimal ATSP cost by full permutation enumeration.
inline double brute_force_tour_cost(const fieldnav::CostMatrix& m, int home) {
    std::vector<int> wp;
    for (int i = 0; i < m.n; ++i)
        if (i != home) wp.push_back(i);
    std::sort(wp.begin(), wp.end());
    double best = fieldnav::kInf;
    do {
        double c = m.at(home, wp.front());
        for (size_t i = 0; i + 1 < wp.size(); ++i) c += m.at(wp[i], wp[i + 1]);
        c += m.at(wp.back(), home);
        best = std::min(best, c);
    } while (std::next_permutation(wp.begin(), wp.end()));
    return best;
}

// Minimum total-distance assignment of detections to tracks (gated), by
// exhaustive enumeration over detection orderings; feasible for <= 4 objects.
inline double best_assignment_cost(const std::vector<fieldnav::Vec2>& tracks,
                                   const std::vector<fieldnav::Vec2>& detections, double gate) {
    const size_t nd = detections.size();
    std::vector<int> order(nd);
    std::iota(order.begin(), order.end(), 0);
    double best = fieldnav::kInf;
    do {
        // assign detection order[i] to track i (when both exist and gated)
        double cost = 0.0;
        int matched = 0;
        for (size_t i = 0; i < tracks.size() && i < nd; ++i) {
            double d = fieldnav::distance(tracks[i], detections[order[i]]);
            if (d <= gate) {
                cost += d;
                matched++;
            }
        }
        // prefer more matches, then lower cost
        double score = -1e6 * matched + cost;
        best = std::min(best, score);
    } while (std::next_permutation(order.begin(), order.end()));
    return best;
}

// Distance from a point to a polyline by independent per-segment numeric
// minimization (ternary search over the segment parameter).
inline double polyline_distance_numeric(fieldnav::Vec2 p, const std::vector<fieldnav::Vec2>& pts) {
    double best = fieldnav::kInf;
    for (size_t i = 0; i + 1 < pts.size(); ++i) {
        auto f = [&](double t) {
            return fieldnav::distance(p, pts[i] + (pts[i + 1] - pts[i]) * t);
        };
        double lo = 0.0, hi = 1.0;
        for (int it = 0; it < 200; ++it) {
            double m1 = lo + (hi - lo) / 3.0, m2 = hi - (hi - lo) / 3.0;
            if (f(m1) < f(m2)) {
                hi = m2;
            } else {
                lo = m1;
            }
        }
        best = std::min({best, f(lo), f(0.0), f(1.0)});
    }
    return best;
}

}  // namespace oracles
