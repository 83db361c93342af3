#pragma once

#include <algorithm>
#include <cstdint>
#include <queue>
#include <string>
#include <vector>

#include "fieldnav/errors.hpp"
#include "fieldnav/geometry.hpp"
#include "fieldnav/rng.hpp"
#include "fieldnav/terrain.hpp"

namespace fieldnav {

struct RoadmapEdge {
    int to = -1;
    double cost = 0.0;    // J
    double length = 0.0;  // m, 2D
};

struct Roadmap {
    std::vector<Vec2> nodes;
    std::vector<std::vector<RoadmapEdge>> adj;  // per-node, sorted by `to`
    std::vector<int> waypoint_nodes;            // node ids of [home, w1, ..., wn]

    int add_node(Vec2 p) {
        nodes.push_back(p);
        adj.emplace_back();
        return static_cast<int>(nodes.size()) - 1;
    }

    void add_edge(int from, int to, double cost, double length) {
        auto& edges = adj[from];
        auto it = std::lower_bound(edges.begin(), edges.end(), to,
                                   [](const RoadmapEdge& e, int t) { return e.to < t; });
        if (it != edges.end() && it->to == to) return;  // keep first, costs are equal anyway
        edges.insert(it, RoadmapEdge{to, cost, length});
    }
};

// PRM over traversable terrain. Nodes are the given points (home first by
// convention) plus n_samples rejection-sampled free points; each node is
// linked to its k nearest neighbours whenever the straight segment is
// traversable, with a directed energy cost each way.
inline Roadmap build_prm(const TerrainMap& map, const EnergyParams& params,
                         const std::vector<Vec2>& points, int n_samples, int k,
                         std::uint64_t seed, const EdgeCostTable* overrides = nullptr) {
    for (size_t i = 0; i < points.size(); ++i)
        if (!map.is_traversable(points[i]))
            throw UntraversableWaypointError(static_cast<int>(i));

    Roadmap rm;
    for (Vec2 p : points) rm.waypoint_nodes.push_back(rm.add_node(p));

    Rng rng(seed);
    Vec2 lo = map.min_corner(), hi = map.max_corner();
    long attempts = 0;
    const long max_attempts = 1000L * std::max(n_samples, 1);
    for (int s = 0; s < n_samples;) {
        if (++attempts > max_attempts)
            throw SamplingExhaustedError("PRM sampling exhausted after " +
                                         std::to_string(max_attempts) + " attempts");
        Vec2 p{rng.uniform(lo.x, hi.x), rng.uniform(lo.y, hi.y)};
        if (!map.is_traversable(p)) continue;
        rm.add_node(p);
        ++s;
    }

    const int n = static_cast<int>(rm.nodes.size());
    std::vector<std::pair<double, int>> order(n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) order[j] = {distance_sq(rm.nodes[i], rm.nodes[j]), j};
        order[i].first = kInf;  // skip self
        int take = std::min(k, n - 1);
        std::partial_sort(order.begin(), order.begin() + take, order.end());
        for (int t = 0; t < take; ++t) {
            int j = order[t].second;
            if (!segment_traversable(map, rm.nodes[i], rm.nodes[j])) continue;
            double len = distance(rm.nodes[i], rm.nodes[j]);
            double cij = overrides ? edge_energy(map, params, *overrides, rm.nodes[i], rm.nodes[j])
                                   : edge_energy(map, params, rm.nodes[i], rm.nodes[j]);
            double cji = overrides ? edge_energy(map, params, *overrides, rm.nodes[j], rm.nodes[i])
                                   : edge_energy(map, params, rm.nodes[j], rm.nodes[i]);
            rm.add_edge(i, j, cij, len);
            rm.add_edge(j, i, cji, len);
        }
    }
    return rm;
}

struct PathResult {
    std::vector<int> nodes;
    double cost = 0.0;
};

// Uniform-cost search; ties broken toward the smaller node id by the queue
// ordering, so results are deterministic for a given adjacency.
inline PathResult shortest_path(const Roadmap& rm, int a, int b) {
    const int n = static_cast<int>(rm.nodes.size());
    if (a < 0 || a >= n || b < 0 || b >= n)
        throw OutOfBoundsError("shortest_path: invalid node id");
    if (a == b) return {{a}, 0.0};

    std::vector<double> dist(n, kInf);
    std::vector<int> parent(n, -1);
    std::vector<char> done(n, 0);
    using Item = std::pair<double, int>;
    std::priority_queue<Item, std::vector<Item>, std::greater<Item>> pq;
    dist[a] = 0.0;
    pq.push({0.0, a});
    while (!pq.empty()) {
        auto [d, u] = pq.top();
        pq.pop();
        if (done[u]) continue;
        done[u] = 1;
        if (u == b) break;
        for (const auto& e : rm.adj[u]) {
            double nd = d + e.cost;
            if (nd < dist[e.to]) {
                dist[e.to] = nd;
                parent[e.to] = u;
                pq.push({nd, e.to});
            }
        }
    }
    if (!done[b]) throw NoPathError(a, b);

    PathResult res;
    res.cost = dist[b];
    for (int v = b; v != -1; v = parent[v]) res.nodes.push_back(v);
    std::reverse(res.nodes.begin(), res.nodes.end());
    return res;
}

struct CostMatrix {
    int n = 0;                            // waypoints incl. home
    std::vector<double> cost;             // n*n, +inf marks "no path"
    std::vector<std::vector<int>> paths;  // cached node sequences per ordered pair
    std::vector<int> waypoint_nodes;      // roadmap node id per matrix index
    std::vector<std::string> warnings;

    double at(int i, int j) const { return cost[static_cast<size_t>(i) * n + j]; }
    double& at(int i, int j) { return cost[static_cast<size_t>(i) * n + j]; }
    const std::vector<int>& path(int i, int j) const {
        return paths[static_cast<size_t>(i) * n + j];
    }
};

// Pairwise lowest-energy costs between the roadmap's registered waypoints.
// Unreachable pairs become +inf entries plus a warning.
inline CostMatrix goal_cost_matrix(const Roadmap& rm) {
    const int n = static_cast<int>(rm.waypoint_nodes.size());
    CostMatrix m;
    m.n = n;
    m.cost.assign(static_cast<size_t>(n) * n, 0.0);
    m.paths.assign(static_cast<size_t>(n) * n, {});
    m.waypoint_nodes = rm.waypoint_nodes;
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            if (i == j) {
                m.at(i, j) = 0.0;
                m.paths[static_cast<size_t>(i) * n + j] = {rm.waypoint_nodes[i]};
                continue;
            }
            try {
                PathResult pr = shortest_path(rm, rm.waypoint_nodes[i], rm.waypoint_nodes[j]);
                m.at(i, j) = pr.cost;
                m.paths[static_cast<size_t>(i) * n + j] = std::move(pr.nodes);
            } catch (const NoPathError&) {
                m.at(i, j) = kInf;
                m.warnings.push_back("no path between waypoints " + std::to_string(i) +
                                     " and " + std::to_string(j));
            }
        }
    }
    return m;
}

}  // namespace fieldnav
