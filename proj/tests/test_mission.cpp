#include <doctest.h>

#include <cmath>

#include "fieldnav/mission.hpp"
#include "fieldnav/rng.hpp"
#include "oracles.hpp"

using namespace fieldnav;

namespace {

CostMatrix random_matrix(Rng& rng, int n) {
    CostMatrix m;
    m.n = n;
    m.cost.assign(static_cast<size_t>(n) * n, 0.0);
    m.paths.assign(static_cast<size_t>(n) * n, {});
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (i != j) m.at(i, j) = rng.uniform(1.0, 100.0);
    return m;
}

CostMatrix matrix_from(std::vector<std::vector<double>> rows) {
    CostMatrix m;
    m.n = static_cast<int>(rows.size());
    m.cost.assign(static_cast<size_t>(m.n) * m.n, 0.0);
    m.paths.assign(static_cast<size_t>(m.n) * m.n, {});
    for (int i = 0; i < m.n; ++i)
        for (int j = 0; j < m.n; ++j) m.at(i, j) = rows[i][j];
    return m;
}

bool valid_tour(const Tour& t, int n, int home) {
    if (static_cast<int>(t.order.size()) != n + 1) return false;
    if (t.order.front() != home || t.order.back() != home) return false;
    std::vector<int> seen(n, 0);
    for (size_t i = 0; i + 1 < t.order.size(); ++i) seen[t.order[i]]++;
    for (int i = 0; i < n; ++i)
        if (seen[i] != 1) return false;
    return true;
}

}  // namespace

TEST_CASE("solve_tour: single waypoint") {
    CostMatrix m = matrix_from({{0, 7}, {3, 0}});
    Tour t = solve_tour(m, 0);
    CHECK(t.order == std::vector<int>{0, 1, 0});
    CHECK(t.total_cost == doctest::Approx(10.0));
}

TEST_CASE("solve_tour: matches the permutation oracle on random instances") {
    Rng rng(31);
    for (int trial = 0; trial < 30; ++trial) {
        int n = 3 + static_cast<int>(rng.uniform_int(6));  // 3..8 incl. home
        CostMatrix m = random_matrix(rng, n);
        Tour t = solve_tour(m, 0);
        CHECK(valid_tour(t, n, 0));
        CHECK(t.total_cost == doctest::Approx(oracles::brute_force_tour_cost(m, 0)));
    }
}

TEST_CASE("solve_tour: picks the cheaper orientation of an asymmetric triangle") {
    // forward loop 0->1->2->3->0 costs 4, reverse costs 40
    CostMatrix m = matrix_from({{0, 1, 10, 10},
                                {10, 0, 1, 10},
                                {10, 10, 0, 1},
                                {1, 10, 10, 0}});
    Tour t = solve_tour(m, 0);
    CHECK(t.order == std::vector<int>{0, 1, 2, 3, 0});
    CHECK(t.total_cost == doctest::Approx(4.0));
}

TEST_CASE("solve_tour: disconnected matrix throws") {
    CostMatrix m = matrix_from({{0, 1, 1}, {1, 0, kInf}, {1, 1, 0}});
    CHECK_THROWS_AS(solve_tour(m, 0), DisconnectedError);
}

TEST_CASE("solve_tour: heuristic never beats exact, exact never beats heuristic's tour") {
    Rng rng(53);
    for (int trial = 0; trial < 10; ++trial) {
        CostMatrix m = random_matrix(rng, 9);
        Tour exact = detail::solve_exact(m, 0);
        Tour heur = detail::solve_heuristic(m, 0);
        CHECK(valid_tour(heur, 9, 0));
        CHECK(exact.total_cost <= heur.total_cost + 1e-9);
    }
}

TEST_CASE("solve_tour: heuristic path used above the exact cutoff") {
    Rng rng(57);
    CostMatrix m = random_matrix(rng, 15);  // 14 waypoints > 12
    Tour t = solve_tour(m, 0);
    CHECK(valid_tour(t, 15, 0));
    double relaxed = detail::tour_cost(m, t.order);
    CHECK(t.total_cost == doctest::Approx(relaxed));
}

TEST_CASE("solve_tour: uniform scaling preserves the optimal order") {
    Rng rng(71);
    for (int trial = 0; trial < 10; ++trial) {
        CostMatrix m = random_matrix(rng, 7);
        Tour base = solve_tour(m, 0);
        CostMatrix scaled = m;
        for (auto& c : scaled.cost) c *= 37.5;
        Tour t2 = solve_tour(scaled, 0);
        CHECK(t2.order == base.order);
        CHECK(t2.total_cost == doctest::Approx(base.total_cost * 37.5));
    }
}

namespace {

struct StitchFixture {
    TerrainMap map = make_flat_map(21, 21, 1.0);
    Roadmap rm;
    CostMatrix costs;
    Tour tour;

    StitchFixture() {
        // straight line: home(0) - mid(2) - A(1)
        rm.add_node({2, 10});
        rm.add_node({18, 10});
        rm.add_node({10, 10});
        rm.waypoint_nodes = {0, 1};
        EnergyParams p;
        rm.add_edge(0, 2, edge_energy(map, p, {2, 10}, {10, 10}), 8.0);
        rm.add_edge(2, 0, edge_energy(map, p, {10, 10}, {2, 10}), 8.0);
        rm.add_edge(2, 1, edge_energy(map, p, {10, 10}, {18, 10}), 8.0);
        rm.add_edge(1, 2, edge_energy(map, p, {18, 10}, {10, 10}), 8.0);
        costs = goal_cost_matrix(rm);
        tour = solve_tour(costs, 0);
    }
};

}  // namespace

TEST_CASE("stitch_reference_path: out-and-back through a straight roadmap") {
    StitchFixture f;
    ReferencePath path = stitch_reference_path(f.rm, f.costs, f.tour, f.map);
    REQUIRE(path.points.size() == 5);
    CHECK(path.points[0] == Vec2{2, 10});
    CHECK(path.points[2] == Vec2{18, 10});
    CHECK(path.points[4] == Vec2{2, 10});
    CHECK(path.total_length() == doctest::Approx(32.0));
    REQUIRE(path.stop_arc.size() == 3);
    CHECK(path.stop_arc[1] == doctest::Approx(16.0));
    // symmetric about A
    CHECK(distance(path.points[1], path.points[3]) == doctest::Approx(0.0));
}

TEST_CASE("stitch_reference_path: stitched length equals the sum of leg lengths") {
    TerrainMap map = make_flat_map(41, 41, 1.0);
    EnergyParams p;
    Roadmap rm = build_prm(map, p, {{3, 3}, {30, 8}, {12, 33}, {35, 35}}, 120, 8, 91);
    CostMatrix costs = goal_cost_matrix(rm);
    Tour tour = solve_tour(costs, 0);
    ReferencePath path = stitch_reference_path(rm, costs, tour, map);

    double legs = 0.0;
    for (size_t leg = 0; leg + 1 < tour.order.size(); ++leg) {
        const auto& nodes = costs.path(tour.order[leg], tour.order[leg + 1]);
        for (size_t i = 0; i + 1 < nodes.size(); ++i)
            legs += distance(rm.nodes[nodes[i]], rm.nodes[nodes[i + 1]]);
    }
    CHECK(path.total_length() == doctest::Approx(legs).epsilon(1e-9));
}

TEST_CASE("stitch_reference_path: arc length strictly increases") {
    TerrainMap map = make_flat_map(41, 41, 1.0);
    EnergyParams p;
    Rng rng(5);
    for (int trial = 0; trial < 5; ++trial) {
        std::vector<Vec2> pts{{3, 3}};
        for (int w = 0; w < 4; ++w)
            pts.push_back({rng.uniform(2.0, 38.0), rng.uniform(2.0, 38.0)});
        Roadmap rm = build_prm(map, p, pts, 100, 8, 100 + trial);
        CostMatrix costs = goal_cost_matrix(rm);
        Tour tour = solve_tour(costs, 0);
        ReferencePath path = stitch_reference_path(rm, costs, tour, map);
        for (size_t i = 0; i + 1 < path.arc.size(); ++i) CHECK(path.arc[i] < path.arc[i + 1]);
        CHECK(path.stop_arc.size() == tour.order.size());
    }
}

TEST_CASE("stitch_reference_path: missing cached path throws") {
    StitchFixture f;
    f.costs.paths[1] = {};  // wipe home->A
    CHECK_THROWS_AS(stitch_reference_path(f.rm, f.costs, f.tour, f.map), MissingCachedPathError);
}

TEST_CASE("stitch_reference_path: 3D arc length uses terrain heights") {
    // 10 m horizontal with a 0.2 grade: 3D length > 2D length
    TerrainMap map;
    map.cell_size = 1.0;
    map.width = 21;
    map.height = 5;
    map.elevation.resize(21 * 5);
    map.slip.assign(map.elevation.size(), 0.0);
    for (int j = 0; j < 5; ++j)
        for (int i = 0; i < 21; ++i) map.elevation[static_cast<size_t>(j) * 21 + i] = 0.2 * i;
    map.finalize();
    Roadmap rm;
    rm.add_node({2, 2});
    rm.add_node({12, 2});
    rm.waypoint_nodes = {0, 1};
    EnergyParams p;
    rm.add_edge(0, 1, 1.0, 10.0);
    rm.add_edge(1, 0, 1.0, 10.0);
    CostMatrix costs = goal_cost_matrix(rm);
    Tour tour = solve_tour(costs, 0);
    ReferencePath path = stitch_reference_path(rm, costs, tour, map);
    CHECK(path.stop_arc[1] == doctest::Approx(std::hypot(10.0, 2.0)));
}

TEST_CASE("reference path queries: point, tangent, projection") {
    ReferencePath path;
    path.points = {{0, 0}, {10, 0}, {10, 10}};
    path.arc = {0, 10, 20};
    path.source = {-1, -1, -1};
    path.stop_arc = {0, 20};
    path.stop_waypoint = {0, 1};

    CHECK(path.point_at(5.0) == Vec2{5, 0});
    CHECK(path.point_at(15.0) == Vec2{10, 5});
    CHECK(path.tangent_at(5.0) == Vec2{1, 0});
    CHECK(path.tangent_at(15.0) == Vec2{0, 1});
    CHECK(path.project({3.0, 2.0}, 0.0, 20.0) == doctest::Approx(3.0));
    CHECK(path.project({12.0, 3.0}, 0.0, 20.0) == doctest::Approx(13.0));
    // window restriction keeps the projection on the first segment
    CHECK(path.project({12.0, 3.0}, 0.0, 10.0) == doctest::Approx(10.0));
    CHECK(path.distance_to({3.0, 2.0}, 0.0, 20.0) == doctest::Approx(2.0));
}
