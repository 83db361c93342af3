#include <doctest.h>

#include "fieldnav/rng.hpp"
#include "fieldnav/terrain.hpp"

using namespace fieldnav;

namespace {

// uniform grade along +x; dh per metre = grade
TerrainMap make_ramp(double grade, int size = 21, double cell = 1.0) {
    TerrainMap map;
    map.cell_size = cell;
    map.width = size;
    map.height = size;
    map.elevation.resize(static_cast<size_t>(size) * size);
    map.slip.assign(map.elevation.size(), 0.0);
    for (int j = 0; j < size; ++j)
        for (int i = 0; i < size; ++i)
            map.elevation[static_cast<size_t>(j) * size + i] = grade * i * cell;
    map.finalize();
    return map;
}

EnergyParams unit_params() {
    EnergyParams p;
    p.mass = 100.0;
    p.gravity = 9.81;
    p.rolling_coeff = 0.1;
    p.drivetrain_eff = 1.0;
    p.regen_factor = 0.0;
    p.floor_energy_per_m = 0.0;
    return p;
}

}  // namespace

TEST_CASE("height_at: constant field") {
    TerrainMap map = make_flat_map(8, 8, 1.0, {0, 0}, 5.0);
    CHECK(map.height_at({0.0, 0.0}) == doctest::Approx(5.0));
    CHECK(map.height_at({3.7, 6.2}) == doctest::Approx(5.0));
    CHECK(map.height_at({7.0, 7.0}) == doctest::Approx(5.0));
}

TEST_CASE("height_at: exact at grid nodes") {
    TerrainMap map = make_flat_map(4, 4, 2.0);
    map.elevation[1 * 4 + 2] = 2.0;  // node (2,1) in cells -> (4.0, 2.0) in metres
    map.finalize();
    CHECK(map.height_at({4.0, 2.0}) == 2.0);
}

TEST_CASE("height_at: hand-evaluated bilinear at cell centre") {
    TerrainMap map;
    map.cell_size = 1.0;
    map.width = 2;
    map.height = 2;
    map.elevation = {0.0, 0.0, 0.0, 4.0};
    map.slip = {0.0, 0.0, 0.0, 0.0};
    map.finalize();
    CHECK(map.height_at({0.5, 0.5}) == doctest::Approx(1.0));
}

TEST_CASE("height_at: out of bounds throws") {
    TerrainMap map = make_flat_map(4, 4, 1.0);
    CHECK_THROWS_AS(map.height_at({-0.1, 0.0}), OutOfBoundsError);
    CHECK_THROWS_AS(map.height_at({0.0, 3.5}), OutOfBoundsError);
    CHECK_NOTHROW(map.height_at({3.0, 3.0}));
}

TEST_CASE("height_at stays within surrounding node values") {
    Rng rng(99);
    TerrainMap map = make_flat_map(10, 10, 1.5);
    for (auto& h : map.elevation) h = rng.uniform(-5.0, 5.0);
    map.finalize();
    for (int trial = 0; trial < 200; ++trial) {
        Vec2 p{rng.uniform(0.0, 13.5), rng.uniform(0.0, 13.5)};
        int i0 = std::min(static_cast<int>(p.x / 1.5), 8);
        int j0 = std::min(static_cast<int>(p.y / 1.5), 8);
        double lo = kInf, hi = -kInf;
        for (int dj = 0; dj <= 1; ++dj)
            for (int di = 0; di <= 1; ++di) {
                double v = map.at(map.elevation, i0 + di, j0 + dj);
                lo = std::min(lo, v);
                hi = std::max(hi, v);
            }
        double h = map.height_at(p);
        CHECK(h >= lo - 1e-12);
        CHECK(h <= hi + 1e-12);
    }
}

TEST_CASE("is_traversable: interior of a flat map") {
    TerrainMap map = make_flat_map(10, 10, 1.0);
    CHECK(map.is_traversable({4.5, 4.5}));
    CHECK_FALSE(map.is_traversable({-1.0, 4.0}));  // out of bounds is just false
}

TEST_CASE("is_traversable: no-go polygon excludes points") {
    TerrainMap map = make_flat_map(10, 10, 1.0);
    map.no_go.push_back({{2, 2}, {6, 2}, {6, 6}, {2, 6}});
    map.finalize();
    CHECK_FALSE(map.is_traversable({4.0, 4.0}));
    CHECK(map.is_traversable({8.0, 8.0}));
}

TEST_CASE("is_traversable: slope gate on a synthetic ramp") {
    double grade35 = std::tan(deg2rad(35.0));
    TerrainMap steep = make_ramp(grade35);
    steep.max_slope = deg2rad(30.0);
    CHECK_FALSE(steep.is_traversable({10.0, 10.0}));

    double grade25 = std::tan(deg2rad(25.0));
    TerrainMap gentle = make_ramp(grade25);
    gentle.max_slope = deg2rad(30.0);
    CHECK(gentle.is_traversable({10.0, 10.0}));
}

TEST_CASE("terrain invariant validation") {
    TerrainMap map = make_flat_map(4, 4, 1.0);
    map.slip[0] = 0.99;
    CHECK_THROWS_AS(map.finalize(), ConfigError);
    map.slip[0] = 0.0;
    map.no_go.push_back({{0, 0}, {2, 2}});  // two vertices
    CHECK_THROWS_AS(map.finalize(), ConfigError);
    map.no_go.back() = {{0, 0}, {2, 2}, {2, 0}, {0, 2}};  // bowtie
    CHECK_THROWS_AS(map.finalize(), ConfigError);
}

TEST_CASE("edge_energy: flat 10 m evaluates the formula exactly") {
    TerrainMap map = make_flat_map(21, 21, 1.0);
    double e = edge_energy(map, unit_params(), {2.0, 10.0}, {12.0, 10.0});
    CHECK(e == doctest::Approx(981.0).epsilon(1e-9));
}

TEST_CASE("edge_energy: +1 m rise over 10 m doubles the flat cost") {
    TerrainMap map = make_ramp(0.1);
    double e = edge_energy(map, unit_params(), {2.0, 10.0}, {12.0, 10.0});
    CHECK(e == doctest::Approx(1962.0).epsilon(1e-9));
}

TEST_CASE("edge_energy: downhill with zero regen pays rolling only") {
    TerrainMap map = make_ramp(0.1);
    double e = edge_energy(map, unit_params(), {12.0, 10.0}, {2.0, 10.0});
    CHECK(e == doctest::Approx(981.0).epsilon(1e-9));
}

TEST_CASE("edge_energy: zero distance is zero energy") {
    TerrainMap map = make_flat_map(8, 8, 1.0);
    CHECK(edge_energy(map, unit_params(), {3.0, 3.0}, {3.0, 3.0}) == 0.0);
}

TEST_CASE("edge_energy: out of bounds endpoint throws") {
    TerrainMap map = make_flat_map(8, 8, 1.0);
    CHECK_THROWS_AS(edge_energy(map, unit_params(), {3.0, 3.0}, {9.0, 3.0}), OutOfBoundsError);
}

TEST_CASE("edge_energy: nonnegative even on steep regen downhill") {
    TerrainMap map = make_ramp(0.5);
    EnergyParams p = unit_params();
    p.regen_factor = 1.0;
    double e = edge_energy(map, p, {15.0, 10.0}, {5.0, 10.0});
    CHECK(e >= 0.0);
}

TEST_CASE("edge_energy: floor clamp applies per metre") {
    TerrainMap map = make_ramp(0.5);
    EnergyParams p = unit_params();
    p.regen_factor = 1.0;
    p.floor_energy_per_m = 10.0;
    Vec2 a{15.0, 10.0}, b{5.0, 10.0};
    double d3 = std::hypot(10.0, 5.0);
    CHECK(edge_energy(map, p, a, b) == doctest::Approx(10.0 * d3).epsilon(1e-9));
}

TEST_CASE("edge_energy: strictly increases with grade and slip") {
    EnergyParams p = unit_params();
    double prev = 0.0;
    for (double grade : {0.0, 0.05, 0.1, 0.2, 0.3}) {
        TerrainMap map = make_ramp(grade);
        double e = edge_energy(map, p, {2.0, 10.0}, {12.0, 10.0});
        CHECK(e > prev);
        prev = e;
    }
    prev = 0.0;
    for (double slip : {0.0, 0.1, 0.2, 0.3}) {
        TerrainMap map = make_flat_map(21, 21, 1.0, {0, 0}, 0.0, slip);
        double e = edge_energy(map, p, {2.0, 10.0}, {12.0, 10.0});
        CHECK(e > prev);
        prev = e;
    }
}

TEST_CASE("edge_energy: uphill costs at least downhill for regen < 1") {
    Rng rng(7);
    EnergyParams p = unit_params();
    for (int trial = 0; trial < 50; ++trial) {
        TerrainMap map = make_ramp(rng.uniform(0.0, 0.3));
        p.regen_factor = rng.uniform(0.0, 0.99);
        Vec2 a{rng.uniform(1.0, 8.0), 10.0};
        Vec2 b{rng.uniform(12.0, 19.0), 10.0};  // b is uphill of a
        CHECK(edge_energy(map, p, a, b) >= edge_energy(map, p, b, a) - 1e-9);
    }
}

TEST_CASE("edge cost override table wins over the physics model") {
    TerrainMap map = make_flat_map(8, 8, 1.0);
    EdgeCostTable table;
    Vec2 a{1, 1}, b{5, 1};
    table.set(a, b, 42.0);
    CHECK(edge_energy(map, unit_params(), table, a, b) == 42.0);
    CHECK(edge_energy(map, unit_params(), table, b, a) ==
          doctest::Approx(edge_energy(map, unit_params(), b, a)));
}

TEST_CASE("generate_terrain: deterministic per seed, respects slip bounds") {
    TerrainGenParams g;
    g.width = 32;
    g.height = 32;
    g.seed = 12;
    g.hill_amplitude = 3.0;
    g.slip_base = 0.1;
    g.slip_amplitude = 0.4;
    TerrainMap a = generate_terrain(g);
    TerrainMap b = generate_terrain(g);
    CHECK(a.elevation == b.elevation);
    CHECK(a.slip == b.slip);
    for (double s : a.slip) {
        CHECK(s >= 0.0);
        CHECK(s <= 0.95);
    }
    g.seed = 13;
    TerrainMap c = generate_terrain(g);
    CHECK(a.elevation != c.elevation);
}
