#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <utility>
#include <vector>

#include "fieldnav/errors.hpp"
#include "fieldnav/geometry.hpp"
#include "fieldnav/rng.hpp"

namespace fieldnav {

struct EnergyParams {
    double mass = 450.0;            // kg
    double gravity = 9.81;          // m/s^2
    double rolling_coeff = 0.08;
    double drivetrain_eff = 0.85;   // (0, 1]
    double regen_factor = 0.0;      // [0, 1], downhill recovery
    double idle_power = 150.0;      // W
    double floor_energy_per_m = 0.0;  // J/m, lower clamp on motion energy

    void validate() const {
        if (mass <= 0.0) throw ConfigError("energy: mass must be > 0");
        if (drivetrain_eff <= 0.0 || drivetrain_eff > 1.0)
            throw ConfigError("energy: drivetrain_eff must be in (0, 1]");
        if (regen_factor < 0.0 || regen_factor > 1.0)
            throw ConfigError("energy: regen_factor must be in [0, 1]");
        if (floor_energy_per_m < 0.0)
            throw ConfigError("energy: floor_energy_per_m must be >= 0");
    }
};

// Gridded world model: elevation and slip sampled on a regular node grid,
// plus keep-out polygons. Read-only after finalize(); safe to query from
// multiple threads.
class TerrainMap {
public:
    Vec2 origin;
    double cell_size = 1.0;
    int width = 0;   // nodes along x
    int height = 0;  // nodes along y
    std::vector<double> elevation;  // row-major, width * height
    std::vector<double> slip;       // fraction in [0, 0.95]
    std::vector<Polygon> no_go;
    double max_slope = deg2rad(30.0);  // radians

    // Validates invariants and precomputes the slope field. Must be called
    // after the grids are filled in.
    void finalize() {
        if (cell_size <= 0.0) throw ConfigError("terrain: cell_size must be > 0");
        if (width < 2 || height < 2) throw ConfigError("terrain: grid must be at least 2x2");
        if (elevation.size() != static_cast<size_t>(width) * height)
            throw ConfigError("terrain: elevation size mismatch");
        if (slip.size() != elevation.size())
            throw ConfigError("terrain: slip size mismatch");
        for (double h : elevation)
            if (!std::isfinite(h)) throw ConfigError("terrain: elevation must be finite");
        for (double s : slip)
            if (s < 0.0 || s > 0.95) throw ConfigError("terrain: slip must be in [0, 0.95]");
        for (const auto& poly : no_go) {
            if (poly.size() < 3) throw ConfigError("terrain: no_go polygon needs >= 3 vertices");
            if (!polygon_is_simple(poly)) throw ConfigError("terrain: no_go polygon self-intersects");
        }
        build_slope_field();
    }

    bool in_bounds(Vec2 p) const {
        double u = (p.x - origin.x) / cell_size;
        double v = (p.y - origin.y) / cell_size;
        return u >= 0.0 && v >= 0.0 && u <= width - 1 && v <= height - 1;
    }

    Vec2 min_corner() const { return origin; }
    Vec2 max_corner() const {
        return {origin.x + (width - 1) * cell_size, origin.y + (height - 1) * cell_size};
    }

    double height_at(Vec2 p) const { return bilinear(elevation, p); }
    double slip_at(Vec2 p) const { return bilinear(slip, p); }
    double slope_at(Vec2 p) const { return bilinear(slope_, p); }

    bool is_traversable(Vec2 p) const {
        if (!in_bounds(p)) return false;
        if (slope_at(p) > max_slope) return false;
        for (const auto& poly : no_go)
            if (point_in_polygon(p, poly)) return false;
        return true;
    }

    double at(const std::vector<double>& grid, int i, int j) const {
        return grid[static_cast<size_t>(j) * width + i];
    }

private:
    std::vector<double> slope_;  // slope angle per node, radians

    double bilinear(const std::vector<double>& grid, Vec2 p) const {
        if (!in_bounds(p))
            throw OutOfBoundsError("terrain query outside grid");
        double u = (p.x - origin.x) / cell_size;
        double v = (p.y - origin.y) / cell_size;
        int i0 = std::min(static_cast<int>(u), width - 2);
        int j0 = std::min(static_cast<int>(v), height - 2);
        double fx = u - i0;
        double fy = v - j0;
        double v00 = at(grid, i0, j0), v10 = at(grid, i0 + 1, j0);
        double v01 = at(grid, i0, j0 + 1), v11 = at(grid, i0 + 1, j0 + 1);
        return v00 * (1 - fx) * (1 - fy) + v10 * fx * (1 - fy) +
               v01 * (1 - fx) * fy + v11 * fx * fy;
    }

    // central differences in the interior, one-sided at the borders
    void build_slope_field() {
        slope_.assign(elevation.size(), 0.0);
        for (int j = 0; j < height; ++j) {
            for (int i = 0; i < width; ++i) {
                int il = std::max(i - 1, 0), ir = std::min(i + 1, width - 1);
                int jl = std::max(j - 1, 0), jr = std::min(j + 1, height - 1);
                double dx = (at(elevation, ir, j) - at(elevation, il, j)) / ((ir - il) * cell_size);
                double dy = (at(elevation, i, jr) - at(elevation, i, jl)) / ((jr - jl) * cell_size);
                slope_[static_cast<size_t>(j) * width + i] = std::atan(std::hypot(dx, dy));
            }
        }
    }
};

// Straight segment traversability, sampled every cell_size/2.
inline bool segment_traversable(const TerrainMap& map, Vec2 p, Vec2 q) {
    double len = distance(p, q);
    int steps = std::max(1, static_cast<int>(std::ceil(len / (map.cell_size * 0.5))));
    for (int i = 0; i <= steps; ++i) {
        Vec2 s = p + (q - p) * (static_cast<double>(i) / steps);
        if (!map.is_traversable(s)) return false;
    }
    return true;
}

// Energy to drive the straight segment p -> q. Grade is taken from the
// endpoint heights, 3D length and slip are accumulated at cell_size/2
// resolution. Asymmetric: uphill pays full lift, downhill recovers only
// regen_factor of it.
inline double edge_energy(const TerrainMap& map, const EnergyParams& params, Vec2 p, Vec2 q) {
    if (!map.in_bounds(p) || !map.in_bounds(q))
        throw OutOfBoundsError("edge_energy endpoint outside grid");
    double horiz = distance(p, q);
    if (horiz <= 0.0) return 0.0;

    int steps = std::max(1, static_cast<int>(std::ceil(horiz / (map.cell_size * 0.5))));
    double length3d = 0.0;
    double slip_sum = 0.0;
    double prev_h = map.height_at(p);
    for (int i = 1; i <= steps; ++i) {
        Vec2 s = p + (q - p) * (static_cast<double>(i) / steps);
        double h = map.height_at(s);
        double d2 = horiz / steps;
        length3d += std::hypot(d2, h - prev_h);
        Vec2 mid = p + (q - p) * ((i - 0.5) / steps);
        slip_sum += map.slip_at(mid);
        prev_h = h;
    }
    double mean_slip = slip_sum / steps;

    double dh = map.height_at(q) - map.height_at(p);
    double theta = std::atan2(dh, horiz);
    double k = theta >= 0.0 ? 1.0 : params.regen_factor;
    double raw = params.mass * params.gravity * length3d *
                 (params.rolling_coeff * std::cos(theta) + k * std::sin(theta));
    double floored = std::max(raw, params.floor_energy_per_m * length3d);
    return floored / (params.drivetrain_eff * (1.0 - mean_slip));
}

// Optional stand-in for a learnt cost metric: exact per-edge overrides keyed
// by endpoint pairs quantized to millimetres.
class EdgeCostTable {
public:
    void set(Vec2 p, Vec2 q, double cost) { table_[key(p, q)] = cost; }

    const double* find(Vec2 p, Vec2 q) const {
        auto it = table_.find(key(p, q));
        return it == table_.end() ? nullptr : &it->second;
    }

    bool empty() const { return table_.empty(); }

private:
    using Key = std::pair<std::pair<std::int64_t, std::int64_t>,
                          std::pair<std::int64_t, std::int64_t>>;
    static Key key(Vec2 p, Vec2 q) {
        auto quant = [](double v) { return static_cast<std::int64_t>(std::llround(v * 1000.0)); };
        return {{quant(p.x), quant(p.y)}, {quant(q.x), quant(q.y)}};
    }
    std::map<Key, double> table_;
};

inline double edge_energy(const TerrainMap& map, const EnergyParams& params,
                          const EdgeCostTable& overrides, Vec2 p, Vec2 q) {
    if (const double* c = overrides.find(p, q)) return *c;
    return edge_energy(map, params, p, q);
}

inline TerrainMap make_flat_map(int width, int height, double cell_size,
                                Vec2 origin = {0, 0}, double elevation = 0.0,
                                double slip = 0.0) {
    TerrainMap map;
    map.origin = origin;
    map.cell_size = cell_size;
    map.width = width;
    map.height = height;
    map.elevation.assign(static_cast<size_t>(width) * height, elevation);
    map.slip.assign(map.elevation.size(), slip);
    map.finalize();
    return map;
}

struct TerrainGenParams {
    int width = 64;
    int height = 64;
    double cell_size = 2.0;
    Vec2 origin{0, 0};
    std::uint64_t seed = 1;
    double hill_amplitude = 0.0;   // m
    double hill_scale = 30.0;      // m, horizontal feature size
    int octaves = 3;
    double base_elevation = 0.0;
    double slip_base = 0.0;
    double slip_amplitude = 0.0;
    double slip_scale = 25.0;
    // linear ramp: elevation += grade * dot(p - origin, dir(angle))
    struct Ramp {
        double angle = 0.0;  // radians
        double grade = 0.0;  // m per m
    };
    std::vector<Ramp> ramps;
    std::vector<Polygon> no_go;
    double max_slope = deg2rad(30.0);
};

namespace detail {

// Seeded value noise: lattice of pseudo-random values, smoothstep-blended.
inline double value_noise(std::uint64_t seed, double x, double y) {
    auto lattice = [seed](std::int64_t ix, std::int64_t iy) {
        std::uint64_t h = seed;
        h ^= static_cast<std::uint64_t>(ix) * 0x8da6b343ULL;
        h ^= static_cast<std::uint64_t>(iy) * 0xd8163841ULL;
        return (splitmix64(h) >> 11) * 0x1.0p-53;
    };
    std::int64_t ix = static_cast<std::int64_t>(std::floor(x));
    std::int64_t iy = static_cast<std::int64_t>(std::floor(y));
    double fx = x - ix, fy = y - iy;
    auto smooth = [](double t) { return t * t * (3.0 - 2.0 * t); };
    double sx = smooth(fx), sy = smooth(fy);
    double v00 = lattice(ix, iy), v10 = lattice(ix + 1, iy);
    double v01 = lattice(ix, iy + 1), v11 = lattice(ix + 1, iy + 1);
    return (v00 * (1 - sx) + v10 * sx) * (1 - sy) + (v01 * (1 - sx) + v11 * sx) * sy;
}

inline double fractal_noise(std::uint64_t seed, double x, double y, int octaves) {
    double sum = 0.0, amp = 1.0, freq = 1.0, total = 0.0;
    for (int o = 0; o < octaves; ++o) {
        sum += amp * value_noise(seed + o * 1013ULL, x * freq, y * freq);
        total += amp;
        amp *= 0.5;
        freq *= 2.0;
    }
    return sum / total;  // in [0, 1]
}

}  // namespace detail

inline TerrainMap generate_terrain(const TerrainGenParams& gen) {
    TerrainMap map;
    map.origin = gen.origin;
    map.cell_size = gen.cell_size;
    map.width = gen.width;
    map.height = gen.height;
    map.max_slope = gen.max_slope;
    map.no_go = gen.no_go;
    map.elevation.resize(static_cast<size_t>(gen.width) * gen.height);
    map.slip.resize(map.elevation.size());
    for (int j = 0; j < gen.height; ++j) {
        for (int i = 0; i < gen.width; ++i) {
            Vec2 p{gen.origin.x + i * gen.cell_size, gen.origin.y + j * gen.cell_size};
            double h = gen.base_elevation;
            if (gen.hill_amplitude != 0.0)
                h += gen.hill_amplitude *
                     (detail::fractal_noise(gen.seed, p.x / gen.hill_scale, p.y / gen.hill_scale,
                                            gen.octaves) - 0.5);
            for (const auto& ramp : gen.ramps)
                h += ramp.grade * dot(p - gen.origin, heading_dir(ramp.angle));
            double s = gen.slip_base;
            if (gen.slip_amplitude != 0.0)
                s += gen.slip_amplitude *
                     detail::fractal_noise(gen.seed ^ 0xabcdefULL, p.x / gen.slip_scale,
                                           p.y / gen.slip_scale, gen.octaves);
            map.elevation[static_cast<size_t>(j) * gen.width + i] = h;
            map.slip[static_cast<size_t>(j) * gen.width + i] = std::clamp(s, 0.0, 0.95);
        }
    }
    map.finalize();
    return map;
}

}  // namespace fieldnav
