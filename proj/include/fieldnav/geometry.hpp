#pragma once

#include <cmath>
#include <limits>
#include <vector>

namespace fieldnav {

constexpr double kPi = 3.14159265358979323846;
constexpr double kInf = std::numeric_limits<double>::infinity();

inline double deg2rad(double d) { return d * kPi / 180.0; }
inline double rad2deg(double r) { return r * 180.0 / kPi; }

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double s) const { return {x * s, y * s}; }
    Vec2 operator/(double s) const { return {x / s, y / s}; }
    Vec2 operator-() const { return {-x, -y}; }
    Vec2& operator+=(Vec2 o) { x += o.x; y += o.y; return *this; }
    Vec2& operator-=(Vec2 o) { x -= o.x; y -= o.y; return *this; }
    bool operator==(const Vec2&) const = default;
};

inline Vec2 operator*(double s, Vec2 v) { return v * s; }
inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
// z-component of the 3D cross product
inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double norm_sq(Vec2 v) { return v.x * v.x + v.y * v.y; }
inline double norm(Vec2 v) { return std::sqrt(norm_sq(v)); }
inline double distance(Vec2 a, Vec2 b) { return norm(a - b); }
inline double distance_sq(Vec2 a, Vec2 b) { return norm_sq(a - b); }
// counter-clockwise perpendicular
inline Vec2 perp(Vec2 v) { return {-v.y, v.x}; }

inline Vec2 normalized(Vec2 v) {
    double n = norm(v);
    if (n <= 0.0) return {0.0, 0.0};
    return v / n;
}

inline Vec2 rotated(Vec2 v, double angle) {
    double c = std::cos(angle), s = std::sin(angle);
    return {c * v.x - s * v.y, s * v.x + c * v.y};
}

inline Vec2 heading_dir(double heading) { return {std::cos(heading), std::sin(heading)}; }

// wrap to (-pi, pi]
inline double wrap_angle(double a) {
    a = std::fmod(a, 2.0 * kPi);
    if (a <= -kPi) a += 2.0 * kPi;
    if (a > kPi) a -= 2.0 * kPi;
    return a;
}

struct Pose {
    Vec2 pos;
    double heading = 0.0;
};

inline Vec2 closest_point_on_segment(Vec2 p, Vec2 a, Vec2 b) {
    Vec2 ab = b - a;
    double len_sq = norm_sq(ab);
    if (len_sq <= 0.0) return a;
    double t = dot(p - a, ab) / len_sq;
    t = std::fmax(0.0, std::fmin(1.0, t));
    return a + ab * t;
}

inline double point_segment_distance(Vec2 p, Vec2 a, Vec2 b) {
    return distance(p, closest_point_on_segment(p, a, b));
}

using Polygon = std::vector<Vec2>;

// even-odd crossing rule
inline bool point_in_polygon(Vec2 p, const Polygon& poly) {
    bool inside = false;
    const size_t n = poly.size();
    for (size_t i = 0, j = n - 1; i < n; j = i++) {
        const Vec2& a = poly[i];
        const Vec2& b = poly[j];
        if ((a.y > p.y) != (b.y > p.y)) {
            double x_cross = a.x + (p.y - a.y) / (b.y - a.y) * (b.x - a.x);
            if (p.x < x_cross) inside = !inside;
        }
    }
    return inside;
}

inline bool segments_properly_intersect(Vec2 a, Vec2 b, Vec2 c, Vec2 d) {
    auto orient = [](Vec2 p, Vec2 q, Vec2 r) {
        double v = cross(q - p, r - p);
        return (v > 0.0) - (v < 0.0);
    };
    int o1 = orient(a, b, c), o2 = orient(a, b, d);
    int o3 = orient(c, d, a), o4 = orient(c, d, b);
    return o1 != o2 && o3 != o4 && o1 != 0 && o2 != 0 && o3 != 0 && o4 != 0;
}

// simple = no two non-adjacent edges intersect; O(n^2), polygons here are tiny
inline bool polygon_is_simple(const Polygon& poly) {
    const size_t n = poly.size();
    if (n < 3) return false;
    for (size_t i = 0; i < n; ++i) {
        for (size_t j = i + 1; j < n; ++j) {
            if (j == i || (j + 1) % n == i || (i + 1) % n == j) continue;
            if (segments_properly_intersect(poly[i], poly[(i + 1) % n],
                                            poly[j], poly[(j + 1) % n]))
                return false;
        }
    }
    return true;
}

}  // namespace fieldnav
