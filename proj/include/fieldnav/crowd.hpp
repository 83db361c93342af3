#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "fieldnav/geometry.hpp"
#include "fieldnav/rng.hpp"

namespace fieldnav {

struct AgentScript {
    std::vector<Vec2> goals;
    bool loop = false;
};

struct AgentState {
    int id = 0;
    Vec2 pos;
    Vec2 vel;
    double radius = 0.4;
    double pref_speed = 1.3;
    double max_speed = 1.75;
    AgentScript script;
    int goal_index = 0;
    bool script_done = false;
    double spawn_time = 0.0;
    std::string group;
};

struct OrcaParams {
    double time_horizon = 2.0;    // s
    double neighbor_dist = 10.0;  // m
    double responsibility = 0.5;  // shared avoidance fraction between agents
};

// A neighbouring disc as seen by one agent. reciprocal=false means the agent
// takes full avoidance responsibility (used for the robot, whose avoidance is
// handled by its own planner).
struct OrcaDisc {
    Vec2 pos;
    Vec2 vel;
    double radius = 0.4;
    bool reciprocal = true;
};

constexpr double kGoalTolerance = 0.3;  // m

// Velocity the agent would pick with nobody around: straight at the current
// script goal at pref_speed. Within tolerance of the goal the script advances
// and this tick reports zero.
inline Vec2 preferred_velocity(AgentState& a) {
    if (a.script.goals.empty() || a.script_done) return {0.0, 0.0};
    Vec2 goal = a.script.goals[a.goal_index];
    if (distance(a.pos, goal) <= kGoalTolerance) {
        ++a.goal_index;
        if (a.goal_index >= static_cast<int>(a.script.goals.size())) {
            if (a.script.loop) {
                a.goal_index = 0;
            } else {
                a.script_done = true;
            }
        }
        return {0.0, 0.0};
    }
    return normalized(goal - a.pos) * a.pref_speed;
}

namespace orca {

struct Line {
    Vec2 point;
    Vec2 dir;  // unit; feasible side is to the LEFT of dir
};

// Optimize along the boundary of constraint `i`, clipped by the previous
// lines and the speed disc.
inline bool linear_program1(const std::vector<Line>& lines, size_t i, double radius,
                            Vec2 opt_vel, bool dir_opt, Vec2& result) {
    const Line& ln = lines[i];
    double dot_prod = dot(ln.point, ln.dir);
    double disc = dot_prod * dot_prod + radius * radius - norm_sq(ln.point);
    if (disc < 0.0) return false;  // line misses the speed disc

    double sqrt_disc = std::sqrt(disc);
    double t_left = -dot_prod - sqrt_disc;
    double t_right = -dot_prod + sqrt_disc;

    for (size_t j = 0; j < i; ++j) {
        double denom = cross(ln.dir, lines[j].dir);
        double numer = cross(lines[j].dir, ln.point - lines[j].point);
        if (std::abs(denom) <= 1e-12) {
            if (numer < 0.0) return false;  // parallel and fully infeasible
            continue;
        }
        double t = numer / denom;
        if (denom >= 0.0) {
            t_right = std::min(t_right, t);
        } else {
            t_left = std::max(t_left, t);
        }
        if (t_left > t_right) return false;
    }

    double t;
    if (dir_opt) {
        t = dot(opt_vel, ln.dir) > 0.0 ? t_right : t_left;
    } else {
        t = std::clamp(dot(ln.dir, opt_vel - ln.point), t_left, t_right);
    }
    result = ln.point + ln.dir * t;
    return true;
}

// Incremental 2D LP: velocity closest to opt_vel satisfying every half-plane
// and |v| <= radius. Returns lines.size() on success, otherwise the index of
// the first infeasible constraint.
inline size_t linear_program2(const std::vector<Line>& lines, double radius, Vec2 opt_vel,
                              bool dir_opt, Vec2& result) {
    if (dir_opt) {
        result = opt_vel * radius;  // opt_vel is a unit direction here
    } else if (norm_sq(opt_vel) > radius * radius) {
        result = normalized(opt_vel) * radius;
    } else {
        result = opt_vel;
    }
    for (size_t i = 0; i < lines.size(); ++i) {
        if (cross(lines[i].dir, lines[i].point - result) > 0.0) {
            Vec2 temp = result;
            if (!linear_program1(lines, i, radius, opt_vel, dir_opt, result)) {
                result = temp;
                return i;
            }
        }
    }
    return lines.size();
}

// Infeasible fallback: minimize the maximum constraint violation (the
// least-penetration velocity), moving perpendicular into the violated
// half-planes.
inline void linear_program3(const std::vector<Line>& lines, size_t begin, double radius,
                            Vec2& result) {
    double dist = 0.0;
    for (size_t i = begin; i < lines.size(); ++i) {
        if (cross(lines[i].dir, lines[i].point - result) <= dist) continue;
        std::vector<Line> proj;
        proj.reserve(i);
        for (size_t j = 0; j < i; ++j) {
            Line ln;
            double denom = cross(lines[i].dir, lines[j].dir);
            if (std::abs(denom) <= 1e-12) {
                if (dot(lines[i].dir, lines[j].dir) > 0.0) continue;  // same direction
                ln.point = (lines[i].point + lines[j].point) * 0.5;
            } else {
                ln.point = lines[i].point +
                           lines[i].dir * (cross(lines[j].dir, lines[i].point - lines[j].point) / denom);
            }
            ln.dir = normalized(lines[j].dir - lines[i].dir);
            proj.push_back(ln);
        }
        Vec2 temp = result;
        if (linear_program2(proj, radius, perp(lines[i].dir), true, result) < proj.size()) {
            result = temp;  // rounding only; keep previous best
        }
        dist = cross(lines[i].dir, lines[i].point - result);
    }
}

// One ORCA half-plane for a neighbouring disc, built from the velocity
// obstacle truncated at time horizon tau.
inline Line constraint_for(Vec2 rel_pos, Vec2 rel_vel, double combined_radius, double tau,
                           double dt, Vec2 self_vel, double share) {
    const double dist_sq = norm_sq(rel_pos);
    const double r_sq = combined_radius * combined_radius;
    Line line;
    Vec2 u;

    if (dist_sq > r_sq) {
        const double inv_tau = 1.0 / tau;
        Vec2 w = rel_vel - rel_pos * inv_tau;
        const double w_len_sq = norm_sq(w);
        const double dot1 = dot(w, rel_pos);
        if (dot1 < 0.0 && dot1 * dot1 > r_sq * w_len_sq) {
            // project on the cut-off circle
            const double w_len = std::sqrt(w_len_sq);
            Vec2 unit_w = w / w_len;
            line.dir = {unit_w.y, -unit_w.x};
            u = unit_w * (combined_radius * inv_tau - w_len);
        } else {
            // project on a leg of the cone
            const double leg = std::sqrt(dist_sq - r_sq);
            if (cross(rel_pos, w) > 0.0) {
                line.dir = Vec2{rel_pos.x * leg - rel_pos.y * combined_radius,
                                rel_pos.x * combined_radius + rel_pos.y * leg} / dist_sq;
            } else {
                line.dir = Vec2{rel_pos.x * leg + rel_pos.y * combined_radius,
                                -rel_pos.x * combined_radius + rel_pos.y * leg} / dist_sq * -1.0;
            }
            u = line.dir * dot(rel_vel, line.dir) - rel_vel;
        }
    } else {
        // already overlapping: push apart within one step
        const double inv_dt = 1.0 / dt;
        Vec2 w = rel_vel - rel_pos * inv_dt;
        const double w_len = norm(w);
        Vec2 unit_w = w_len > 1e-12 ? w / w_len : Vec2{1.0, 0.0};
        line.dir = {unit_w.y, -unit_w.x};
        u = unit_w * (combined_radius * inv_dt - w_len);
    }
    line.point = self_vel + u * share;
    return line;
}

}  // namespace orca

// New velocity for one agent: the feasible velocity closest to pref_vel under
// one half-plane per neighbour, falling back to least penetration when the
// constraints are infeasible. Always returns a velocity with |v| <= max_speed.
inline Vec2 orca_velocity(const AgentState& a, Vec2 pref_vel,
                          const std::vector<OrcaDisc>& neighbors, const OrcaParams& params,
                          double dt) {
    std::vector<orca::Line> lines;
    lines.reserve(neighbors.size());
    for (const auto& nb : neighbors) {
        Vec2 rel_pos = nb.pos - a.pos;
        if (norm_sq(rel_pos) > params.neighbor_dist * params.neighbor_dist) continue;
        Vec2 rel_vel = a.vel - nb.vel;
        double share = nb.reciprocal ? params.responsibility : 1.0;
        lines.push_back(orca::constraint_for(rel_pos, rel_vel, a.radius + nb.radius,
                                             params.time_horizon, dt, a.vel, share));
    }
    Vec2 result;
    size_t fail = orca::linear_program2(lines, a.max_speed, pref_vel, false, result);
    if (fail < lines.size()) orca::linear_program3(lines, fail, a.max_speed, result);
    return result;
}

// Synchronous crowd step: every new velocity is computed from the frozen
// pre-step state, then all positions integrate. heading_noise_sigma rotates
// preferred velocities by a seeded per-agent angle. A small fixed clockwise
// bias breaks exact head-on symmetry without depending on agent ids, keeping
// the update invariant under relabelling.
inline void step_crowd(std::vector<AgentState>& agents, const OrcaDisc* robot,
                       const OrcaParams& params, double dt, Rng& rng,
                       double heading_noise_sigma = 0.0) {
    const size_t n = agents.size();
    if (n == 0) return;

    std::vector<Vec2> new_vel(n);
    std::vector<OrcaDisc> neighbors;
    for (size_t i = 0; i < n; ++i) {
        Vec2 pref = preferred_velocity(agents[i]);
        if (norm_sq(pref) > 0.0) {
            pref = rotated(pref, -1e-3);
            if (heading_noise_sigma > 0.0) pref = rotated(pref, rng.normal(0.0, heading_noise_sigma));
        }

        neighbors.clear();
        for (size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            neighbors.push_back({agents[j].pos, agents[j].vel, agents[j].radius, true});
        }
        // geometric order: nearest first, ties by position, never by id
        std::sort(neighbors.begin(), neighbors.end(), [&](const OrcaDisc& x, const OrcaDisc& y) {
            double dx = distance_sq(x.pos, agents[i].pos);
            double dy = distance_sq(y.pos, agents[i].pos);
            if (dx != dy) return dx < dy;
            if (x.pos.x != y.pos.x) return x.pos.x < y.pos.x;
            return x.pos.y < y.pos.y;
        });
        if (robot) neighbors.push_back(*robot);

        new_vel[i] = orca_velocity(agents[i], pref, neighbors, params, dt);
        double speed = norm(new_vel[i]);
        if (speed > agents[i].max_speed) new_vel[i] = new_vel[i] * (agents[i].max_speed / speed);
    }
    for (size_t i = 0; i < n; ++i) {
        agents[i].vel = new_vel[i];
        agents[i].pos += new_vel[i] * dt;
    }
}

}  // namespace fieldnav
