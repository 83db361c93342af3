#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "fieldnav/errors.hpp"
#include "fieldnav/geometry.hpp"
#include "fieldnav/mission.hpp"
#include "fieldnav/perception.hpp"

namespace fieldnav {

enum class Mode { LongTerm, Dynamic, Failsafe, TaskDwell };

inline const char* mode_name(Mode m) {
    switch (m) {
        case Mode::LongTerm: return "longterm";
        case Mode::Dynamic: return "dynamic";
        case Mode::Failsafe: return "failsafe";
        case Mode::TaskDwell: return "taskdwell";
    }
    return "?";
}

struct SwitchParams {
    double r_agent = 5.0;           // m, robot-proximity trigger
    double r_path = 2.0;            // m, path-corridor trigger
    double lookahead_window = 15.0;  // m along the path ahead
    double t_clear = 2.0;           // s without triggers before LongTerm resumes
    double d_failsafe = 1.5;        // m, hard stop distance
    double d_resume = 1.8;          // m, failsafe release distance
    double r_waypoint = 0.5;        // m, objective arrival radius
    double t_spray = 5.0;           // s, dwell per weed
    double lookahead = 2.5;         // m, pure pursuit
    double v_max = 1.5;             // m/s
    double omega_max = 0.8;         // rad/s
    double theta_tip = deg2rad(80.0);  // bearing error beyond which we rotate in place
    double v_creep = 0.4;           // m/s, forward creep when rotation is suppressed
    bool blind_spot_guard = false;  // suppress turn-in-place with a track behind

    void validate() const {
        if (d_resume <= d_failsafe) throw ConfigError("switch: d_resume must exceed d_failsafe");
        if (r_agent <= d_failsafe) throw ConfigError("switch: r_agent must exceed d_failsafe");
    }
};

struct ModeState {
    Mode mode = Mode::LongTerm;
    double entered_at = 0.0;
    double last_trigger = -1e18;  // last time a dynamic trigger held
};

// Planner-mode arbitration, highest priority first: failsafe proximity (with
// release hysteresis), task dwell at the objective, dynamic triggers (track
// near the robot, or near the path corridor ahead), and LongTerm only after
// t_clear seconds of quiet.
inline ModeState select_mode(ModeState prev, const Pose& robot,
                             const std::vector<Track>& confirmed_tracks,
                             const ReferencePath& ref_path, double progress,
                             const std::optional<Vec2>& objective, const SwitchParams& params,
                             double now) {
    double nearest = kInf;
    for (const auto& t : confirmed_tracks) nearest = std::min(nearest, distance(t.pos, robot.pos));

    bool near_path = false;
    double window_end = std::min(progress + params.lookahead_window, ref_path.total_length());
    for (const auto& t : confirmed_tracks) {
        if (ref_path.distance_to(t.pos, progress, window_end) <= params.r_path) {
            near_path = true;
            break;
        }
    }
    bool trigger = nearest <= params.r_agent || near_path;

    ModeState next = prev;
    if (trigger) next.last_trigger = now;

    Mode decided;
    if (nearest < params.d_failsafe ||
        (prev.mode == Mode::Failsafe && nearest <= params.d_resume)) {
        decided = Mode::Failsafe;
    } else if (objective && distance(robot.pos, *objective) <= params.r_waypoint) {
        decided = Mode::TaskDwell;
    } else if (trigger || now - next.last_trigger < params.t_clear) {
        decided = Mode::Dynamic;
    } else {
        decided = Mode::LongTerm;
    }

    if (decided != prev.mode) next.entered_at = now;
    next.mode = decided;
    return next;
}

struct DriveCommand {
    double v = 0.0;      // m/s, forward only
    double omega = 0.0;  // rad/s
};

// Pure pursuit on the reference path. The carrot sits `lookahead` metres
// ahead of the current progress, clamped to leg_end_arc so the robot drives
// into each stop instead of cutting past it. Large bearing errors rotate in
// place, unless the blind-spot guard is armed and a confirmed track sits
// behind the robot, in which case it creeps forward while turning.
inline DriveCommand track_path(const Pose& robot, const ReferencePath& ref_path, double progress,
                               double leg_end_arc, const SwitchParams& params,
                               bool track_in_blind_spot) {
    if (ref_path.points.size() < 2 || progress >= ref_path.total_length() - 1e-9)
        throw PathExhaustedError("progress beyond reference path end");

    double target_s = std::min(progress + params.lookahead, leg_end_arc);
    Vec2 target = ref_path.point_at(target_s);
    Vec2 to_target = target - robot.pos;
    double dist_target = norm(to_target);
    if (dist_target < 1e-9) return {0.0, 0.0};

    double bearing = wrap_angle(std::atan2(to_target.y, to_target.x) - robot.heading);

    if (std::abs(bearing) > params.theta_tip) {
        double omega = bearing > 0.0 ? params.omega_max : -params.omega_max;
        if (params.blind_spot_guard && track_in_blind_spot)
            return {params.v_creep, omega};  // keep moving, never pirouette blind
        return {0.0, omega};
    }

    double v = params.v_max * (1.0 - 0.7 * std::min(std::abs(bearing) / params.theta_tip, 1.0));
    // ease in toward the end of the whole tour
    double remaining = ref_path.total_length() - progress;
    v = std::min(v, std::max(0.25, remaining));
    double omega = 2.0 * v * std::sin(bearing) / params.lookahead;
    omega = std::clamp(omega, -params.omega_max, params.omega_max);
    return {v, omega};
}

// Hard stop, independent of every planner: any confirmed track or raw
// detection inside d_failsafe halts the robot this tick.
inline bool failsafe_check(const Pose& robot, const std::vector<Track>& confirmed_tracks,
                           const std::vector<Detection>& detections,
                           const SwitchParams& params) {
    for (const auto& t : confirmed_tracks)
        if (distance(t.pos, robot.pos) < params.d_failsafe) return true;
    for (const auto& d : detections)
        if (distance(d.pos, robot.pos) < params.d_failsafe) return true;
    return false;
}

}  // namespace fieldnav
