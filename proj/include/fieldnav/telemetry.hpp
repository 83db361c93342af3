#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "fieldnav/controller.hpp"
#include "fieldnav/errors.hpp"
#include "fieldnav/geometry.hpp"
#include "fieldnav/mission.hpp"

namespace fieldnav {

// One row per tick, snapshotted at decision time: the pose and distances the
// controller saw, plus the velocity it commanded for the tick.
struct StepRecord {
    double t = 0.0;
    Pose pose;
    double v_overall = 0.0;
    double v2goal = 0.0;  // signed projection onto the reference tangent
    Mode mode = Mode::LongTerm;
    double closest_agent = kInf;  // ground-truth centre distance, +inf if none
    double deviation = 0.0;
    double battery_wh = 0.0;
    int tour_leg = 0;
};

// Signed speed along the reference path: the velocity projected onto the
// tangent at the nearest path point, searched within the current leg only.
inline double v2goal(Vec2 velocity, const ReferencePath& path, Vec2 pos, double leg_lo,
                     double leg_hi, double hint) {
    if (path.points.size() < 2) return 0.0;
    double s = path.project(pos, std::max(leg_lo, hint - 5.0), std::min(leg_hi, hint + 5.0));
    return dot(velocity, path.tangent_at(s));
}

// Distance from the pose to the leg's polyline.
inline double deviation(Vec2 pos, const ReferencePath& path, double leg_lo, double leg_hi) {
    if (path.points.size() < 2) return 0.0;
    return path.distance_to(pos, leg_lo, leg_hi);
}

inline constexpr const char* kTelemetryHeader =
    "t,x,y,heading,v_overall,v2goal,mode,closest_agent,deviation,battery_wh,tour_leg";

inline std::string format_record(const StepRecord& r) {
    char buf[320];
    std::snprintf(buf, sizeof(buf), "%.3f,%.6f,%.6f,%.6f,%.6f,%.6f,%s,%.6f,%.6f,%.9f,%d",
                  r.t, r.pose.pos.x, r.pose.pos.y, r.pose.heading, r.v_overall, r.v2goal,
                  mode_name(r.mode), r.closest_agent, r.deviation, r.battery_wh, r.tour_leg);
    return buf;
}

// Incremental CSV writer; enforces the projection bound on every row.
class TelemetryWriter {
public:
    explicit TelemetryWriter(const std::string& path) : out_(path) {
        if (!out_) throw IoError("cannot open telemetry file: " + path);
        out_ << kTelemetryHeader << "\n";
    }

    void append(const StepRecord& r) {
        if (std::abs(r.v2goal) > r.v_overall + 1e-9)
            throw Error("telemetry invariant violated: |v2goal| > v_overall");
        out_ << format_record(r) << "\n";
        if (!out_) throw IoError("telemetry write failed");
    }

    void close() { out_.close(); }

private:
    std::ofstream out_;
};

struct SummaryParams {
    double d_failsafe = 1.5;
    double t_clear = 2.0;
    double hist_bin = 0.5;
    double hist_max = 8.0;
    double dt = 0.0;  // tick length; 0 infers it from the record stream
};

struct DeviationStats {
    double mean = 0.0, p50 = 0.0, p95 = 0.0, max = 0.0;
};

struct TrialSummary {
    double duration_s = 0.0;
    double distance_m = 0.0;
    double energy_wh = 0.0;
    int ticks = 0;
    std::array<double, 4> mode_fraction{};  // indexed by Mode
    std::array<double, 4> avg_v_overall{};
    std::array<double, 4> avg_v2goal{};
    std::array<double, 4> frac_v2goal_nonpos{};
    double energy_frac_nonpos_dynamic = 0.0;
    int near_collision_count = 0;
    int interaction_count = 0;
    double min_closest_overall = kInf;
    std::array<double, 4> min_closest{kInf, kInf, kInf, kInf};
    double avg_closest_dynamic_tick = kInf;
    double avg_closest_per_interaction = kInf;
    std::array<DeviationStats, 4> deviation_stats{};
};

namespace detail {

inline DeviationStats percentile_stats(std::vector<double>& values) {
    DeviationStats s;
    if (values.empty()) return s;
    std::sort(values.begin(), values.end());
    double sum = 0.0;
    for (double v : values) sum += v;
    s.mean = sum / values.size();
    s.p50 = values[values.size() / 2];
    s.p95 = values[std::min(values.size() - 1, static_cast<size_t>(values.size() * 0.95))];
    s.max = values.back();
    return s;
}

}  // namespace detail

// Aggregates the paper-style metrics from a record stream. Near-collisions
// count rising edges of closest_agent dropping below d_failsafe, so one
// incident counts once. Interactions are maximal Dynamic/Failsafe episodes;
// gaps shorter than t_clear merge.
inline TrialSummary summarize(const std::vector<StepRecord>& records,
                              const SummaryParams& params) {
    TrialSummary s;
    s.ticks = static_cast<int>(records.size());
    if (records.empty()) return s;

    std::array<int, 4> mode_ticks{};
    std::array<double, 4> sum_v{}, sum_v2g{};
    std::array<int, 4> nonpos{};
    std::array<std::vector<double>, 4> devs;
    double dt_sum = 0.0;
    double prev_t = records.front().t;
    bool below = false;
    double sum_closest_dyn = 0.0;
    int dyn_closest_ticks = 0;
    double energy_nonpos_dyn = 0.0, energy_dyn = 0.0;

    // interaction episodes
    bool in_episode = false;
    double episode_gap_start = 0.0;
    bool gap_open = false;
    std::vector<double> episode_min_closest;

    double prev_battery = records.front().battery_wh;
    for (size_t i = 0; i < records.size(); ++i) {
        const auto& r = records[i];
        int m = static_cast<int>(r.mode);
        mode_ticks[m]++;
        sum_v[m] += r.v_overall;
        sum_v2g[m] += r.v2goal;
        if (r.v2goal <= 0.0) nonpos[m]++;
        devs[m].push_back(r.deviation);
        if (i > 0) {
            dt_sum += r.t - prev_t;
            s.distance_m += records[i - 1].v_overall * (r.t - prev_t);
        }
        prev_t = r.t;

        double drain = prev_battery - r.battery_wh;
        if (drain < 0.0) drain = 0.0;
        prev_battery = r.battery_wh;
        if (r.mode == Mode::Dynamic) {
            energy_dyn += drain;
            if (r.v2goal <= 0.0) energy_nonpos_dyn += drain;
        }

        bool is_below = r.closest_agent < params.d_failsafe;
        if (is_below && !below) s.near_collision_count++;
        below = is_below;

        s.min_closest_overall = std::min(s.min_closest_overall, r.closest_agent);
        s.min_closest[m] = std::min(s.min_closest[m], r.closest_agent);
        if (r.mode == Mode::Dynamic && std::isfinite(r.closest_agent)) {
            sum_closest_dyn += r.closest_agent;
            dyn_closest_ticks++;
        }

        bool engaged = r.mode == Mode::Dynamic || r.mode == Mode::Failsafe;
        if (engaged) {
            if (!in_episode) {
                in_episode = true;
                episode_min_closest.push_back(r.closest_agent);
            } else {
                episode_min_closest.back() =
                    std::min(episode_min_closest.back(), r.closest_agent);
            }
            gap_open = false;
        } else if (in_episode) {
            if (!gap_open) {
                gap_open = true;
                episode_gap_start = r.t;
            } else if (r.t - episode_gap_start >= params.t_clear) {
                in_episode = false;
                gap_open = false;
            }
        }
    }

    // duration counts every tick, including the last one's dt (uniform ticks)
    double dt = params.dt > 0.0 ? params.dt
                                : (records.size() > 1 ? dt_sum / (records.size() - 1) : 0.0);
    s.duration_s = records.size() * dt;
    s.distance_m += records.back().v_overall * dt;
    s.energy_wh = records.front().battery_wh - records.back().battery_wh;
    s.interaction_count = static_cast<int>(episode_min_closest.size());

    for (int m = 0; m < 4; ++m) {
        s.mode_fraction[m] = static_cast<double>(mode_ticks[m]) / records.size();
        if (mode_ticks[m] > 0) {
            s.avg_v_overall[m] = sum_v[m] / mode_ticks[m];
            s.avg_v2goal[m] = sum_v2g[m] / mode_ticks[m];
            s.frac_v2goal_nonpos[m] = static_cast<double>(nonpos[m]) / mode_ticks[m];
        }
        s.deviation_stats[m] = detail::percentile_stats(devs[m]);
    }
    if (dyn_closest_ticks > 0) s.avg_closest_dynamic_tick = sum_closest_dyn / dyn_closest_ticks;
    if (!episode_min_closest.empty()) {
        double sum = 0.0;
        int finite = 0;
        for (double v : episode_min_closest)
            if (std::isfinite(v)) {
                sum += v;
                finite++;
            }
        if (finite > 0) s.avg_closest_per_interaction = sum / finite;
    }
    if (energy_dyn > 0.0) s.energy_frac_nonpos_dynamic = energy_nonpos_dyn / energy_dyn;
    return s;
}

// Per-mode histogram of closest-agent distance for ticks with an agent within
// max_dist, normalized to percent within each mode.
inline std::map<Mode, std::vector<double>> closest_agent_histogram(
    const std::vector<StepRecord>& records, double bin, double max_dist = 8.0) {
    std::map<Mode, std::vector<double>> hist;
    std::map<Mode, int> totals;
    const int n_bins = static_cast<int>(std::ceil(max_dist / bin));
    for (const auto& r : records) {
        if (!(r.closest_agent <= max_dist)) continue;
        auto& h = hist[r.mode];
        if (h.empty()) h.assign(n_bins, 0.0);
        int b = std::min(n_bins - 1, static_cast<int>(r.closest_agent / bin));
        h[b] += 1.0;
        totals[r.mode]++;
    }
    for (auto& [mode, h] : hist) {
        double total = totals[mode];
        for (auto& v : h) v = 100.0 * v / total;
    }
    return hist;
}

inline std::vector<StepRecord> parse_telemetry_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open telemetry file: " + path);
    std::string line;
    if (!std::getline(in, line)) throw IoError("empty telemetry file: " + path);
    std::vector<StepRecord> records;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        StepRecord r;
        char mode[16] = {0};
        int fields = std::sscanf(line.c_str(), "%lf,%lf,%lf,%lf,%lf,%lf,%15[^,],%lf,%lf,%lf,%d",
                                 &r.t, &r.pose.pos.x, &r.pose.pos.y, &r.pose.heading,
                                 &r.v_overall, &r.v2goal, mode, &r.closest_agent, &r.deviation,
                                 &r.battery_wh, &r.tour_leg);
        if (fields != 11) throw IoError("malformed telemetry row: " + line);
        std::string m = mode;
        if (m == "longterm") r.mode = Mode::LongTerm;
        else if (m == "dynamic") r.mode = Mode::Dynamic;
        else if (m == "failsafe") r.mode = Mode::Failsafe;
        else if (m == "taskdwell") r.mode = Mode::TaskDwell;
        else throw IoError("unknown mode in telemetry row: " + m);
        records.push_back(r);
    }
    return records;
}

}  // namespace fieldnav
