#pragma once

#include <algorithm>
#include <cmath>
#include <tuple>
#include <vector>

#include "fieldnav/crowd.hpp"
#include "fieldnav/geometry.hpp"
#include "fieldnav/rng.hpp"

namespace fieldnav {

// Front-mounted sensor: a wedge of fov_angle centred on the robot heading,
// leaving a rear blind sector.
struct SensorModel {
    double fov_angle = deg2rad(270.0);
    double range = 20.0;
    double pos_noise_sigma = 0.1;
    double detect_prob = 0.95;
};

struct Detection {
    Vec2 pos;
};

inline bool in_fov(const Pose& robot, Vec2 point, const SensorModel& sensor) {
    Vec2 rel = point - robot.pos;
    double d = norm(rel);
    if (d > sensor.range) return false;
    if (d < 1e-12) return true;
    double bearing = wrap_angle(std::atan2(rel.y, rel.x) - robot.heading);
    return std::abs(bearing) <= sensor.fov_angle * 0.5;
}

// Within sensing range but outside the wedge. Beyond range is not "blind
// spot", it is out of the sensing envelope entirely.
inline bool in_blind_spot(const Pose& robot, Vec2 point, const SensorModel& sensor) {
    double d = distance(point, robot.pos);
    if (d > sensor.range) return false;
    return !in_fov(robot, point, sensor);
}

// Unlabelled position detections of agents inside the wedge, each emitted
// with detect_prob and corrupted by isotropic Gaussian noise.
inline std::vector<Detection> sense(const Pose& robot, const std::vector<AgentState>& agents,
                                    const SensorModel& sensor, Rng& rng) {
    std::vector<Detection> out;
    for (const auto& a : agents) {
        if (!in_fov(robot, a.pos, sensor)) continue;
        if (!rng.bernoulli(sensor.detect_prob)) continue;
        Vec2 noise = sensor.pos_noise_sigma > 0.0 ? rng.normal_vec2(sensor.pos_noise_sigma)
                                                  : Vec2{0.0, 0.0};
        out.push_back({a.pos + noise});
    }
    return out;
}

struct TrackerParams {
    double gate = 2.0;        // m, association gate
    double alpha = 0.5;       // position filter gain
    double beta = 0.3;        // velocity filter gain
    double conf_up = 1.0;     // /s, confidence gain when matched
    double conf_decay_visible = 0.4;  // /s, missed while observable
    double conf_decay_blind = 0.05;   // /s, missed while unobservable
    double conf_init = 0.4;
    double conf_confirm = 0.6;
    double conf_delete = 0.2;
};

struct Track {
    int id = 0;
    Vec2 pos;
    Vec2 vel;
    double confidence = 0.0;
    bool confirmed = false;
    double last_update = 0.0;
};

// Single-writer multi-object tracker: constant-velocity coasting, gated
// greedy nearest-neighbour association, alpha-beta filtering, and confidence
// decay that slows when a track's predicted position is unobservable, so
// objects behind the robot are remembered rather than dropped.
class Tracker {
public:
    TrackerParams params;
    std::vector<Track> tracks;

    void update(const std::vector<Detection>& detections, const Pose& robot,
                const SensorModel& sensor, double dt, double now) {
        for (auto& t : tracks) t.pos += t.vel * dt;  // coast

        // candidate pairs within the gate, nearest first; deterministic ties
        std::vector<std::tuple<double, size_t, size_t>> pairs;
        for (size_t i = 0; i < tracks.size(); ++i) {
            for (size_t j = 0; j < detections.size(); ++j) {
                double d = distance(tracks[i].pos, detections[j].pos);
                if (d <= params.gate) pairs.emplace_back(d, i, j);
            }
        }
        std::sort(pairs.begin(), pairs.end());

        std::vector<char> track_used(tracks.size(), 0), det_used(detections.size(), 0);
        for (const auto& [d, i, j] : pairs) {
            if (track_used[i] || det_used[j]) continue;
            track_used[i] = 1;
            det_used[j] = 1;
            Track& t = tracks[i];
            Vec2 residual = detections[j].pos - t.pos;
            t.pos += residual * params.alpha;
            t.vel += residual * (params.beta / dt);
            t.confidence = std::min(1.0, t.confidence + params.conf_up * dt);
            t.last_update = now;
        }

        for (size_t i = 0; i < tracks.size(); ++i) {
            if (track_used[i]) continue;
            bool observable = in_fov(robot, tracks[i].pos, sensor);
            double rate = observable ? params.conf_decay_visible : params.conf_decay_blind;
            tracks[i].confidence -= rate * dt;
        }

        for (size_t j = 0; j < detections.size(); ++j) {
            if (det_used[j]) continue;
            Track t;
            t.id = next_id_++;
            t.pos = detections[j].pos;
            t.confidence = params.conf_init;
            t.last_update = now;
            tracks.push_back(t);
        }

        for (auto& t : tracks)
            if (t.confidence >= params.conf_confirm) t.confirmed = true;
        std::erase_if(tracks, [this](const Track& t) { return t.confidence < params.conf_delete; });
    }

    std::vector<Track> confirmed() const {
        std::vector<Track> out;
        for (const auto& t : tracks)
            if (t.confirmed) out.push_back(t);
        return out;
    }

    int next_id() const { return next_id_; }

private:
    int next_id_ = 1;
};

}  // namespace fieldnav
