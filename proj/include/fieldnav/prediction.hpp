#pragma once

#include <cmath>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "fieldnav/crowd.hpp"
#include "fieldnav/errors.hpp"
#include "fieldnav/geometry.hpp"
#include "fieldnav/perception.hpp"
#include "fieldnav/rng.hpp"

namespace fieldnav {

struct PredictionParams {
    double sigma_pos = 0.15;       // m/sqrt(s), constant-velocity diffusion
    double tau_goal = 5.0;         // s, goal imputed at pos + vel * tau_goal
    double pref_speed_noise = 0.1;  // fractional, per sample
    double agent_radius = 0.4;
    double agent_max_speed = 1.75;
    double robot_radius = 0.6;
    OrcaParams orca;
};

struct PredictionRequest {
    std::vector<Track> tracks;
    std::vector<Pose> robot_trajectory;  // one pose per step at dt spacing
    double dt = 0.25;
    int horizon = 20;
    int samples = 1;
    std::uint64_t seed = 0;
};

// positions[sample][step][track]
struct PredictionResult {
    std::vector<std::vector<std::vector<Vec2>>> positions;
};

// Agent-response predictor plugged into the local planner. Rollouts are
// incremental so the planner can condition each step on the robot pose it is
// actually considering; identical (inputs, seed) give identical samples.
class Predictor {
public:
    struct Rollout {
        std::vector<Vec2> pos;
        std::vector<Vec2> vel;
        std::vector<Vec2> goal;
        std::vector<double> pref_speed;
        Rng rng;
    };

    virtual ~Predictor() = default;
    virtual std::string name() const = 0;

    Rollout start(const std::vector<Track>& tracks, std::uint64_t seed,
                  const PredictionParams& p) const {
        Rollout r;
        r.rng = Rng(seed);
        for (const auto& t : tracks) {
            r.pos.push_back(t.pos);
            r.vel.push_back(t.vel);
            r.goal.push_back(t.pos + t.vel * p.tau_goal);
            double noise = p.pref_speed_noise > 0.0 ? r.rng.normal(0.0, p.pref_speed_noise) : 0.0;
            r.pref_speed.push_back(std::max(0.0, norm(t.vel) * (1.0 + noise)));
        }
        return r;
    }

    virtual void step(Rollout& r, const Pose& robot, Vec2 robot_vel, double dt,
                      const PredictionParams& p) const = 0;

    PredictionResult predict(const PredictionRequest& req, const PredictionParams& p) const {
        PredictionResult out;
        out.positions.resize(req.samples);
        for (int s = 0; s < req.samples; ++s) {
            Rollout r = start(req.tracks, derive_seed(req.seed, "sample", s), p);
            out.positions[s].reserve(req.horizon);
            for (int h = 0; h < req.horizon; ++h) {
                Pose robot = req.robot_trajectory.empty()
                                 ? Pose{}
                                 : req.robot_trajectory[std::min<size_t>(
                                       h, req.robot_trajectory.size() - 1)];
                Vec2 robot_vel{0.0, 0.0};
                if (h + 1 < static_cast<int>(req.robot_trajectory.size()))
                    robot_vel = (req.robot_trajectory[h + 1].pos - robot.pos) / req.dt;
                step(r, robot, robot_vel, req.dt, p);
                out.positions[s].push_back(r.pos);
            }
        }
        return out;
    }
};

// Constant velocity plus Brownian position noise (std sigma_pos * sqrt(t));
// ignores the robot entirely.
class CvPredictor : public Predictor {
public:
    std::string name() const override { return "cv"; }

    void step(Rollout& r, const Pose&, Vec2, double dt, const PredictionParams& p) const override {
        for (size_t i = 0; i < r.pos.size(); ++i) {
            r.pos[i] += r.vel[i] * dt;
            if (p.sigma_pos > 0.0) r.pos[i] += r.rng.normal_vec2(p.sigma_pos * std::sqrt(dt));
        }
    }
};

// Virtual ORCA agents seeded from the tracks, reacting to each other and to
// the hypothesized robot trajectory as a non-reciprocating disc. This is what
// lets the planner assume people give way instead of freezing.
class OrcaPredictor : public Predictor {
public:
    std::string name() const override { return "orca"; }

    void step(Rollout& r, const Pose& robot, Vec2 robot_vel, double dt,
              const PredictionParams& p) const override {
        const size_t n = r.pos.size();
        std::vector<Vec2> new_vel(n);
        std::vector<OrcaDisc> neighbors;
        for (size_t i = 0; i < n; ++i) {
            Vec2 to_goal = r.goal[i] - r.pos[i];
            Vec2 pref = norm(to_goal) <= kGoalTolerance
                            ? Vec2{0.0, 0.0}
                            : normalized(to_goal) * r.pref_speed[i];
            // same clockwise bias as the ground-truth crowd, so head-on
            // symmetry resolves the same way
            if (norm_sq(pref) > 0.0) pref = rotated(pref, -1e-3);
            neighbors.clear();
            for (size_t j = 0; j < n; ++j) {
                if (j == i) continue;
                neighbors.push_back({r.pos[j], r.vel[j], p.agent_radius, true});
            }
            neighbors.push_back({robot.pos, robot_vel, p.robot_radius, false});

            AgentState shim;
            shim.pos = r.pos[i];
            shim.vel = r.vel[i];
            shim.radius = p.agent_radius;
            shim.max_speed = p.agent_max_speed;
            new_vel[i] = orca_velocity(shim, pref, neighbors, p.orca, dt);
        }
        for (size_t i = 0; i < n; ++i) {
            r.vel[i] = new_vel[i];
            r.pos[i] += new_vel[i] * dt;
        }
    }
};

inline std::unique_ptr<Predictor> make_predictor(const std::string& kind) {
    if (kind == "cv") return std::make_unique<CvPredictor>();
    if (kind == "orca") return std::make_unique<OrcaPredictor>();
    throw ConfigError("unknown predictor: " + kind);
}

}  // namespace fieldnav
