#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "fieldnav/controller.hpp"
#include "fieldnav/errors.hpp"
#include "fieldnav/geometry.hpp"
#include "fieldnav/mission.hpp"
#include "fieldnav/perception.hpp"
#include "fieldnav/prediction.hpp"
#include "fieldnav/rng.hpp"

namespace fieldnav {

struct Action {
    double v = 0.0;      // m/s, >= 0 (forward only)
    double omega = 0.0;  // rad/s
};

inline std::vector<Action> default_action_set() {
    std::vector<Action> actions;
    for (double v : {0.0, 0.75, 1.5})
        for (double w : {-0.6, -0.3, 0.0, 0.3, 0.6}) actions.push_back({v, w});
    return actions;
}

struct MctsParams {
    int iterations = 300;
    int depth = 20;          // H, steps
    double dt_plan = 0.25;   // s
    double ucb_c = 1.4;
    std::vector<Action> actions = default_action_set();
    double w_progress = 1.0;
    double w_dev = 0.3;
    double w_soft = 2.0;
    double w_col = 50.0;
    double d_soft = 3.0;  // m, soft keep-out around predicted agents
    double d_col = 1.5;   // m, hard penalty distance (matches the failsafe)
    double discount = 1.0;

    void validate() const {
        if (iterations < 1) throw ConfigError("mcts: iterations must be >= 1");
        if (depth < 1) throw ConfigError("mcts: depth must be >= 1");
        if (d_col >= d_soft) throw ConfigError("mcts: d_col must be below d_soft");
        for (const auto& a : actions)
            if (a.v < 0.0) throw ConfigError("mcts: forward-only action set, v >= 0");
    }
};

// Unicycle kinematics: turn, then advance along the new heading; limits
// clamped.
inline Pose simulate_step(const Pose& state, Action action, double dt, double v_max,
                          double omega_max) {
    double v = std::clamp(action.v, 0.0, v_max);
    double omega = std::clamp(action.omega, -omega_max, omega_max);
    Pose next;
    next.heading = wrap_angle(state.heading + omega * dt);
    next.pos = state.pos + heading_dir(next.heading) * (v * dt);
    return next;
}

// Per-step reward: progress along the reference path, minus lateral
// deviation, minus a soft penalty for crowding predicted agents and a hard
// penalty for entering the collision distance.
inline double step_reward(double progress_delta, double deviation_m, double min_agent_dist,
                          const MctsParams& p) {
    double r = p.w_progress * progress_delta - p.w_dev * deviation_m;
    r -= p.w_soft * std::max(0.0, p.d_soft - min_agent_dist);
    if (min_agent_dist < p.d_col) r -= p.w_col;
    return r;
}

struct PlanDiagnostics {
    std::vector<int> root_visits;
    std::vector<double> root_mean_value;
    int chosen = -1;
};

namespace detail {

struct MctsNode {
    int parent = -1;
    int action_index = -1;
    Pose pose;
    double progress = 0.0;
    int depth = 0;
    int visits = 0;
    double value_sum = 0.0;
    int next_untried = 0;
    std::vector<int> children;
};

struct RewardContext {
    const ReferencePath* path;
    double leg_lo, leg_hi;
    double agent_radius;
    const MctsParams* params;
};

inline double eval_reward(const RewardContext& ctx, const Pose& pose, double parent_progress,
                          double& progress_out, const std::vector<Vec2>& agent_pos) {
    double fwd = ctx.params->dt_plan * 4.0 + 2.0;
    double s = ctx.path->project(pose.pos, std::max(ctx.leg_lo, parent_progress - 2.0),
                                 std::min(ctx.leg_hi, parent_progress + fwd));
    progress_out = s;
    double dev = distance(pose.pos, ctx.path->point_at(s));
    double d_min = kInf;
    for (const auto& ap : agent_pos)
        d_min = std::min(d_min, distance(pose.pos, ap) - ctx.agent_radius);
    return step_reward(s - parent_progress, dev, d_min, *ctx.params);
}

}  // namespace detail

// UCT search over the discrete action set. Each iteration re-samples one
// agent future from the predictor, conditioned step by step on the robot
// trajectory of the branch being explored; Monte Carlo averaging across
// iterations absorbs the sampling noise. Rollouts follow the pure-pursuit
// policy. Deterministic for a given seed.
inline Action plan(const Pose& robot, double progress, const std::vector<Track>& tracks,
                   const ReferencePath& ref_path, double leg_lo, double leg_hi,
                   const Predictor& predictor, const PredictionParams& pred_params,
                   const MctsParams& params, const SwitchParams& drive, std::uint64_t seed,
                   PlanDiagnostics* diag = nullptr) {
    if (params.actions.empty()) throw EmptyActionSetError("MCTS action set is empty");
    if (params.depth < 1) throw ConfigError("mcts: depth must be >= 1");
    const int n_actions = static_cast<int>(params.actions.size());

    std::vector<detail::MctsNode> nodes;
    nodes.push_back({});
    nodes[0].pose = robot;
    nodes[0].progress = progress;

    detail::RewardContext ctx{&ref_path, leg_lo, leg_hi, pred_params.agent_radius, &params};

    std::vector<double> rewards;
    std::vector<int> visited;
    for (int iter = 0; iter < params.iterations; ++iter) {
        Predictor::Rollout agents =
            predictor.start(tracks, derive_seed(seed, "rollout", iter), pred_params);
        rewards.clear();
        visited.clear();
        int cur = 0;
        visited.push_back(cur);

        // selection + one expansion
        while (nodes[cur].depth < params.depth) {
            int chosen;
            if (nodes[cur].next_untried < n_actions) {
                chosen = -1;  // expand
            } else {
                double best = -kInf;
                chosen = 0;
                double log_n = std::log(static_cast<double>(nodes[cur].visits) + 1.0);
                for (int c : nodes[cur].children) {
                    const auto& child = nodes[c];
                    double ucb = child.value_sum / child.visits +
                                 params.ucb_c * std::sqrt(log_n / child.visits);
                    if (ucb > best) {
                        best = ucb;
                        chosen = c;
                    }
                }
            }

            int next_index;
            bool expanded = false;
            if (chosen == -1) {
                int ai = nodes[cur].next_untried++;
                detail::MctsNode child;
                child.parent = cur;
                child.action_index = ai;
                child.depth = nodes[cur].depth + 1;
                child.pose = simulate_step(nodes[cur].pose, params.actions[ai], params.dt_plan,
                                           drive.v_max, drive.omega_max);
                nodes.push_back(child);
                next_index = static_cast<int>(nodes.size()) - 1;
                nodes[cur].children.push_back(next_index);
                expanded = true;
            } else {
                next_index = chosen;
            }

            Vec2 robot_vel =
                (nodes[next_index].pose.pos - nodes[cur].pose.pos) / params.dt_plan;
            predictor.step(agents, nodes[next_index].pose, robot_vel, params.dt_plan,
                           pred_params);
            double prog;
            rewards.push_back(detail::eval_reward(ctx, nodes[next_index].pose,
                                                  nodes[cur].progress, prog, agents.pos));
            nodes[next_index].progress = prog;
            visited.push_back(next_index);
            cur = next_index;
            if (expanded) break;
        }

        // rollout with the path-tracking policy
        {
            Pose pose = nodes[cur].pose;
            double prog = nodes[cur].progress;
            for (int d = nodes[cur].depth; d < params.depth; ++d) {
                DriveCommand cmd;
                try {
                    cmd = track_path(pose, ref_path, prog, leg_hi, drive, false);
                } catch (const PathExhaustedError&) {
                    cmd = {0.0, 0.0};
                }
                Pose next = simulate_step(pose, {cmd.v, cmd.omega}, params.dt_plan, drive.v_max,
                                          drive.omega_max);
                Vec2 robot_vel = (next.pos - pose.pos) / params.dt_plan;
                predictor.step(agents, next, robot_vel, params.dt_plan, pred_params);
                double new_prog;
                rewards.push_back(detail::eval_reward(ctx, next, prog, new_prog, agents.pos));
                prog = new_prog;
                pose = next;
            }
        }

        // suffix returns, then backpropagate onto the visited chain
        double g = 0.0;
        std::vector<double> returns(rewards.size());
        for (int i = static_cast<int>(rewards.size()) - 1; i >= 0; --i) {
            g = rewards[i] + params.discount * g;
            returns[i] = g;
        }
        nodes[0].visits++;
        for (size_t i = 1; i < visited.size(); ++i) {
            nodes[visited[i]].visits++;
            nodes[visited[i]].value_sum += returns[i - 1];
        }
    }

    // root action: max visits, then max mean value, then lowest action index
    int best_child = -1;
    for (int c : nodes[0].children) {
        if (best_child == -1) {
            best_child = c;
            continue;
        }
        const auto& a = nodes[c];
        const auto& b = nodes[best_child];
        double mean_a = a.value_sum / a.visits;
        double mean_b = b.value_sum / b.visits;
        if (a.visits > b.visits || (a.visits == b.visits && mean_a > mean_b))
            best_child = c;
    }

    if (diag) {
        diag->root_visits.assign(n_actions, 0);
        diag->root_mean_value.assign(n_actions, 0.0);
        for (int c : nodes[0].children) {
            diag->root_visits[nodes[c].action_index] = nodes[c].visits;
            diag->root_mean_value[nodes[c].action_index] = nodes[c].value_sum / nodes[c].visits;
        }
        diag->chosen = nodes[best_child].action_index;
    }
    return params.actions[nodes[best_child].action_index];
}

}  // namespace fieldnav
