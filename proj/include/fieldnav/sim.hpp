#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "fieldnav/controller.hpp"
#include "fieldnav/crowd.hpp"
#include "fieldnav/errors.hpp"
#include "fieldnav/local_planner.hpp"
#include "fieldnav/mission.hpp"
#include "fieldnav/perception.hpp"
#include "fieldnav/prediction.hpp"
#include "fieldnav/roadmap.hpp"
#include "fieldnav/scenario.hpp"
#include "fieldnav/telemetry.hpp"
#include "fieldnav/terrain.hpp"

namespace fieldnav {

struct SprayEvent {
    double t = 0.0;
    int set_iteration = 0;
    int waypoint_index = 0;  // index within the set's waypoint list
    Vec2 pos;
};

struct SimStats {
    long ticks = 0;
    int sets_completed = 0;
    std::string end_reason;
    std::vector<SprayEvent> sprays;
    std::vector<std::string> warnings;
    double herbicide_used_l = 0.0;
    double battery_final_wh = 0.0;
    double total_drain_wh = 0.0;  // sum of applied per-tick drains
};

struct TrialResult {
    std::vector<StepRecord> records;
    SimStats stats;
    TrialSummary summary;
};

// Battery drain for one tick, in Wh: motion energy over the displacement,
// idle draw, and spray power while dwelling.
inline double tick_drain_wh(const TerrainMap& map, const EnergyParams& energy, Vec2 prev,
                            Vec2 cur, double dt, bool spraying, double spray_power_w) {
    double joules = edge_energy(map, energy, prev, cur) + energy.idle_power * dt;
    if (spraying) joules += spray_power_w * dt;
    return joules / 3600.0;
}

// Offline plan for one waypoint set: PRM, cost matrix, tour, stitched path.
// Waypoints unreachable from home are dropped with a warning instead of
// aborting the set.
struct PlanArtifacts {
    Roadmap roadmap;
    CostMatrix matrix;  // reduced to reachable waypoints
    Tour tour;
    ReferencePath path;
    std::vector<int> set_waypoint_of;  // matrix index -> set waypoint index, -1 for home
    std::vector<std::string> warnings;
};

inline PlanArtifacts plan_waypoint_set(const TerrainMap& map, const ScenarioConfig& config,
                                       const std::vector<Vec2>& set_waypoints,
                                       std::uint64_t prm_seed) {
    PlanArtifacts art;
    std::vector<Vec2> points{config.home};
    points.insert(points.end(), set_waypoints.begin(), set_waypoints.end());
    const EdgeCostTable* overrides =
        config.edge_cost_overrides.empty() ? nullptr : &config.edge_cost_overrides;
    art.roadmap = build_prm(map, config.energy, points, config.prm.samples, config.prm.k,
                            prm_seed, overrides);
    CostMatrix full = goal_cost_matrix(art.roadmap);
    for (const auto& w : full.warnings) art.warnings.push_back(w);

    std::vector<int> keep{0};
    for (int i = 1; i < full.n; ++i) {
        if (std::isfinite(full.at(0, i)) && std::isfinite(full.at(i, 0))) {
            keep.push_back(i);
        } else {
            art.warnings.push_back("waypoint " + std::to_string(i - 1) +
                                   " unreachable from home, skipped");
        }
    }

    if (keep.size() == static_cast<size_t>(full.n)) {
        art.matrix = std::move(full);
    } else {
        CostMatrix red;
        red.n = static_cast<int>(keep.size());
        red.cost.assign(static_cast<size_t>(red.n) * red.n, 0.0);
        red.paths.assign(static_cast<size_t>(red.n) * red.n, {});
        for (int i = 0; i < red.n; ++i) {
            red.waypoint_nodes.push_back(full.waypoint_nodes[keep[i]]);
            for (int j = 0; j < red.n; ++j) {
                red.at(i, j) = full.at(keep[i], keep[j]);
                red.paths[static_cast<size_t>(i) * red.n + j] = full.path(keep[i], keep[j]);
            }
        }
        art.matrix = std::move(red);
    }
    for (int idx : keep) art.set_waypoint_of.push_back(idx - 1);

    if (art.matrix.n > 1) {
        art.tour = solve_tour(art.matrix, 0);
        art.path = stitch_reference_path(art.roadmap, art.matrix, art.tour, map);
    }
    return art;
}

// Deterministic trial engine. Outer loop supplies waypoint sets (cycling as
// configured, plans cached per distinct set); the inner loop runs the fixed
// tick pipeline: sense, track, arbitrate mode, plan or track-path, failsafe
// override, integrate, step the crowd, account energy, record.
inline TrialResult run_trial(const ScenarioConfig& config,
                             const std::function<void(const StepRecord&)>& sink = nullptr) {
    config.validate();
    TerrainMap map = config.build_terrain();
    if (!map.is_traversable(config.home)) throw UntraversableWaypointError(-1);

    TrialResult result;
    SimStats& stats = result.stats;

    Rng rng_sense(derive_seed(config.seed, "sense"));
    Rng rng_crowd(derive_seed(config.seed, "crowd"));

    auto predictor = make_predictor(config.predictor);
    PredictionParams pred_params = config.prediction;
    pred_params.robot_radius = config.robot_radius;
    pred_params.orca = config.crowd;
    if (!config.agents.empty()) {
        pred_params.agent_radius = config.agents.front().radius;
        pred_params.agent_max_speed = config.agents.front().max_speed;
    }

    // agents spawn into the active crowd at their spawn time
    std::vector<AgentState> pending;
    for (const auto& ac : config.agents) {
        AgentState a;
        a.id = ac.id;
        a.pos = ac.pos;
        a.radius = ac.radius;
        a.pref_speed = ac.pref_speed;
        a.max_speed = ac.max_speed;
        a.script = {ac.goals, ac.loop};
        a.spawn_time = ac.spawn_time;
        a.group = ac.group;
        pending.push_back(a);
    }
    std::sort(pending.begin(), pending.end(),
              [](const AgentState& a, const AgentState& b) { return a.spawn_time < b.spawn_time; });
    std::vector<AgentState> active;
    size_t next_pending = 0;
    auto spawn_up_to = [&](double now) {
        while (next_pending < pending.size() && pending[next_pending].spawn_time <= now)
            active.push_back(pending[next_pending++]);
    };

    Pose pose{config.home, config.home_heading};
    double battery = config.battery_wh;
    double herbicide = config.herbicide_l;
    Tracker tracker;
    tracker.params = config.tracker;
    ModeState mode_state;

    std::map<int, PlanArtifacts> plan_cache;
    long tick = 0;
    double t = 0.0;
    spawn_up_to(0.0);

    const int n_sources = static_cast<int>(config.waypoint_sets.size());
    const int max_sets = config.cycle_sets ? n_sources * config.max_set_cycles : n_sources;
    bool halted = false;

    for (int set_index = 0; set_index < max_sets && !halted; ++set_index) {
        if (set_index > 0 && battery <= config.reserve_wh) {
            stats.end_reason = "battery_reserve_at_set_boundary";
            halted = true;
            break;
        }
        int source = set_index % n_sources;
        auto cached = plan_cache.find(source);
        if (cached == plan_cache.end()) {
            PlanArtifacts art = plan_waypoint_set(map, config, config.waypoint_sets[source],
                                                  derive_seed(config.seed, "prm", source));
            for (const auto& w : art.warnings)
                stats.warnings.push_back("set " + std::to_string(source) + ": " + w);
            cached = plan_cache.emplace(source, std::move(art)).first;
        }
        const PlanArtifacts& art = cached->second;
        if (art.matrix.n <= 1) {
            stats.warnings.push_back("set " + std::to_string(source) +
                                     " has no reachable waypoints, skipped");
            continue;
        }
        const ReferencePath& path = art.path;
        const int n_stops = static_cast<int>(path.stop_arc.size());

        int objective_stop = 1;
        double progress = 0.0;
        double dwell_accum = 0.0;
        bool set_done = false;

        while (!set_done && !halted) {
            double leg_lo = path.stop_arc[objective_stop - 1];
            double leg_hi = path.stop_arc[objective_stop];
            progress = std::clamp(progress, leg_lo, leg_hi);
            progress = path.project(pose.pos, std::max(leg_lo, progress - 1.0),
                                    std::min(leg_hi, progress + 2.0));

            double closest = kInf;
            for (const auto& a : active) closest = std::min(closest, distance(a.pos, pose.pos));

            std::vector<Detection> detections = sense(pose, active, config.sensor, rng_sense);
            tracker.update(detections, pose, config.sensor, config.dt, t);
            std::vector<Track> confirmed = tracker.confirmed();

            // finish the dwell task before arbitration so a completed spray
            // immediately releases the mode
            Vec2 stop_pos = path.point_at(leg_hi);
            bool interior = objective_stop < n_stops - 1;
            if (interior && distance(pose.pos, stop_pos) <= config.sw.r_waypoint &&
                dwell_accum >= config.sw.t_spray) {
                stats.sprays.push_back({t, set_index,
                                        art.set_waypoint_of[art.tour.order[objective_stop]],
                                        stop_pos});
                herbicide = std::max(0.0, herbicide - config.spray_l_per_weed);
                stats.herbicide_used_l += config.spray_l_per_weed;
                objective_stop++;
                dwell_accum = 0.0;
                leg_lo = path.stop_arc[objective_stop - 1];
                leg_hi = path.stop_arc[objective_stop];
                progress = leg_lo;
                stop_pos = path.point_at(leg_hi);
                interior = objective_stop < n_stops - 1;
            }

            std::optional<Vec2> objective;
            if (interior) objective = stop_pos;
            mode_state = select_mode(mode_state, pose, confirmed, path, progress, objective,
                                     config.sw, t);

            bool blind_occupied = false;
            for (const auto& tr : confirmed)
                if (in_blind_spot(pose, tr.pos, config.sensor)) {
                    blind_occupied = true;
                    break;
                }

            DriveCommand cmd{0.0, 0.0};
            switch (mode_state.mode) {
                case Mode::Failsafe:
                case Mode::TaskDwell:
                    break;
                case Mode::LongTerm:
                    try {
                        cmd = track_path(pose, path, progress, leg_hi, config.sw, blind_occupied);
                    } catch (const PathExhaustedError&) {
                        cmd = {0.0, 0.0};
                    }
                    break;
                case Mode::Dynamic: {
                    const MctsParams* mcts = &config.mcts;
                    MctsParams filtered;
                    if (config.sw.blind_spot_guard && blind_occupied) {
                        filtered = config.mcts;
                        std::erase_if(filtered.actions, [](const Action& a) {
                            return a.v == 0.0 && a.omega != 0.0;
                        });
                        mcts = &filtered;
                    }
                    Action act = plan(pose, progress, confirmed, path, leg_lo, leg_hi,
                                      *predictor, pred_params, *mcts, config.sw,
                                      derive_seed(config.seed, "mcts",
                                                  static_cast<std::uint64_t>(tick)));
                    cmd = {act.v, act.omega};
                    break;
                }
            }

            if (failsafe_check(pose, confirmed, detections, config.sw)) cmd = {0.0, 0.0};

            Pose new_pose = simulate_step(pose, {cmd.v, cmd.omega}, config.dt, config.sw.v_max,
                                          config.sw.omega_max);
            Vec2 vel = (new_pose.pos - pose.pos) / config.dt;

            StepRecord rec;
            rec.t = t;
            rec.pose = pose;
            rec.v_overall = norm(vel);
            rec.v2goal = v2goal(vel, path, pose.pos, leg_lo, leg_hi, progress);
            rec.mode = mode_state.mode;
            rec.closest_agent = closest;
            rec.deviation = deviation(pose.pos, path, leg_lo, leg_hi);
            rec.battery_wh = battery;
            rec.tour_leg = objective_stop - 1;
            result.records.push_back(rec);
            if (sink) sink(rec);

            if (mode_state.mode == Mode::TaskDwell) dwell_accum += config.dt;

            OrcaDisc robot_disc{new_pose.pos, vel, config.robot_radius, false};
            step_crowd(active, &robot_disc, config.crowd, config.dt, rng_crowd,
                       config.crowd_heading_noise);

            double drain = tick_drain_wh(map, config.energy, pose.pos, new_pose.pos, config.dt,
                                         mode_state.mode == Mode::TaskDwell,
                                         config.spray_power_w);
            double applied = std::min(drain, battery);
            battery -= applied;
            stats.total_drain_wh += applied;

            pose = new_pose;
            ++tick;
            t = tick * config.dt;
            spawn_up_to(t);

            if (!interior && (distance(pose.pos, stop_pos) <= config.sw.r_waypoint ||
                              progress >= path.total_length() - 1e-6)) {
                set_done = true;
                stats.sets_completed++;
            }
            if (battery <= 0.0) {
                stats.end_reason = "battery_exhausted_mid_set";
                halted = true;
            }
            if (t >= config.max_sim_time && !halted) {
                stats.warnings.push_back("time limit reached before mission end");
                stats.end_reason = "time_limit";
                halted = true;
            }
        }
    }

    if (stats.end_reason.empty()) {
        stats.end_reason =
            battery <= config.reserve_wh ? "battery_reserve_at_set_boundary" : "sets_exhausted";
    }
    stats.ticks = tick;
    stats.battery_final_wh = battery;

    SummaryParams sp;
    sp.d_failsafe = config.sw.d_failsafe;
    sp.t_clear = config.sw.t_clear;
    sp.dt = config.dt;
    result.summary = summarize(result.records, sp);
    return result;
}

}  // namespace fieldnav
