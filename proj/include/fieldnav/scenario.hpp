#pragma once

#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "fieldnav/controller.hpp"
#include "fieldnav/crowd.hpp"
#include "fieldnav/errors.hpp"
#include "fieldnav/local_planner.hpp"
#include "fieldnav/perception.hpp"
#include "fieldnav/prediction.hpp"
#include "fieldnav/terrain.hpp"

namespace fieldnav {

using nlohmann::json;

namespace cfg {

template <typename T>
T get_or(const json& j, const std::string& key, T fallback) {
    if (!j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError("bad value for '" + key + "': " + e.what());
    }
}

inline Vec2 to_vec2(const json& j) {
    if (!j.is_array() || j.size() != 2)
        throw ConfigError("expected [x, y] pair, got: " + j.dump());
    return {j[0].get<double>(), j[1].get<double>()};
}

inline std::vector<Vec2> to_points(const json& j) {
    std::vector<Vec2> pts;
    for (const auto& e : j) pts.push_back(to_vec2(e));
    return pts;
}

}  // namespace cfg

inline TerrainMap terrain_from_json(const json& j) {
    if (j.contains("generate")) {
        const json& g = j.at("generate");
        TerrainGenParams p;
        p.width = cfg::get_or(g, "width", p.width);
        p.height = cfg::get_or(g, "height", p.height);
        p.cell_size = cfg::get_or(g, "cell_size", p.cell_size);
        if (g.contains("origin")) p.origin = cfg::to_vec2(g.at("origin"));
        p.seed = cfg::get_or<std::uint64_t>(g, "seed", p.seed);
        p.hill_amplitude = cfg::get_or(g, "hill_amplitude", p.hill_amplitude);
        p.hill_scale = cfg::get_or(g, "hill_scale", p.hill_scale);
        p.octaves = cfg::get_or(g, "octaves", p.octaves);
        p.base_elevation = cfg::get_or(g, "base_elevation", p.base_elevation);
        p.slip_base = cfg::get_or(g, "slip_base", p.slip_base);
        p.slip_amplitude = cfg::get_or(g, "slip_amplitude", p.slip_amplitude);
        p.slip_scale = cfg::get_or(g, "slip_scale", p.slip_scale);
        if (g.contains("ramps"))
            for (const auto& r : g.at("ramps"))
                p.ramps.push_back({deg2rad(cfg::get_or(r, "angle_deg", 0.0)),
                                   cfg::get_or(r, "grade", 0.0)});
        if (g.contains("no_go"))
            for (const auto& poly : g.at("no_go")) p.no_go.push_back(cfg::to_points(poly));
        p.max_slope = deg2rad(cfg::get_or(g, "max_slope_deg", rad2deg(p.max_slope)));
        return generate_terrain(p);
    }

    TerrainMap map;
    map.width = cfg::get_or(j, "width", 0);
    map.height = cfg::get_or(j, "height", 0);
    map.cell_size = cfg::get_or(j, "cell_size", 1.0);
    if (j.contains("origin")) map.origin = cfg::to_vec2(j.at("origin"));
    map.max_slope = deg2rad(cfg::get_or(j, "max_slope_deg", rad2deg(map.max_slope)));
    if (!j.contains("elevation")) throw ConfigError("terrain: missing 'elevation'");
    map.elevation = j.at("elevation").get<std::vector<double>>();
    if (j.contains("slip")) {
        map.slip = j.at("slip").get<std::vector<double>>();
    } else {
        map.slip.assign(map.elevation.size(), 0.0);
    }
    if (j.contains("no_go"))
        for (const auto& poly : j.at("no_go")) map.no_go.push_back(cfg::to_points(poly));
    map.finalize();
    return map;
}

struct AgentConfig {
    int id = 0;
    Vec2 pos;
    double radius = 0.4;
    double pref_speed = 1.3;
    double max_speed = 1.75;
    std::vector<Vec2> goals;
    bool loop = false;
    double spawn_time = 0.0;
    std::string group;
};

struct PrmConfig {
    int samples = 500;
    int k = 8;
};

struct ScenarioConfig {
    std::string name = "scenario";
    std::uint64_t seed = 1;
    double dt = 0.1;
    json terrain_json;
    EnergyParams energy;
    EdgeCostTable edge_cost_overrides;
    Vec2 home;
    double home_heading = 0.0;
    std::vector<std::vector<Vec2>> waypoint_sets;
    bool cycle_sets = true;
    int max_set_cycles = 10;
    PrmConfig prm;
    double robot_radius = 0.6;
    double battery_wh = 500.0;
    double reserve_wh = 0.0;
    double herbicide_l = 20.0;
    double spray_l_per_weed = 0.25;
    double spray_power_w = 300.0;
    std::vector<AgentConfig> agents;
    OrcaParams crowd;
    double crowd_heading_noise = 0.0;
    SensorModel sensor;
    TrackerParams tracker;
    std::string predictor = "orca";
    PredictionParams prediction;
    MctsParams mcts;
    SwitchParams sw;
    double max_sim_time = 7200.0;

    TerrainMap build_terrain() const { return terrain_from_json(terrain_json); }

    void validate() const {
        if (dt <= 0.0 || dt > 0.2) throw ConfigError("dt must be in (0, 0.2]");
        if (!(battery_wh > reserve_wh) || reserve_wh < 0.0)
            throw ConfigError("battery_wh must exceed reserve_wh >= 0");
        if (waypoint_sets.empty()) throw ConfigError("at least one waypoint set required");
        for (const auto& set : waypoint_sets)
            if (set.empty() || set.size() > 12)
                throw ConfigError("waypoint sets must hold 1-12 points");
        for (const auto& a : agents) {
            if (a.radius <= 0.0) throw ConfigError("agent radius must be > 0");
            if (a.pref_speed > a.max_speed + 1e-9)
                throw ConfigError("agent pref_speed must not exceed max_speed");
        }
        if (sensor.fov_angle <= 0.0 || sensor.fov_angle >= 2.0 * kPi)
            throw ConfigError("sensor fov must be in (0, 2*pi)");
        if (sensor.range <= 0.0) throw ConfigError("sensor range must be > 0");
        if (crowd.time_horizon <= 0.0) throw ConfigError("crowd time_horizon must be > 0");
        if (crowd.responsibility <= 0.0 || crowd.responsibility > 1.0)
            throw ConfigError("crowd responsibility must be in (0, 1]");
        if (prm.samples < 0 || prm.k < 1) throw ConfigError("prm: samples >= 0, k >= 1");
        energy.validate();
        mcts.validate();
        sw.validate();
    }
};

inline ScenarioConfig scenario_from_json(const json& j, const std::string& base_dir = "") {
    ScenarioConfig c;
    c.name = cfg::get_or<std::string>(j, "name", c.name);
    c.seed = cfg::get_or<std::uint64_t>(j, "seed", c.seed);
    c.dt = cfg::get_or(j, "dt", c.dt);

    if (!j.contains("terrain")) throw ConfigError("missing 'terrain'");
    c.terrain_json = j.at("terrain");
    if (c.terrain_json.contains("file")) {
        std::string path = c.terrain_json.at("file").get<std::string>();
        if (!base_dir.empty() && path.front() != '/') path = base_dir + "/" + path;
        std::ifstream in(path);
        if (!in) throw ConfigError("cannot open terrain file: " + path);
        c.terrain_json = json::parse(in);
    }

    if (j.contains("energy")) {
        const json& e = j.at("energy");
        c.energy.mass = cfg::get_or(e, "mass", c.energy.mass);
        c.energy.gravity = cfg::get_or(e, "gravity", c.energy.gravity);
        c.energy.rolling_coeff = cfg::get_or(e, "rolling_coeff", c.energy.rolling_coeff);
        c.energy.drivetrain_eff = cfg::get_or(e, "drivetrain_eff", c.energy.drivetrain_eff);
        c.energy.regen_factor = cfg::get_or(e, "regen_factor", c.energy.regen_factor);
        c.energy.idle_power = cfg::get_or(e, "idle_power", c.energy.idle_power);
        c.energy.floor_energy_per_m =
            cfg::get_or(e, "floor_energy_per_m", c.energy.floor_energy_per_m);
    }

    if (j.contains("edge_cost_table")) {
        const json& t = j.at("edge_cost_table");
        json rows = t;
        if (t.is_object() && t.contains("file")) {
            std::string path = t.at("file").get<std::string>();
            if (!base_dir.empty() && path.front() != '/') path = base_dir + "/" + path;
            std::ifstream in(path);
            if (!in) throw ConfigError("cannot open edge cost table: " + path);
            rows = json::parse(in);
        }
        for (const auto& row : rows)
            c.edge_cost_overrides.set(cfg::to_vec2(row.at("from")), cfg::to_vec2(row.at("to")),
                                      row.at("cost").get<double>());
    }

    if (!j.contains("home")) throw ConfigError("missing 'home'");
    c.home = cfg::to_vec2(j.at("home"));
    c.home_heading = deg2rad(cfg::get_or(j, "home_heading_deg", 0.0));
    if (!j.contains("waypoint_sets")) throw ConfigError("missing 'waypoint_sets'");
    for (const auto& set : j.at("waypoint_sets")) c.waypoint_sets.push_back(cfg::to_points(set));
    c.cycle_sets = cfg::get_or(j, "cycle_sets", c.cycle_sets);
    c.max_set_cycles = cfg::get_or(j, "max_set_cycles", c.max_set_cycles);

    if (j.contains("prm")) {
        c.prm.samples = cfg::get_or(j.at("prm"), "samples", c.prm.samples);
        c.prm.k = cfg::get_or(j.at("prm"), "k", c.prm.k);
    }
    if (j.contains("robot")) {
        c.robot_radius = cfg::get_or(j.at("robot"), "radius", c.robot_radius);
    }
    c.battery_wh = cfg::get_or(j, "battery_wh", c.battery_wh);
    c.reserve_wh = cfg::get_or(j, "reserve_wh", c.reserve_wh);
    c.herbicide_l = cfg::get_or(j, "herbicide_l", c.herbicide_l);
    c.spray_l_per_weed = cfg::get_or(j, "spray_l_per_weed", c.spray_l_per_weed);
    c.spray_power_w = cfg::get_or(j, "spray_power_w", c.spray_power_w);
    c.max_sim_time = cfg::get_or(j, "max_sim_time", c.max_sim_time);

    if (j.contains("agents")) {
        int auto_id = 1;
        for (const auto& a : j.at("agents")) {
            AgentConfig ac;
            ac.id = cfg::get_or(a, "id", auto_id);
            auto_id = std::max(auto_id, ac.id) + 1;
            ac.pos = cfg::to_vec2(a.at("pos"));
            ac.radius = cfg::get_or(a, "radius", ac.radius);
            ac.pref_speed = cfg::get_or(a, "pref_speed", ac.pref_speed);
            ac.max_speed = cfg::get_or(a, "max_speed", ac.max_speed);
            if (a.contains("goals")) ac.goals = cfg::to_points(a.at("goals"));
            ac.loop = cfg::get_or(a, "loop", ac.loop);
            ac.spawn_time = cfg::get_or(a, "spawn_time", ac.spawn_time);
            ac.group = cfg::get_or<std::string>(a, "group", "");
            c.agents.push_back(ac);
        }
    }

    if (j.contains("crowd")) {
        const json& cr = j.at("crowd");
        c.crowd.time_horizon = cfg::get_or(cr, "time_horizon", c.crowd.time_horizon);
        c.crowd.neighbor_dist = cfg::get_or(cr, "neighbor_dist", c.crowd.neighbor_dist);
        c.crowd.responsibility = cfg::get_or(cr, "responsibility", c.crowd.responsibility);
        c.crowd_heading_noise = cfg::get_or(cr, "heading_noise", c.crowd_heading_noise);
    }
    if (j.contains("sensor")) {
        const json& sn = j.at("sensor");
        c.sensor.fov_angle = deg2rad(cfg::get_or(sn, "fov_deg", rad2deg(c.sensor.fov_angle)));
        c.sensor.range = cfg::get_or(sn, "range", c.sensor.range);
        c.sensor.pos_noise_sigma = cfg::get_or(sn, "noise_sigma", c.sensor.pos_noise_sigma);
        c.sensor.detect_prob = cfg::get_or(sn, "detect_prob", c.sensor.detect_prob);
    }
    if (j.contains("tracker")) {
        const json& tr = j.at("tracker");
        c.tracker.gate = cfg::get_or(tr, "gate", c.tracker.gate);
        c.tracker.alpha = cfg::get_or(tr, "alpha", c.tracker.alpha);
        c.tracker.beta = cfg::get_or(tr, "beta", c.tracker.beta);
        c.tracker.conf_up = cfg::get_or(tr, "conf_up", c.tracker.conf_up);
        c.tracker.conf_decay_visible = cfg::get_or(tr, "decay_visible", c.tracker.conf_decay_visible);
        c.tracker.conf_decay_blind = cfg::get_or(tr, "decay_blind", c.tracker.conf_decay_blind);
        c.tracker.conf_init = cfg::get_or(tr, "conf_init", c.tracker.conf_init);
        c.tracker.conf_confirm = cfg::get_or(tr, "conf_confirm", c.tracker.conf_confirm);
        c.tracker.conf_delete = cfg::get_or(tr, "conf_delete", c.tracker.conf_delete);
    }
    c.predictor = cfg::get_or<std::string>(j, "predictor", c.predictor);
    if (j.contains("prediction")) {
        const json& p = j.at("prediction");
        c.prediction.sigma_pos = cfg::get_or(p, "sigma_pos", c.prediction.sigma_pos);
        c.prediction.tau_goal = cfg::get_or(p, "tau_goal", c.prediction.tau_goal);
        c.prediction.pref_speed_noise =
            cfg::get_or(p, "pref_speed_noise", c.prediction.pref_speed_noise);
    }
    if (j.contains("mcts")) {
        const json& m = j.at("mcts");
        c.mcts.iterations = cfg::get_or(m, "iterations", c.mcts.iterations);
        c.mcts.depth = cfg::get_or(m, "depth", c.mcts.depth);
        c.mcts.dt_plan = cfg::get_or(m, "dt_plan", c.mcts.dt_plan);
        c.mcts.ucb_c = cfg::get_or(m, "ucb_c", c.mcts.ucb_c);
        c.mcts.w_progress = cfg::get_or(m, "w_progress", c.mcts.w_progress);
        c.mcts.w_dev = cfg::get_or(m, "w_dev", c.mcts.w_dev);
        c.mcts.w_soft = cfg::get_or(m, "w_soft", c.mcts.w_soft);
        c.mcts.w_col = cfg::get_or(m, "w_col", c.mcts.w_col);
        c.mcts.d_soft = cfg::get_or(m, "d_soft", c.mcts.d_soft);
        c.mcts.d_col = cfg::get_or(m, "d_col", c.mcts.d_col);
        c.mcts.discount = cfg::get_or(m, "discount", c.mcts.discount);
        if (m.contains("speeds") || m.contains("turn_rates")) {
            auto speeds = cfg::get_or(m, "speeds", std::vector<double>{0.0, 0.75, 1.5});
            auto turns =
                cfg::get_or(m, "turn_rates", std::vector<double>{-0.6, -0.3, 0.0, 0.3, 0.6});
            c.mcts.actions.clear();
            for (double v : speeds)
                for (double w : turns) c.mcts.actions.push_back({v, w});
        }
    }
    if (j.contains("switch")) {
        const json& s = j.at("switch");
        c.sw.r_agent = cfg::get_or(s, "r_agent", c.sw.r_agent);
        c.sw.r_path = cfg::get_or(s, "r_path", c.sw.r_path);
        c.sw.lookahead_window = cfg::get_or(s, "lookahead_window", c.sw.lookahead_window);
        c.sw.t_clear = cfg::get_or(s, "t_clear", c.sw.t_clear);
        c.sw.d_failsafe = cfg::get_or(s, "d_failsafe", c.sw.d_failsafe);
        c.sw.d_resume = cfg::get_or(s, "d_resume", c.sw.d_resume);
        c.sw.r_waypoint = cfg::get_or(s, "r_waypoint", c.sw.r_waypoint);
        c.sw.t_spray = cfg::get_or(s, "t_spray", c.sw.t_spray);
        c.sw.lookahead = cfg::get_or(s, "lookahead", c.sw.lookahead);
        c.sw.v_max = cfg::get_or(s, "v_max", c.sw.v_max);
        c.sw.omega_max = cfg::get_or(s, "omega_max", c.sw.omega_max);
        c.sw.theta_tip = deg2rad(cfg::get_or(s, "theta_tip_deg", rad2deg(c.sw.theta_tip)));
        c.sw.v_creep = cfg::get_or(s, "v_creep", c.sw.v_creep);
        c.sw.blind_spot_guard = cfg::get_or(s, "blind_spot_guard", c.sw.blind_spot_guard);
    }

    c.validate();
    return c;
}

inline ScenarioConfig load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open scenario file: " + path);
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("scenario parse error in " + path + ": " + e.what());
    }
    std::string base_dir;
    auto slash = path.find_last_of('/');
    if (slash != std::string::npos) base_dir = path.substr(0, slash);
    try {
        return scenario_from_json(j, base_dir);
    } catch (const json::exception& e) {
        throw ConfigError("scenario error in " + path + ": " + e.what());
    }
}

}  // namespace fieldnav
