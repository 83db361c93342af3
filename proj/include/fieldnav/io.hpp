#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "fieldnav/errors.hpp"
#include "fieldnav/mission.hpp"
#include "fieldnav/roadmap.hpp"
#include "fieldnav/rng.hpp"
#include "fieldnav/sim.hpp"
#include "fieldnav/telemetry.hpp"

namespace fieldnav {

inline json roadmap_to_json(const Roadmap& rm) {
    json j;
    j["nodes"] = json::array();
    for (const auto& p : rm.nodes) j["nodes"].push_back({p.x, p.y});
    j["edges"] = json::array();
    for (size_t i = 0; i < rm.adj.size(); ++i)
        for (const auto& e : rm.adj[i])
            j["edges"].push_back({static_cast<int>(i), e.to, e.cost, e.length});
    j["waypoint_nodes"] = rm.waypoint_nodes;
    return j;
}

inline Roadmap roadmap_from_json(const json& j) {
    Roadmap rm;
    for (const auto& n : j.at("nodes")) rm.add_node({n[0].get<double>(), n[1].get<double>()});
    for (const auto& e : j.at("edges"))
        rm.add_edge(e[0].get<int>(), e[1].get<int>(), e[2].get<double>(), e[3].get<double>());
    rm.waypoint_nodes = j.at("waypoint_nodes").get<std::vector<int>>();
    return rm;
}

inline json tour_to_json(const Tour& tour) {
    return json{{"order", tour.order}, {"total_cost_j", tour.total_cost}};
}

inline json refpath_to_json(const ReferencePath& path) {
    json j;
    j["points"] = json::array();
    for (const auto& p : path.points) j["points"].push_back({p.x, p.y});
    j["arc_length"] = path.arc;
    j["source"] = path.source;
    j["stop_arc"] = path.stop_arc;
    j["stop_waypoint"] = path.stop_waypoint;
    return j;
}

inline CostMatrix cost_matrix_from_json(const json& j) {
    CostMatrix m;
    const auto& rows = j.at("cost");
    m.n = static_cast<int>(rows.size());
    m.cost.assign(static_cast<size_t>(m.n) * m.n, 0.0);
    m.paths.assign(static_cast<size_t>(m.n) * m.n, {});
    for (int i = 0; i < m.n; ++i) {
        if (static_cast<int>(rows[i].size()) != m.n)
            throw ConfigError("cost matrix must be square");
        for (int k = 0; k < m.n; ++k) {
            const auto& cell = rows[i][k];
            m.at(i, k) = cell.is_null() ? kInf : cell.get<double>();
        }
    }
    return m;
}

inline json summary_to_json(const TrialSummary& s) {
    auto mode_map = [](const std::array<double, 4>& v) {
        return json{{"longterm", v[0]}, {"dynamic", v[1]}, {"failsafe", v[2]}, {"taskdwell", v[3]}};
    };
    json dev;
    const char* names[4] = {"longterm", "dynamic", "failsafe", "taskdwell"};
    for (int m = 0; m < 4; ++m) {
        const auto& d = s.deviation_stats[m];
        dev[names[m]] = {{"mean", d.mean}, {"p50", d.p50}, {"p95", d.p95}, {"max", d.max}};
    }
    auto finite_or_null = [](double v) { return std::isfinite(v) ? json(v) : json(); };
    return json{
        {"duration_s", s.duration_s},
        {"distance_m", s.distance_m},
        {"energy_wh", s.energy_wh},
        {"ticks", s.ticks},
        {"mode_fraction", mode_map(s.mode_fraction)},
        {"avg_v_overall", mode_map(s.avg_v_overall)},
        {"avg_v2goal", mode_map(s.avg_v2goal)},
        {"frac_v2goal_nonpos", mode_map(s.frac_v2goal_nonpos)},
        {"energy_frac_nonpos_dynamic", s.energy_frac_nonpos_dynamic},
        {"near_collision_count", s.near_collision_count},
        {"interaction_count", s.interaction_count},
        {"min_closest_overall", finite_or_null(s.min_closest_overall)},
        {"min_closest",
         json{{"longterm", finite_or_null(s.min_closest[0])},
              {"dynamic", finite_or_null(s.min_closest[1])},
              {"failsafe", finite_or_null(s.min_closest[2])},
              {"taskdwell", finite_or_null(s.min_closest[3])}}},
        {"avg_closest_dynamic_tick", finite_or_null(s.avg_closest_dynamic_tick)},
        {"avg_closest_per_interaction", finite_or_null(s.avg_closest_per_interaction)},
        {"deviation", dev},
    };
}

inline json stats_to_json(const SimStats& st) {
    json sprays = json::array();
    for (const auto& sp : st.sprays)
        sprays.push_back({{"t", sp.t},
                          {"set_iteration", sp.set_iteration},
                          {"waypoint", sp.waypoint_index},
                          {"pos", {sp.pos.x, sp.pos.y}}});
    return json{{"ticks", st.ticks},
                {"sets_completed", st.sets_completed},
                {"end_reason", st.end_reason},
                {"spray_count", st.sprays.size()},
                {"sprays", sprays},
                {"herbicide_used_l", st.herbicide_used_l},
                {"battery_final_wh", st.battery_final_wh},
                {"total_drain_wh", st.total_drain_wh},
                {"warnings", st.warnings}};
}

inline std::string file_hash_hex(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open file for hashing: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(fnv1a64(ss.str())));
    return buf;
}

// write to a temp file in the same directory, then rename into place
inline void write_text_atomic(const std::string& path, const std::string& content) {
    std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw IoError("cannot open for writing: " + tmp);
        out << content;
        if (!out) throw IoError("write failed: " + tmp);
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw IoError("rename failed for " + path + ": " + ec.message());
}

// Two-column histogram files per mode for external plotting: closest-agent
// distance, path deviation, and the two velocity measures.
inline void write_plot_data(const std::string& dir, const std::vector<StepRecord>& records,
                            double closest_bin = 0.5, double closest_max = 8.0) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    const char* names[4] = {"longterm", "dynamic", "failsafe", "taskdwell"};

    auto hist = closest_agent_histogram(records, closest_bin, closest_max);
    for (const auto& [mode, bins] : hist) {
        std::ofstream out(dir + "/closest_hist_" + mode_name(mode) + ".txt");
        for (size_t b = 0; b < bins.size(); ++b) {
            char line[64];
            std::snprintf(line, sizeof(line), "%.3f %.4f\n", (b + 0.5) * closest_bin, bins[b]);
            out << line;
        }
    }

    auto write_hist = [&](const std::string& name, int mode, double lo, double hi, double bin,
                          auto getter) {
        std::vector<double> counts(static_cast<size_t>(std::ceil((hi - lo) / bin)), 0.0);
        int total = 0;
        for (const auto& r : records) {
            if (static_cast<int>(r.mode) != mode) continue;
            double v = getter(r);
            if (v < lo || v >= hi) continue;
            counts[static_cast<size_t>((v - lo) / bin)] += 1.0;
            total++;
        }
        if (total == 0) return;
        std::ofstream out(dir + "/" + name + "_hist_" + names[mode] + ".txt");
        for (size_t b = 0; b < counts.size(); ++b) {
            char line[64];
            std::snprintf(line, sizeof(line), "%.3f %.4f\n", lo + (b + 0.5) * bin,
                          100.0 * counts[b] / total);
            out << line;
        }
    };
    for (int m = 0; m < 4; ++m) {
        write_hist("deviation", m, 0.0, 10.0, 0.25, [](const StepRecord& r) { return r.deviation; });
        write_hist("vel_overall", m, 0.0, 2.0, 0.1, [](const StepRecord& r) { return r.v_overall; });
        write_hist("vel2goal", m, -2.0, 2.0, 0.1, [](const StepRecord& r) { return r.v2goal; });
    }
}

// mean/stddev over per-seed summaries; numeric leaves only, dotted keys
inline void flatten_json(const json& j, const std::string& prefix,
                         std::map<std::string, std::vector<double>>& out) {
    if (j.is_number()) {
        out[prefix].push_back(j.get<double>());
    } else if (j.is_object()) {
        for (auto it = j.begin(); it != j.end(); ++it)
            flatten_json(it.value(), prefix.empty() ? it.key() : prefix + "." + it.key(), out);
    }
}

inline json aggregate_summaries(const std::vector<json>& summaries) {
    std::map<std::string, std::vector<double>> fields;
    for (const auto& s : summaries) flatten_json(s, "", fields);
    json agg;
    for (const auto& [key, values] : fields) {
        if (values.size() != summaries.size()) continue;  // absent in some run
        double mean = 0.0;
        for (double v : values) mean += v;
        mean /= values.size();
        double var = 0.0;
        for (double v : values) var += (v - mean) * (v - mean);
        var = values.size() > 1 ? var / (values.size() - 1) : 0.0;
        agg[key] = {{"mean", mean}, {"stddev", std::sqrt(var)}};
    }
    return agg;
}

}  // namespace fieldnav
