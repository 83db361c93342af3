// Command-line front end: offline planning, single trials, trial sweeps, and
// re-summarizing telemetry. JSON in, CSV/JSON out.

#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "fieldnav/io.hpp"
#include "fieldnav/scenario.hpp"
#include "fieldnav/sim.hpp"
#include "fieldnav/version.hpp"

namespace fs = std::filesystem;
using namespace fieldnav;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNoPath = 3;
constexpr int kExitIo = 4;

void write_json_file(const std::string& path, const json& j) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    out << j.dump(2) << "\n";
    if (!out) throw IoError("write failed: " + path);
}

void write_manifest(const std::string& out_dir, const std::string& scenario_path,
                    const std::vector<std::uint64_t>& seeds,
                    const std::vector<std::string>& artifacts) {
    json m{{"scenario", scenario_path},
           {"seeds", seeds},
           {"out_dir", out_dir},
           {"artifacts", artifacts},
           {"tool_version", kVersion},
           {"config_hash", file_hash_hex(scenario_path)}};
    write_text_atomic(out_dir + "/manifest.json", m.dump(2) + "\n");
}

int cmd_plan(const std::string& scenario_path, const std::string& cost_matrix_path,
             std::uint64_t seed, bool seed_set, const std::string& out_dir, bool quiet) {
    fs::create_directories(out_dir);

    if (!cost_matrix_path.empty()) {
        // planner-only mode over a raw cost matrix
        std::ifstream in(cost_matrix_path);
        if (!in) throw IoError("cannot open cost matrix: " + cost_matrix_path);
        json j = json::parse(in);
        CostMatrix m = cost_matrix_from_json(j);
        int home = j.contains("home") ? j.at("home").get<int>() : 0;
        Tour tour = solve_tour(m, home);
        write_json_file(out_dir + "/tour.json", tour_to_json(tour));
        if (!quiet) {
            std::printf("tour:");
            for (int w : tour.order) std::printf(" %d", w);
            std::printf("\ntotal cost: %.3f J\n", tour.total_cost);
        }
        return 0;
    }

    ScenarioConfig config = load_scenario(scenario_path);
    if (seed_set) config.seed = seed;
    TerrainMap map = config.build_terrain();
    PlanArtifacts art = plan_waypoint_set(map, config, config.waypoint_sets.front(),
                                          derive_seed(config.seed, "prm", 0));
    if (art.matrix.n <= 1) throw DisconnectedError("no reachable waypoints in the first set");

    write_json_file(out_dir + "/roadmap.json", roadmap_to_json(art.roadmap));
    write_json_file(out_dir + "/tour.json", tour_to_json(art.tour));
    write_json_file(out_dir + "/refpath.json", refpath_to_json(art.path));
    write_manifest(out_dir, scenario_path, {config.seed},
                   {"roadmap.json", "tour.json", "refpath.json"});
    if (!quiet) {
        std::printf("tour:");
        for (int w : art.tour.order) std::printf(" %d", w);
        std::printf("\ntotal cost: %.3f J (%.4f Wh)\n", art.tour.total_cost,
                    art.tour.total_cost / 3600.0);
        for (const auto& w : art.warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
    }
    return 0;
}

json run_one_trial(const ScenarioConfig& config, const std::string& out_dir) {
    fs::create_directories(out_dir);
    TelemetryWriter writer(out_dir + "/telemetry.csv");
    TrialResult result = run_trial(config, [&](const StepRecord& r) { writer.append(r); });
    writer.close();

    json summary{{"scenario", config.name},
                 {"seed", config.seed},
                 {"summary", summary_to_json(result.summary)},
                 {"stats", stats_to_json(result.stats)}};
    write_json_file(out_dir + "/summary.json", summary);
    write_plot_data(out_dir + "/plotdata", result.records);
    return summary;
}

int cmd_simulate(const std::string& scenario_path, std::uint64_t seed, bool seed_set,
                 const std::string& out_dir, bool quiet) {
    ScenarioConfig config = load_scenario(scenario_path);
    if (seed_set) config.seed = seed;
    json summary = run_one_trial(config, out_dir);
    write_manifest(out_dir, scenario_path, {config.seed},
                   {"telemetry.csv", "summary.json", "plotdata"});
    if (!quiet) {
        const auto& st = summary.at("stats");
        std::printf("%s seed=%llu: %s after %.1f s, %d sets, %lld sprays, %.2f Wh used\n",
                    config.name.c_str(), static_cast<unsigned long long>(config.seed),
                    st.at("end_reason").get<std::string>().c_str(),
                    summary.at("summary").at("duration_s").get<double>(),
                    st.at("sets_completed").get<int>(),
                    static_cast<long long>(st.at("spray_count").get<std::int64_t>()),
                    summary.at("summary").at("energy_wh").get<double>());
    }
    return 0;
}

int cmd_sweep(const std::string& scenario_path, std::vector<std::uint64_t> seeds,
              const std::string& out_dir, unsigned workers, bool quiet) {
    if (seeds.empty()) throw ConfigError("sweep requires at least one seed");
    ScenarioConfig base = load_scenario(scenario_path);
    fs::create_directories(out_dir);

    std::vector<json> summaries(seeds.size());
    std::vector<std::string> errors(seeds.size());
    std::atomic<size_t> next{0};
    if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
    workers = std::min<unsigned>(workers, seeds.size());

    auto work = [&]() {
        for (size_t i = next.fetch_add(1); i < seeds.size(); i = next.fetch_add(1)) {
            try {
                ScenarioConfig config = base;
                config.seed = seeds[i];
                summaries[i] = run_one_trial(
                    config, out_dir + "/seed_" + std::to_string(seeds[i]));
            } catch (const std::exception& e) {
                errors[i] = e.what();
            }
        }
    };
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& th : pool) th.join();

    for (size_t i = 0; i < seeds.size(); ++i)
        if (!errors[i].empty())
            throw Error("seed " + std::to_string(seeds[i]) + " failed: " + errors[i]);

    std::vector<json> inner;
    for (const auto& s : summaries) inner.push_back(s.at("summary"));
    json agg{{"scenario", base.name},
             {"seeds", seeds},
             {"aggregate", aggregate_summaries(inner)}};
    write_json_file(out_dir + "/aggregate.json", agg);

    std::vector<std::string> artifacts{"aggregate.json"};
    for (auto s : seeds) artifacts.push_back("seed_" + std::to_string(s));
    write_manifest(out_dir, scenario_path, seeds, artifacts);
    if (!quiet)
        std::printf("%s: %zu seeds -> %s/aggregate.json\n", base.name.c_str(), seeds.size(),
                    out_dir.c_str());
    return 0;
}

int cmd_summarize(const std::string& telemetry_path, const std::string& scenario_path,
                  const std::string& out_path) {
    SummaryParams params;
    if (!scenario_path.empty()) {
        ScenarioConfig config = load_scenario(scenario_path);
        params.d_failsafe = config.sw.d_failsafe;
        params.t_clear = config.sw.t_clear;
        params.dt = config.dt;
    }
    auto records = parse_telemetry_csv(telemetry_path);
    TrialSummary s = summarize(records, params);
    json j = summary_to_json(s);
    if (out_path.empty()) {
        std::cout << j.dump(2) << "\n";
    } else {
        write_json_file(out_path, j);
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Energy-aware mission planning and dynamic navigation simulator"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);

    std::string scenario, out_dir = "out", cost_matrix, telemetry, summarize_out;
    std::uint64_t seed = 0;
    std::vector<std::uint64_t> seeds;
    unsigned workers = 0;
    bool quiet = false;
    app.add_flag("--quiet", quiet, "suppress progress output");

    auto* plan_cmd = app.add_subcommand("plan", "offline plan: roadmap, tour, reference path");
    plan_cmd->add_option("--scenario", scenario, "scenario JSON");
    plan_cmd->add_option("--cost-matrix", cost_matrix, "raw cost matrix JSON (planner-only)");
    auto* plan_seed = plan_cmd->add_option("--seed", seed, "override scenario seed");
    plan_cmd->add_option("--out", out_dir, "output directory");

    auto* sim_cmd = app.add_subcommand("simulate", "run one trial");
    sim_cmd->add_option("--scenario", scenario, "scenario JSON")->required();
    auto* sim_seed = sim_cmd->add_option("--seed", seed, "override scenario seed");
    sim_cmd->add_option("--out", out_dir, "output directory");

    auto* sweep_cmd = app.add_subcommand("sweep", "independent trials over several seeds");
    sweep_cmd->add_option("--scenario", scenario, "scenario JSON")->required();
    sweep_cmd->add_option("--seeds", seeds, "seed list")->required()->delimiter(',');
    sweep_cmd->add_option("--out", out_dir, "output directory");
    sweep_cmd->add_option("--workers", workers, "parallel trials (0 = hardware)");

    auto* sum_cmd = app.add_subcommand("summarize", "recompute summary from a telemetry CSV");
    sum_cmd->add_option("--telemetry", telemetry, "telemetry CSV")->required();
    sum_cmd->add_option("--scenario", scenario, "scenario JSON for metric parameters");
    sum_cmd->add_option("--out", summarize_out, "summary JSON path (default: stdout)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (plan_cmd->parsed()) {
            if (scenario.empty() && cost_matrix.empty())
                throw ConfigError("plan needs --scenario or --cost-matrix");
            return cmd_plan(scenario, cost_matrix, seed, !plan_seed->empty(), out_dir, quiet);
        }
        if (sim_cmd->parsed())
            return cmd_simulate(scenario, seed, !sim_seed->empty(), out_dir, quiet);
        if (sweep_cmd->parsed()) return cmd_sweep(scenario, seeds, out_dir, workers, quiet);
        if (sum_cmd->parsed()) return cmd_summarize(telemetry, scenario, summarize_out);
    } catch (const NoPathError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitNoPath;
    } catch (const DisconnectedError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitNoPath;
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitConfig;
    } catch (const UntraversableWaypointError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitConfig;
    } catch (const IoError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitIo;
    } catch (const json::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitConfig;
    } catch (const std::filesystem::filesystem_error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitIo;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
