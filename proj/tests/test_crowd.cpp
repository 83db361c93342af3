#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "fieldnav/crowd.hpp"
#include "fieldnav/rng.hpp"

using namespace fieldnav;

namespace {

AgentState make_agent(int id, Vec2 pos, Vec2 goal, double pref = 1.3, double radius = 0.4) {
    AgentState a;
    a.id = id;
    a.pos = pos;
    a.radius = radius;
    a.pref_speed = pref;
    a.max_speed = 1.75;
    a.script = {{goal}, false};
    return a;
}

double min_pair_distance(const std::vector<AgentState>& agents) {
    double best = kInf;
    for (size_t i = 0; i < agents.size(); ++i)
        for (size_t j = i + 1; j < agents.size(); ++j)
            best = std::min(best, distance(agents[i].pos, agents[j].pos));
    return best;
}

}  // namespace

TEST_CASE("preferred_velocity: at goal reports zero and advances the script") {
    AgentState a = make_agent(0, {5, 5}, {5.1, 5.0});
    CHECK(preferred_velocity(a) == Vec2{0, 0});
    CHECK(a.script_done);
    CHECK(preferred_velocity(a) == Vec2{0, 0});
}

TEST_CASE("preferred_velocity: heads straight for the goal at pref speed") {
    AgentState a = make_agent(0, {0, 0}, {10, 0}, 1.2);
    Vec2 v = preferred_velocity(a);
    CHECK(v.x == doctest::Approx(1.2));
    CHECK(v.y == doctest::Approx(0.0));
}

TEST_CASE("preferred_velocity: looped script cycles goal indices") {
    AgentState a = make_agent(0, {0, 0}, {0, 0});
    a.script = {{{5, 0}, {0, 0}}, true};
    a.pos = {5, 0};  // at goal 0
    CHECK(a.goal_index == 0);
    preferred_velocity(a);
    CHECK(a.goal_index == 1);
    a.pos = {0, 0};  // at goal 1
    preferred_velocity(a);
    CHECK(a.goal_index == 0);  // wrapped
    CHECK_FALSE(a.script_done);
}

TEST_CASE("orca_velocity: no neighbours returns the preferred velocity exactly") {
    AgentState a = make_agent(0, {0, 0}, {10, 0});
    Vec2 pref{1.1, 0.2};
    CHECK(orca_velocity(a, pref, {}, {}, 0.1) == pref);
}

TEST_CASE("orca_velocity: receding neighbour leaves the preferred velocity alone") {
    AgentState a = make_agent(0, {0, 0}, {10, 0});
    a.vel = {1.0, 0.0};
    Vec2 pref{1.0, 0.0};
    std::vector<OrcaDisc> nb{{{3.0, 0.0}, {2.5, 0.0}, 0.4, true}};
    Vec2 v = orca_velocity(a, pref, nb, {}, 0.1);
    CHECK(v.x == doctest::Approx(1.0));
    CHECK(v.y == doctest::Approx(0.0));
}

TEST_CASE("orca_velocity: head-on pair keeps clear of each other") {
    OrcaParams params;
    std::vector<AgentState> agents{make_agent(0, {-8, 0}, {8, 0}),
                                   make_agent(1, {8, 0.0}, {-8, 0})};
    agents[0].vel = {1.3, 0};
    agents[1].vel = {-1.3, 0};
    Rng rng(3);
    double min_dist = kInf;
    for (int step = 0; step < 200; ++step) {  // 20 s at 0.1
        step_crowd(agents, nullptr, params, 0.1, rng);
        min_dist = std::min(min_dist, min_pair_distance(agents));
    }
    CHECK(min_dist >= 0.8);
    // both actually passed through to the other side
    CHECK(agents[0].pos.x > 6.0);
    CHECK(agents[1].pos.x < -6.0);
}

TEST_CASE("step_crowd: zero agents is a no-op") {
    std::vector<AgentState> agents;
    Rng rng(1);
    CHECK_NOTHROW(step_crowd(agents, nullptr, {}, 0.1, rng));
    CHECK(agents.empty());
}

TEST_CASE("step_crowd: identical seeds give identical trajectories") {
    auto run = [](std::uint64_t seed) {
        std::vector<AgentState> agents{make_agent(0, {-5, 0}, {5, 0}),
                                       make_agent(1, {5, 0.2}, {-5, 0.2}),
                                       make_agent(2, {0, -5}, {0, 5})};
        Rng rng(seed);
        for (int step = 0; step < 100; ++step)
            step_crowd(agents, nullptr, {}, 0.1, rng, 0.05);
        return agents;
    };
    auto a = run(9), b = run(9), c = run(10);
    for (size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].pos == b[i].pos);
        CHECK(a[i].vel == b[i].vel);
    }
    bool same = true;
    for (size_t i = 0; i < a.size(); ++i) same = same && norm(a[i].pos - c[i].pos) < 1e-12;
    CHECK_FALSE(same);
}

TEST_CASE("step_crowd: eight-agent antipodal circle swap") {
    OrcaParams params;
    std::vector<AgentState> agents;
    const double R = 8.0;
    for (int i = 0; i < 8; ++i) {
        double ang = 2.0 * kPi * i / 8;
        Vec2 start{R * std::cos(ang), R * std::sin(ang)};
        agents.push_back(make_agent(i, start, -start));
    }
    Rng rng(17);
    double min_dist = kInf;
    int steps_to_done = -1;
    for (int step = 0; step < 600; ++step) {  // up to 60 s
        step_crowd(agents, nullptr, params, 0.1, rng);
        min_dist = std::min(min_dist, min_pair_distance(agents));
        bool all_done = true;
        for (const auto& a : agents) all_done = all_done && a.script_done;
        if (all_done) {
            steps_to_done = step;
            break;
        }
    }
    CHECK(min_dist >= 0.8 - 0.05);
    CHECK(steps_to_done > 0);
    for (const auto& a : agents) CHECK(distance(a.pos, a.script.goals[0]) < 0.5);
}

TEST_CASE("step_crowd: relabelling agents leaves the trajectory set unchanged") {
    auto run = [](const std::vector<int>& order) {
        std::vector<AgentState> base{make_agent(0, {-6, 0}, {6, 0}),
                                     make_agent(1, {6, 0}, {-6, 0}),
                                     make_agent(2, {0, 6}, {0, -6}),
                                     make_agent(3, {0, -6}, {0, 6})};
        std::vector<AgentState> agents;
        for (size_t i = 0; i < order.size(); ++i) {
            AgentState a = base[order[i]];
            a.id = static_cast<int>(i);
            agents.push_back(a);
        }
        Rng rng(4);
        for (int step = 0; step < 150; ++step) step_crowd(agents, nullptr, {}, 0.1, rng);
        std::vector<Vec2> final_pos;
        for (const auto& a : agents) final_pos.push_back(a.pos);
        std::sort(final_pos.begin(), final_pos.end(), [](Vec2 a, Vec2 b) {
            return a.x != b.x ? a.x < b.x : a.y < b.y;
        });
        return final_pos;
    };
    auto base = run({0, 1, 2, 3});
    auto shuffled = run({2, 0, 3, 1});
    REQUIRE(base.size() == shuffled.size());
    for (size_t i = 0; i < base.size(); ++i)
        CHECK(distance(base[i], shuffled[i]) < 1e-9);
}

TEST_CASE("step_crowd: speed never exceeds max_speed") {
    Rng scenario_rng(77);
    for (int trial = 0; trial < 5; ++trial) {
        std::vector<AgentState> agents;
        for (int i = 0; i < 6; ++i)
            agents.push_back(make_agent(i,
                                        {scenario_rng.uniform(-6.0, 6.0),
                                         scenario_rng.uniform(-6.0, 6.0)},
                                        {scenario_rng.uniform(-6.0, 6.0),
                                         scenario_rng.uniform(-6.0, 6.0)}));
        Rng rng(trial);
        for (int step = 0; step < 100; ++step) {
            step_crowd(agents, nullptr, {}, 0.1, rng, 0.1);
            for (const auto& a : agents) CHECK(norm(a.vel) <= a.max_speed + 1e-9);
        }
    }
}

TEST_CASE("step_crowd: overlapping agents push apart") {
    std::vector<AgentState> agents{make_agent(0, {0, 0}, {5, 0}),
                                   make_agent(1, {0.3, 0}, {-5, 0})};
    Rng rng(2);
    for (int step = 0; step < 30; ++step) step_crowd(agents, nullptr, {}, 0.1, rng);
    CHECK(distance(agents[0].pos, agents[1].pos) > 0.6);
}

TEST_CASE("step_crowd: robot disc is avoided without reciprocity") {
    // agent walking straight at a stationary robot disc must flow around it
    std::vector<AgentState> agents{make_agent(0, {-6, 0.05}, {6, 0.05})};
    OrcaDisc robot{{0, 0}, {0, 0}, 0.6, false};
    Rng rng(5);
    double min_dist = kInf;
    for (int step = 0; step < 150; ++step) {
        step_crowd(agents, &robot, {}, 0.1, rng);
        min_dist = std::min(min_dist, distance(agents[0].pos, robot.pos));
    }
    CHECK(min_dist >= 1.0 - 0.05);  // 0.4 + 0.6 combined radius
    CHECK(agents[0].pos.x > 4.0);   // still made it past
}
