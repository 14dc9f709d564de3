#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "hyc/strategy.hpp"
#include "testutil.hpp"

using namespace hyc;

namespace {

ExploreNode frontierNode(std::vector<int> path, int m, int n) {
    ExploreNode node;
    node.path = std::move(path);
    node.m = m;
    node.n = n;
    return node;
}

}  // namespace

TEST_CASE("cost model: symbolic cost curve and clamping") {
    CostModel cost;
    CHECK(cost.symbolicCost(1) == doctest::Approx(0.08329).epsilon(1e-3));
    CHECK(cost.symbolicCost(2) == doctest::Approx(5.1104).epsilon(1e-4));
    CHECK(cost.symbolicCost(0) == 1e-6);  // exp(-1.65)-1 < 0 clamps
    CHECK(cost.symbolicCost(3) > cost.symbolicCost(2));
}

TEST_CASE("cost updates are an EWMA with weight 0.2") {
    CostModel cost;
    cost.traceCost = 1.0;
    CHECK(updateCost(cost, 1.0).traceCost == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(updateCost(cost, 2.0).traceCost == doctest::Approx(1.2).epsilon(1e-15));
    CostModel fresh;
    CHECK(updateCost(fresh, 0.37).traceCost == 0.37);  // first observation initializes
    CostModel pinned;
    pinned.traceCost = 0.5;
    pinned.pinned = true;
    CHECK(updateCost(pinned, 9.0).traceCost == 0.5);
    CHECK_THROWS_AS(updateCost(fresh, -1.0), std::invalid_argument);
}

TEST_CASE("cheap traces keep the strategy sampling") {
    // q_hat = 0.5 against a 2-step global query: 0.01/0.5 = 0.02 < 5.1104.
    HybridAutomaton h = hyctest::lineModel("1", {{"x > 0.5", "sink"}});
    ExploreNode node = frontierNode({0, 0}, 0, 0);
    CostModel cost;
    cost.traceCost = 0.01;
    StrategyConfig cfg;
    cfg.mode = StrategyMode::Global;
    Action a = chooseAction({{&node, 1}}, h, cost, cfg);
    CHECK_FALSE(a.symbolic);
    CHECK(a.choice.queryLength == 2);
    CHECK(a.choice.symbolicKey == doctest::Approx(5.1104).epsilon(1e-4));
    CHECK(a.choice.randomKey == doctest::Approx(0.02).epsilon(1e-12));
}

TEST_CASE("a starved node flips the choice to the solver") {
    // q_hat = (0+1)/(98+0+2) = 0.01; 1.0/0.01 = 100 >= c_s(1) = 0.0833.
    HybridAutomaton h = hyctest::lineModel("1", {{"x > 0.5", "sink"}});
    ExploreNode node = frontierNode({0}, 98, 0);
    CostModel cost;
    cost.traceCost = 1.0;
    StrategyConfig cfg;
    cfg.mode = StrategyMode::Local;
    Action a = chooseAction({{&node, 1}}, h, cost, cfg);
    CHECK(a.symbolic);
    CHECK(a.choice.qHat == doctest::Approx(0.01).epsilon(1e-12));
    CHECK(a.choice.queryLength == 1);
}

TEST_CASE("argmin prefers the node with the cheaper expected discovery") {
    HybridAutomaton h = hyctest::lineModel("1", {{"x > 0.5", "a"}, {"x > 0.6", "b"}});
    ExploreNode hopeful = frontierNode({0}, 0, 0);   // q_hat = 0.5
    ExploreNode starved = frontierNode({0}, 38, 3);  // q_hat ~ 0.093
    CostModel cost;
    cost.traceCost = 0.01;
    StrategyConfig cfg;
    cfg.mode = StrategyMode::Local;
    Action a = chooseAction({{&starved, 1}, {&hopeful, 2}}, h, cost, cfg);
    CHECK_FALSE(a.symbolic);
    CHECK(a.choice.qHat == doctest::Approx(0.5));
    CHECK(a.choice.target == 2);
}

TEST_CASE("an empty frontier always samples") {
    HybridAutomaton h = hyctest::lineModel("1", {});
    CostModel cost;
    cost.traceCost = 100.0;
    StrategyConfig cfg;
    Action a = chooseAction({}, h, cost, cfg);
    CHECK_FALSE(a.symbolic);
}

TEST_CASE("chooseAction is a pure function of its snapshot") {
    HybridAutomaton h = hyctest::lineModel("1", {{"x > 0.5", "sink"}});
    ExploreNode node = frontierNode({0}, 7, 2);
    CostModel cost;
    cost.traceCost = 0.02;
    StrategyConfig cfg;
    cfg.mode = StrategyMode::Local;
    Action a = chooseAction({{&node, 1}}, h, cost, cfg);
    Action b = chooseAction({{&node, 1}}, h, cost, cfg);
    CHECK(a.symbolic == b.symbolic);
    CHECK(a.choice.nodePath == b.choice.nodePath);
    CHECK(a.choice.target == b.choice.target);
    CHECK(a.choice.randomKey == b.choice.randomKey);
    CHECK(a.choice.symbolicKey == b.choice.symbolicKey);
}

TEST_CASE("random-only runs replay the standalone sampler stream") {
    HybridAutomaton h = hyctest::loadBundled("sewerage.json");
    SamplerConfig scfg;
    scfg.maxSteps = 2;
    scfg.timePoints = 8;
    scfg.integrator.step = 1e-3;
    SolverConfig solver;
    StrategyConfig strat;
    strat.mode = StrategyMode::RandomOnly;
    strat.maxSamples = 20;
    strat.fixedTraceCost = 0.001;
    const std::uint64_t seed = 77;
    RunReport rep = runConcolic(h, scfg, solver, strat, seed);
    REQUIRE(rep.tracesSampled == 20);

    // Mirror the run with bare sampleTrace calls and compare the tree shape.
    scfg.seed = seed;
    ExploreTree mirror(h, splitmix64(seed ^ 0xC0FFEEULL));
    for (std::uint64_t i = 0; i < 20; ++i) mirror.recordTrace(sampleTrace(h, scfg, i));
    std::map<std::string, std::pair<int, int>> expect;
    mirror.forEach([&](const ExploreNode& node) {
        std::string key;
        for (int m : node.path) key += std::to_string(m) + ".";
        expect[key] = {node.m, node.n};
    });
    REQUIRE(rep.tree.size() == expect.size());
    for (const auto& node : rep.tree) {
        std::string key;
        for (const auto& name : node.path) key += std::to_string(h.modeIndex(name)) + ".";
        REQUIRE(expect.count(key) == 1);
        CHECK(expect[key].first == node.m);
        CHECK(expect[key].second == node.n);
    }
}

TEST_CASE("counterexample verdicts re-simulate into a negative mode") {
    HybridAutomaton h = hyctest::loadBundled("oscillator.json");
    SamplerConfig scfg;
    scfg.maxSteps = 5;
    SolverConfig solver;
    StrategyConfig strat;
    strat.mode = StrategyMode::Local;
    strat.fixedTraceCost = 0.012;
    RunReport rep = runConcolic(h, scfg, solver, strat, 7);
    REQUIRE(rep.outcome == RunOutcome::Counterexample);
    REQUIRE(rep.counterexample.has_value());
    CHECK(isCounterexample(h, *rep.counterexample));
    CHECK(traceReplaysConsistently(h, *rep.counterexample, scfg.integrator));
    CHECK(rep.confidence.verdict == Verdict::Fail);
}

TEST_CASE("graph-unreachable negative modes pass immediately") {
    HybridAutomaton h = hyctest::lineModel("1", {{"x > 0.5", "sink"}});
    Mode iso;
    iso.name = "isolated";
    iso.rhs.push_back(parseExpr("0", h.variables));
    h.modes.push_back(std::move(iso));
    h.negativeModes.insert(h.modeIndex("isolated"));
    SamplerConfig scfg;
    SolverConfig solver;
    StrategyConfig strat;
    strat.mode = StrategyMode::Local;
    RunReport rep = runConcolic(h, scfg, solver, strat, 1);
    CHECK(rep.outcome == RunOutcome::Pass);
    CHECK(rep.tracesSampled == 0);
    CHECK(rep.note.find("unreachable") != std::string::npos);
}

TEST_CASE("an invalid automaton aborts before the loop") {
    HybridAutomaton h = hyctest::lineModel("1", {{"x > 0.5", "sink"}}, 0, 0, {"sink"});
    h.transitions[0].to = 42;
    SamplerConfig scfg;
    SolverConfig solver;
    StrategyConfig strat;
    CHECK_THROWS_AS(runConcolic(h, scfg, solver, strat, 1), ModelError);
}

TEST_CASE("local concolic needs no more traces than random-only") {
    // One-step window of measure w to the negative mode: the canonical
    // rare-event family.
    for (double w : {0.01, 0.002}) {
        std::string guard = "x > " + std::to_string(1.0 - w);
        HybridAutomaton h = hyctest::lineModel("1", {{guard, "bad"}}, 0.0, 0.0, {"bad"});
        int localWins = 0;
        for (std::uint64_t seed = 1; seed <= 10; ++seed) {
            SamplerConfig scfg;
            scfg.maxSteps = 1;
            SolverConfig solver;
            StrategyConfig strat;
            strat.maxSamples = 4000;
            strat.timeoutSeconds = 30;
            strat.fixedTraceCost = 0.004;
            strat.mode = StrategyMode::RandomOnly;
            RunReport random = runConcolic(h, scfg, solver, strat, seed);
            strat.mode = StrategyMode::Local;
            RunReport local = runConcolic(h, scfg, solver, strat, seed);
            REQUIRE(local.outcome == RunOutcome::Counterexample);
            bool randomFound = random.outcome == RunOutcome::Counterexample;
            if (!randomFound || local.tracesSampled <= random.tracesSampled) ++localWins;
        }
        CHECK(localWins >= 9);
    }
}

TEST_CASE("a switched solver call beats random on a stubborn seed") {
    // Find a seed where plain random sampling needs strictly more traces
    // than the local strategy's switch point, then check local wins it.
    HybridAutomaton h = hyctest::loadBundled("oscillator.json");
    SamplerConfig scfg;
    scfg.maxSteps = 5;
    SolverConfig solver;
    StrategyConfig strat;
    strat.maxSamples = 2000;
    strat.timeoutSeconds = 60;
    strat.fixedTraceCost = 0.012;  // switch to the solver after one batch

    std::uint64_t stubborn = 0;
    long randomCount = 0;
    for (std::uint64_t seed = 1; seed <= 60; ++seed) {
        strat.mode = StrategyMode::RandomOnly;
        RunReport rep = runConcolic(h, scfg, solver, strat, seed);
        if (rep.outcome == RunOutcome::Counterexample && rep.tracesSampled > 20) {
            stubborn = seed;
            randomCount = rep.tracesSampled;
            break;
        }
    }
    REQUIRE(stubborn != 0);
    strat.mode = StrategyMode::Local;
    RunReport local = runConcolic(h, scfg, solver, strat, stubborn);
    REQUIRE(local.outcome == RunOutcome::Counterexample);
    CHECK(local.tracesSampled < randomCount);
    CHECK(local.solverCalls >= 1);
}

TEST_CASE("the dynamic baseline flips branches with the solver") {
    HybridAutomaton h = hyctest::loadBundled("sewerage.json");
    SamplerConfig scfg;
    scfg.maxSteps = 2;
    scfg.timePoints = 8;
    scfg.integrator.step = 5e-5;
    SolverConfig solver;
    StrategyConfig strat;
    strat.mode = StrategyMode::Dynamic;
    strat.timeoutSeconds = 60;
    strat.maxSamples = 50;
    RunReport rep = runConcolic(h, scfg, solver, strat, 3);
    // The first random trace misses the storm; the branch flip on
    // normal->flooding must find it symbolically.
    CHECK(rep.outcome == RunOutcome::Counterexample);
    CHECK(rep.solverCalls >= 1);
}

TEST_CASE("sewerage local runs discover flooding through the solver") {
    HybridAutomaton h = hyctest::loadBundled("sewerage.json");
    SamplerConfig scfg;
    scfg.maxSteps = 2;
    scfg.timePoints = 8;
    scfg.integrator.step = 5e-5;
    SolverConfig solver;
    StrategyConfig strat;
    strat.mode = StrategyMode::Local;
    strat.fixedTraceCost = 0.006;
    strat.timeoutSeconds = 120;
    RunReport rep = runConcolic(h, scfg, solver, strat, 1);
    REQUIRE(rep.outcome == RunOutcome::Counterexample);
    bool floodingBySolver = false;
    for (const auto& node : rep.tree)
        if (node.path.size() == 2 && node.path[1] == "flooding" && node.origin == "solver")
            floodingBySolver = true;
    CHECK(floodingBySolver);
    CHECK(rep.solverCalls >= 1);
}
