#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "hyc/automaton.hpp"
#include "hyc/rng.hpp"
#include "hyc/sampler.hpp"
#include "testutil.hpp"

using namespace hyc;

TEST_CASE("bundled oscillator validates cleanly") {
    HybridAutomaton h = hyctest::loadBundled("oscillator.json");
    CHECK(validate(h).empty());
    CHECK(h.variables == std::vector<std::string>{"x", "v"});
    CHECK(h.modeIndex("q0") == h.initialMode);
}

TEST_CASE("validation flags undeclared endpoints and bad boxes") {
    HybridAutomaton h = hyctest::lineModel("1", {{"x > 1", "sink"}});
    REQUIRE(validate(h).empty());

    SUBCASE("transition to an undeclared mode") {
        h.transitions[0].to = 7;
        auto diags = validate(h);
        REQUIRE(diags.size() == 1);
        CHECK(diags[0].location == "transitions[0].to");
    }
    SUBCASE("inverted initial box") {
        h.initLower[0] = 2.0;
        h.initUpper[0] = 1.0;
        auto diags = validate(h);
        REQUIRE(diags.size() == 1);
        CHECK(diags[0].location == "init.x");
    }
    SUBCASE("duplicate mode names") {
        h.modes.push_back(h.modes[0]);
        auto diags = validate(h);
        REQUIRE(diags.size() >= 1);
        CHECK(diags[0].message.find("duplicate") != std::string::npos);
    }
}

TEST_CASE("backward reachability on the sewerage graph reaches every mode") {
    HybridAutomaton h = hyctest::loadBundled("sewerage.json");
    std::set<int> reach = backwardReachableModes(h);
    CHECK(reach.size() == 6);  // graph closure: every mode can reach shutdown
    for (const char* name : {"normal", "draining", "loading", "flooding", "recover", "shutdown"})
        CHECK(reach.count(h.modeIndex(name)) == 1);
}

TEST_CASE("backward reachability corner cases") {
    HybridAutomaton h = hyctest::lineModel("1", {{"x > 1", "sink"}});
    SUBCASE("empty negative set") { CHECK(backwardReachableModes(h).empty()); }
    SUBCASE("a negative mode reaches itself via the zero-length path") {
        h.negativeModes.insert(0);
        std::set<int> reach = backwardReachableModes(h);
        CHECK(reach.count(0) == 1);
    }
}

TEST_CASE("backward reachability equals brute-force path enumeration") {
    RngStream rng(99, 0);
    for (int trial = 0; trial < 200; ++trial) {
        int nModes = 2 + static_cast<int>(rng.below(7));  // up to 8 modes
        HybridAutomaton h;
        h.variables = {"x"};
        h.initLower = Eigen::VectorXd::Zero(1);
        h.initUpper = Eigen::VectorXd::Zero(1);
        for (int i = 0; i < nModes; ++i) {
            Mode m;
            m.name = "m" + std::to_string(i);
            m.rhs.push_back(parseExpr("0", h.variables));
            h.modes.push_back(std::move(m));
        }
        int nEdges = static_cast<int>(rng.below(static_cast<std::uint64_t>(2 * nModes + 1)));
        for (int e = 0; e < nEdges; ++e) {
            Transition tr;
            tr.from = static_cast<int>(rng.below(static_cast<std::uint64_t>(nModes)));
            tr.to = static_cast<int>(rng.below(static_cast<std::uint64_t>(nModes)));
            tr.guard = parseGuard("x > 0", h.variables);
            h.transitions.push_back(std::move(tr));
        }
        h.negativeModes.insert(static_cast<int>(rng.below(static_cast<std::uint64_t>(nModes))));

        // Brute force: forward DFS from each mode.
        std::set<int> expect;
        for (int start = 0; start < nModes; ++start) {
            std::vector<int> stack{start};
            std::set<int> seen{start};
            bool hits = h.negativeModes.count(start) > 0;
            while (!stack.empty() && !hits) {
                int q = stack.back();
                stack.pop_back();
                for (const auto& tr : h.transitions) {
                    if (tr.from != q || seen.count(tr.to)) continue;
                    seen.insert(tr.to);
                    stack.push_back(tr.to);
                    if (h.negativeModes.count(tr.to)) hits = true;
                }
            }
            if (hits) expect.insert(start);
        }
        REQUIRE(backwardReachableModes(h) == expect);
    }
}

TEST_CASE("outgoing preserves declaration order") {
    HybridAutomaton h = hyctest::loadBundled("sewerage.json");
    std::vector<int> outs = outgoing(h, h.modeIndex("normal"));
    REQUIRE(outs.size() == 3);
    CHECK(h.transitions[static_cast<std::size_t>(outs[0])].to == h.modeIndex("draining"));
    CHECK(h.transitions[static_cast<std::size_t>(outs[1])].to == h.modeIndex("loading"));
    CHECK(h.transitions[static_cast<std::size_t>(outs[2])].to == h.modeIndex("flooding"));

    CHECK(outgoing(h, h.modeIndex("shutdown")).empty());
    CHECK_THROWS_AS(outgoing(h, 17), UnknownModeError);
}

TEST_CASE("sampled traces replay consistently under weakened guards") {
    SamplerConfig cfg;
    cfg.maxSteps = 3;
    cfg.timePoints = 16;
    cfg.integrator.step = 1e-3;

    HybridAutomaton osc = hyctest::loadBundled("oscillator.json");
    HybridAutomaton ball = hyctest::loadBundled("bouncing-ball.json");
    for (std::uint64_t i = 0; i < 20; ++i) {
        cfg.seed = 41;
        Trace t1 = sampleTrace(osc, cfg, i);
        CHECK(traceReplaysConsistently(osc, t1, cfg.integrator));
        Trace t2 = sampleTrace(ball, cfg, i);
        CHECK(traceReplaysConsistently(ball, t2, cfg.integrator));
    }
}
