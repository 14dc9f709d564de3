#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "hyc/exploretree.hpp"
#include "hyc/sampler.hpp"
#include "testutil.hpp"

using namespace hyc;

namespace {

// A trace through the given mode indices with stay/fire jumps inferred from
// the model's transition table (first matching transition wins).
Trace traceThrough(const HybridAutomaton& h, const std::vector<int>& modes, double x0 = 0.0) {
    Trace tr;
    ConcreteState s;
    s.mode = modes[0];
    s.valuation.resize(static_cast<Eigen::Index>(h.varCount()));
    s.valuation.setConstant(x0);
    tr.states.push_back(s);
    for (std::size_t k = 1; k < modes.size(); ++k) {
        Jump j = Jump::stay();
        if (modes[k] != modes[k - 1]) {
            for (std::size_t t = 0; t < h.transitions.size(); ++t)
                if (h.transitions[t].from == modes[k - 1] && h.transitions[t].to == modes[k]) {
                    j = Jump::fire(static_cast<int>(t), 0.5);
                    break;
                }
        }
        tr.jumps.push_back(j);
        ConcreteState next = s;
        next.mode = modes[k];
        tr.states.push_back(next);
        s = next;
    }
    return tr;
}

}  // namespace

TEST_CASE("the first trace always discovers its children") {
    HybridAutomaton h = hyctest::lineModel("0", {});
    ExploreTree tree(h);
    Trace tr = traceThrough(h, {0, 0});
    auto fresh = tree.recordTrace(tr);
    REQUIRE(fresh.size() == 1);
    CHECK(fresh[0]->path == std::vector<int>{0, 0});
    CHECK(tree.root().n == 1);
    CHECK(tree.root().m == 0);

    SUBCASE("replaying the same trace counts a revisit") {
        tree.recordTrace(tr);
        CHECK(tree.root().n == 1);
        CHECK(tree.root().m == 1);
    }
}

TEST_CASE("discovery estimates follow (n+1)/(m+n+2)") {
    ExploreNode node;
    node.m = 0;
    node.n = 0;
    CHECK(estimateQ(node).qHat == 0.5);  // the prior: probability one half
    node.m = 8;
    CHECK(estimateQ(node).qHat == 0.1);  // eight misses, no discoveries
    node.m = 3;
    node.n = 1;
    CHECK(estimateQ(node).qHat == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
    node.m = 0;
    node.n = 5;
    CHECK(estimateQ(node).qHat == doctest::Approx(6.0 / 7.0).epsilon(1e-15));
}

TEST_CASE("estimateQ moves the right way and stays inside (0,1)") {
    auto q = [](int m, int n) {
        ExploreNode node;
        node.m = m;
        node.n = n;
        return estimateQ(node).qHat;
    };
    for (int m = 0; m < 20; ++m) {
        for (int n = 0; n < 20; ++n) {
            CHECK(q(m, n) > 0.0);
            CHECK(q(m, n) < 1.0);
            CHECK(q(m, n + 1) > q(m, n));
            CHECK(q(m + 1, n) < q(m, n));
        }
    }
}

TEST_CASE("frontier lists unvisited reachable targets, pruned by Q_bad") {
    HybridAutomaton h = hyctest::loadBundled("sewerage.json");
    ExploreTree tree(h);
    int normal = h.modeIndex("normal");
    int draining = h.modeIndex("draining");
    int loading = h.modeIndex("loading");
    tree.recordTrace(traceThrough(h, {normal, draining, normal}));
    tree.recordTrace(traceThrough(h, {normal, loading, normal}));

    std::set<int> qbad = backwardReachableModes(h);
    auto pairs = frontier(tree, h, qbad, 2);
    bool rootToFlooding = false;
    for (const auto& p : pairs)
        if (p.node->path == std::vector<int>{normal} && p.target == h.modeIndex("flooding"))
            rootToFlooding = true;
    CHECK(rootToFlooding);

    SUBCASE("targets outside Q_bad are pruned even if unvisited") {
        auto none = frontier(tree, h, {}, 2);
        CHECK(none.empty());
    }
    SUBCASE("depth-bound nodes cannot extend, so they are not offered") {
        for (const auto& p : pairs) CHECK(p.node->path.size() <= 2);
    }
    SUBCASE("deterministic order: path-lexicographic, then target name") {
        auto again = frontier(tree, h, qbad, 2);
        REQUIRE(again.size() == pairs.size());
        for (std::size_t i = 0; i < pairs.size(); ++i) {
            CHECK(pairs[i].node == again[i].node);
            CHECK(pairs[i].target == again[i].target);
        }
    }
}

TEST_CASE("a fully expanded automaton has an empty frontier") {
    HybridAutomaton h = hyctest::lineModel("1", {{"x > 0.1", "sink"}}, 0, 0, {"sink"});
    ExploreTree tree(h);
    tree.recordTrace(traceThrough(h, {0, h.modeIndex("sink")}));
    std::set<int> qbad = backwardReachableModes(h);
    CHECK(frontier(tree, h, qbad, 4).empty());
}

TEST_CASE("empirical transition probabilities normalize child visits") {
    HybridAutomaton h =
        hyctest::lineModel("1", {{"x > 0.1", "a"}, {"x > 0.2", "b"}}, 0, 0, {});
    ExploreTree tree(h);
    int a = h.modeIndex("a"), b = h.modeIndex("b");
    for (int i = 0; i < 3; ++i) tree.recordTrace(traceThrough(h, {0, a}));
    tree.recordTrace(traceThrough(h, {0, b}));
    auto probs = empiricalTransitionProbabilities(tree.root());
    CHECK(probs.at(a) == doctest::Approx(0.75).epsilon(1e-15));
    CHECK(probs.at(b) == doctest::Approx(0.25).epsilon(1e-15));
    double sum = 0.0;
    for (const auto& [mode, p] : probs) sum += p;
    CHECK(std::abs(sum - 1.0) <= 1e-12);

    SUBCASE("single child gets probability one") {
        ExploreTree solo(h);
        solo.recordTrace(traceThrough(h, {0, a}));
        auto p = empiricalTransitionProbabilities(solo.root());
        REQUIRE(p.size() == 1);
        CHECK(p.at(a) == 1.0);
    }
    SUBCASE("no recorded attempts is an error") {
        ExploreTree empty(h);
        CHECK_THROWS_AS(empiricalTransitionProbabilities(empty.root()), std::logic_error);
    }
}

TEST_CASE("empirical probabilities approach the analytic 0.75/0.25 split") {
    HybridAutomaton h = hyctest::twoWindowModel();
    SamplerConfig cfg;
    cfg.maxSteps = 1;
    cfg.seed = 31;
    ExploreTree tree(h);
    for (std::uint64_t i = 0; i < 10000; ++i) tree.recordTrace(sampleTrace(h, cfg, i));
    auto probs = empiricalTransitionProbabilities(tree.root());
    CHECK(std::abs(probs.at(h.modeIndex("wide")) - 0.75) < 0.02);
    CHECK(std::abs(probs.at(h.modeIndex("narrow")) - 0.25) < 0.02);
}

TEST_CASE("particle reservoirs keep a uniform sample") {
    HybridAutomaton h = hyctest::lineModel("0", {});
    ExploreTree tree(h, /*reservoirSeed=*/17, /*cap=*/256);
    const int total = 10000, tags = 10;
    for (int i = 0; i < total; ++i) {
        Trace tr = traceThrough(h, {0, 0}, /*x0=*/static_cast<double>(i % tags));
        tree.recordTrace(tr);
    }
    REQUIRE(tree.root().particles.size() == 256);
    CHECK(tree.root().particlesSeen == total);
    std::vector<int> counts(tags, 0);
    for (const auto& p : tree.root().particles)
        counts[static_cast<int>(p.valuation[0])] += 1;
    double expected = 256.0 / tags;
    double chi2 = 0.0;
    for (int c : counts) chi2 += (c - expected) * (c - expected) / expected;
    // chi-square with 9 dof: the 0.99 quantile is 21.666, so chi2 below it
    // means the tag mix is uniform at p > 0.01.
    CHECK(chi2 < 21.666);
}

TEST_CASE("tree shape: every node extends its parent by one mode") {
    HybridAutomaton h = hyctest::loadBundled("sewerage.json");
    SamplerConfig cfg;
    cfg.maxSteps = 3;
    cfg.timePoints = 8;
    cfg.seed = 8;
    ExploreTree tree(h);
    for (std::uint64_t i = 0; i < 200; ++i) tree.recordTrace(sampleTrace(h, cfg, i));
    CHECK(tree.maxDepth() <= 4);  // K + 1
    tree.forEach([&](const ExploreNode& node) {
        for (const auto& [mode, child] : node.children) {
            REQUIRE(child->path.size() == node.path.size() + 1);
            CHECK(child->path.back() == mode);
            CHECK(std::equal(node.path.begin(), node.path.end(), child->path.begin()));
        }
        long visits = 0;
        for (const auto& [mode, count] : node.childVisits) visits += count;
        CHECK(visits == node.attempts());
    });
}

TEST_CASE("a trace from a different automaton is rejected") {
    HybridAutomaton h = hyctest::lineModel("0", {});
    ExploreTree tree(h);
    Trace bad = traceThrough(h, {0, 0});
    bad.states[0].mode = 3;
    CHECK_THROWS_AS(tree.recordTrace(bad), std::invalid_argument);
    Trace badJump = traceThrough(h, {0, 0});
    badJump.jumps[0] = Jump::fire(9, 0.5);
    CHECK_THROWS_AS(tree.recordTrace(badJump), std::invalid_argument);
}
