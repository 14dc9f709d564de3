#ifndef HYC_EXPLORETREE_HPP
#define HYC_EXPLORETREE_HPP

#include <functional>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "hyc/automaton.hpp"
#include "hyc/rng.hpp"

namespace hyc {

// ── Empirical subgraph of the trace-distribution Markov chain ───────────────
//
// A tree over visited mode sequences. Each node keeps a bounded uniform
// reservoir of the concrete states observed there (solver start states), a
// few representative trace prefixes (for path-condition backtracking), and
// the Bayesian discovery counters: n = sampling attempts from this node that
// created a new child, m = attempts that revisited an existing child.
// Single writer; concurrent readers between writes.

enum class DiscoveryOrigin { Random, Solver };

struct ExploreNode {
    std::vector<int> path;  // mode sequence from the root, path[0] = initial mode
    int m = 0;
    int n = 0;
    std::map<int, std::unique_ptr<ExploreNode>> children;  // key: target mode
    std::map<int, long> childVisits;                       // steps taken into each child
    std::set<int> unvisitedTargets;  // distinct transition targets never stepped into
    DiscoveryOrigin origin = DiscoveryOrigin::Random;

    // Uniform reservoir of states reached at this node.
    std::vector<ConcreteState> particles;
    long particlesSeen = 0;

    // First few trace prefixes that reached this node, used as concrete
    // anchors for backtracking path conditions.
    std::vector<Trace> prefixes;

    int lastMode() const { return path.back(); }
    long attempts() const { return static_cast<long>(m) + n; }
};

struct DiscoveryEstimate {
    double qHat = 0.5;  // (n+1)/(m+n+2)
};

DiscoveryEstimate estimateQ(const ExploreNode& node);

class ExploreTree {
public:
    // cap: particle reservoir bound per node; prefixCap: stored trace prefixes.
    ExploreTree(const HybridAutomaton& h, std::uint64_t reservoirSeed = 0x5eedULL,
                std::size_t cap = 256, std::size_t prefixCap = 4);

    ExploreNode& root() { return *root_; }
    const ExploreNode& root() const { return *root_; }

    // Walks the trace's mode sequence, updating counters, reservoirs and
    // prefixes; returns the newly created nodes in walk order.
    std::vector<const ExploreNode*> recordTrace(const Trace& tr,
                                                DiscoveryOrigin origin = DiscoveryOrigin::Random);

    // Node for an exact mode path, or nullptr.
    const ExploreNode* find(const std::vector<int>& path) const;
    ExploreNode* find(const std::vector<int>& path);

    std::size_t nodeCount() const { return nodeCount_; }
    std::size_t maxDepth() const { return maxDepth_; }

    void forEach(const std::function<void(const ExploreNode&)>& fn) const;

private:
    const HybridAutomaton& automaton_;
    std::unique_ptr<ExploreNode> root_;
    std::size_t cap_, prefixCap_;
    std::size_t nodeCount_ = 1;
    std::size_t maxDepth_ = 1;
    RngStream reservoirRng_;

    void insertParticle(ExploreNode& node, const ConcreteState& s);
    std::unique_ptr<ExploreNode> makeNode(const ExploreNode& parent, int childMode,
                                          DiscoveryOrigin origin) const;
};

// Frontier: pairs (node u, unvisited target mode v) with v inside the
// backward-reachable set and u shallow enough that a step from it still fits
// the trace bound. Deterministic order: path-lexicographic by mode name,
// then target name.
struct FrontierPair {
    const ExploreNode* node;
    int target;  // mode index
};

std::vector<FrontierPair> frontier(const ExploreTree& tree, const HybridAutomaton& h,
                                   const std::set<int>& qbad, int maxSteps);

// Child visit counts normalized to sum 1. Throws std::logic_error when the
// node has no recorded attempts.
std::map<int, double> empiricalTransitionProbabilities(const ExploreNode& node);

}  // namespace hyc

#endif  // HYC_EXPLORETREE_HPP
