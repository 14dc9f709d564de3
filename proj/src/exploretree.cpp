#include "hyc/exploretree.hpp"

#include <algorithm>
#include <stdexcept>

namespace hyc {

DiscoveryEstimate estimateQ(const ExploreNode& node) {
    return DiscoveryEstimate{(node.n + 1.0) / (node.m + node.n + 2.0)};
}

ExploreTree::ExploreTree(const HybridAutomaton& h, std::uint64_t reservoirSeed, std::size_t cap,
                         std::size_t prefixCap)
    : automaton_(h), cap_(cap), prefixCap_(prefixCap), reservoirRng_(reservoirSeed, 0) {
    root_ = std::make_unique<ExploreNode>();
    root_->path = {h.initialMode};
    for (int tr : outgoing(h, h.initialMode))
        root_->unvisitedTargets.insert(h.transitions[static_cast<std::size_t>(tr)].to);
}

void ExploreTree::insertParticle(ExploreNode& node, const ConcreteState& s) {
    ++node.particlesSeen;
    if (node.particles.size() < cap_) {
        node.particles.push_back(s);
        return;
    }
    // Algorithm R: keep each of the `particlesSeen` states with equal chance.
    std::uint64_t slot = reservoirRng_.below(static_cast<std::uint64_t>(node.particlesSeen));
    if (slot < cap_) node.particles[static_cast<std::size_t>(slot)] = s;
}

std::unique_ptr<ExploreNode> ExploreTree::makeNode(const ExploreNode& parent, int childMode,
                                                   DiscoveryOrigin origin) const {
    auto node = std::make_unique<ExploreNode>();
    node->path = parent.path;
    node->path.push_back(childMode);
    node->origin = origin;
    for (int tr : outgoing(automaton_, childMode))
        node->unvisitedTargets.insert(automaton_.transitions[static_cast<std::size_t>(tr)].to);
    return node;
}

std::vector<const ExploreNode*> ExploreTree::recordTrace(const Trace& tr, DiscoveryOrigin origin) {
    if (tr.states.empty() || tr.states.front().mode != automaton_.initialMode)
        throw std::invalid_argument("trace does not start at the automaton's initial mode");
    for (const auto& j : tr.jumps) {
        if (j.isStay()) continue;
        if (j.transition < 0 || j.transition >= static_cast<int>(automaton_.transitions.size()))
            throw std::invalid_argument("trace references an unknown transition");
    }

    std::vector<const ExploreNode*> discovered;
    ExploreNode* node = root_.get();
    insertParticle(*node, tr.states.front());
    if (node->prefixes.size() < prefixCap_) {
        Trace prefix;
        prefix.states = {tr.states.front()};
        node->prefixes.push_back(std::move(prefix));
    }

    for (std::size_t k = 0; k < tr.jumps.size(); ++k) {
        int childMode = tr.states[k + 1].mode;
        auto it = node->children.find(childMode);
        if (it == node->children.end()) {
            node->n += 1;
            auto fresh = makeNode(*node, childMode, origin);
            it = node->children.emplace(childMode, std::move(fresh)).first;
            node->unvisitedTargets.erase(childMode);
            ++nodeCount_;
            maxDepth_ = std::max(maxDepth_, it->second->path.size());
            discovered.push_back(it->second.get());
        } else {
            node->m += 1;
        }
        node->childVisits[childMode] += 1;
        node = it->second.get();
        insertParticle(*node, tr.states[k + 1]);
        if (node->prefixes.size() < prefixCap_) {
            Trace prefix;
            prefix.states.assign(tr.states.begin(), tr.states.begin() + static_cast<long>(k + 2));
            prefix.jumps.assign(tr.jumps.begin(), tr.jumps.begin() + static_cast<long>(k + 1));
            node->prefixes.push_back(std::move(prefix));
        }
    }
    return discovered;
}

const ExploreNode* ExploreTree::find(const std::vector<int>& path) const {
    return const_cast<ExploreTree*>(this)->find(path);
}

ExploreNode* ExploreTree::find(const std::vector<int>& path) {
    if (path.empty() || path.front() != root_->path.front()) return nullptr;
    ExploreNode* node = root_.get();
    for (std::size_t i = 1; i < path.size(); ++i) {
        auto it = node->children.find(path[i]);
        if (it == node->children.end()) return nullptr;
        node = it->second.get();
    }
    return node;
}

void ExploreTree::forEach(const std::function<void(const ExploreNode&)>& fn) const {
    std::vector<const ExploreNode*> stack{root_.get()};
    while (!stack.empty()) {
        const ExploreNode* n = stack.back();
        stack.pop_back();
        fn(*n);
        for (auto it = n->children.rbegin(); it != n->children.rend(); ++it)
            stack.push_back(it->second.get());
    }
}

namespace {

// Path-lexicographic by mode name, then target name.
bool frontierLess(const HybridAutomaton& h, const FrontierPair& a, const FrontierPair& b) {
    const auto& pa = a.node->path;
    const auto& pb = b.node->path;
    std::size_t n = std::min(pa.size(), pb.size());
    for (std::size_t i = 0; i < n; ++i) {
        const std::string& ma = h.modes[static_cast<std::size_t>(pa[i])].name;
        const std::string& mb = h.modes[static_cast<std::size_t>(pb[i])].name;
        if (ma != mb) return ma < mb;
    }
    if (pa.size() != pb.size()) return pa.size() < pb.size();
    return h.modes[static_cast<std::size_t>(a.target)].name <
           h.modes[static_cast<std::size_t>(b.target)].name;
}

}  // namespace

std::vector<FrontierPair> frontier(const ExploreTree& tree, const HybridAutomaton& h,
                                   const std::set<int>& qbad, int maxSteps) {
    std::vector<FrontierPair> out;
    tree.forEach([&](const ExploreNode& node) {
        if (static_cast<int>(node.path.size()) > maxSteps) return;  // cannot extend within bound
        for (int v : node.unvisitedTargets)
            if (qbad.count(v)) out.push_back({&node, v});
    });
    std::sort(out.begin(), out.end(),
              [&](const FrontierPair& a, const FrontierPair& b) { return frontierLess(h, a, b); });
    return out;
}

std::map<int, double> empiricalTransitionProbabilities(const ExploreNode& node) {
    long total = 0;
    for (const auto& [mode, count] : node.childVisits) total += count;
    if (total == 0) throw std::logic_error("node has no recorded sampling attempts");
    std::map<int, double> probs;
    for (const auto& [mode, count] : node.childVisits)
        probs[mode] = static_cast<double>(count) / static_cast<double>(total);
    return probs;
}

}  // namespace hyc
