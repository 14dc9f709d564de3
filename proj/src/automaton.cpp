#include "hyc/automaton.hpp"

#include <deque>
#include <unordered_set>

namespace hyc {

int HybridAutomaton::modeIndex(const std::string& modeName) const {
    for (std::size_t i = 0; i < modes.size(); ++i)
        if (modes[i].name == modeName) return static_cast<int>(i);
    return -1;
}

std::vector<Diagnostic> validate(const HybridAutomaton& h) {
    std::vector<Diagnostic> out;
    auto bad = [&](std::string where, std::string what) {
        out.push_back({std::move(where), std::move(what)});
    };

    if (h.modes.empty()) bad("modes", "automaton has no modes");
    if (h.variables.empty()) bad("variables", "automaton has no state variables");

    std::unordered_set<std::string> seen;
    for (std::size_t i = 0; i < h.modes.size(); ++i) {
        if (!seen.insert(h.modes[i].name).second)
            bad("modes[" + std::to_string(i) + "]", "duplicate mode name `" + h.modes[i].name + "`");
        if (h.modes[i].rhs.size() != h.variables.size())
            bad("modes[" + std::to_string(i) + "]",
                "mode `" + h.modes[i].name + "` defines " + std::to_string(h.modes[i].rhs.size()) +
                    " ODEs for " + std::to_string(h.variables.size()) + " variables");
    }

    if (h.initialMode < 0 || h.initialMode >= static_cast<int>(h.modes.size()))
        bad("initial_mode", "initial mode index out of range");

    for (std::size_t i = 0; i < h.transitions.size(); ++i) {
        const auto& tr = h.transitions[i];
        if (tr.from < 0 || tr.from >= static_cast<int>(h.modes.size()))
            bad("transitions[" + std::to_string(i) + "].from", "undeclared source mode");
        if (tr.to < 0 || tr.to >= static_cast<int>(h.modes.size()))
            bad("transitions[" + std::to_string(i) + "].to", "undeclared target mode");
        if (tr.guard.empty())
            bad("transitions[" + std::to_string(i) + "].guard", "missing guard");
    }

    if (h.initLower.size() != static_cast<Eigen::Index>(h.variables.size()) ||
        h.initUpper.size() != static_cast<Eigen::Index>(h.variables.size())) {
        bad("init", "initial box does not cover every variable");
    } else {
        for (Eigen::Index i = 0; i < h.initLower.size(); ++i) {
            if (!(h.initLower[i] <= h.initUpper[i]))
                bad("init." + h.variables[i], "lower bound exceeds upper bound");
            if (!std::isfinite(h.initLower[i]) || !std::isfinite(h.initUpper[i]))
                bad("init." + h.variables[i], "non-finite bound");
        }
    }

    for (int q : h.negativeModes)
        if (q < 0 || q >= static_cast<int>(h.modes.size()))
            bad("negative_modes", "undeclared negative mode index " + std::to_string(q));

    return out;
}

std::set<int> backwardReachableModes(const HybridAutomaton& h) {
    // Fixed point over reversed edges, seeded with the negative set.
    std::set<int> reach(h.negativeModes.begin(), h.negativeModes.end());
    std::deque<int> work(reach.begin(), reach.end());
    while (!work.empty()) {
        int q = work.front();
        work.pop_front();
        for (const auto& tr : h.transitions) {
            if (tr.to == q && !reach.count(tr.from)) {
                reach.insert(tr.from);
                work.push_back(tr.from);
            }
        }
    }
    return reach;
}

std::vector<int> outgoing(const HybridAutomaton& h, int q) {
    if (q < 0 || q >= static_cast<int>(h.modes.size())) throw UnknownModeError(q);
    std::vector<int> out;
    for (std::size_t i = 0; i < h.transitions.size(); ++i)
        if (h.transitions[i].from == q) out.push_back(static_cast<int>(i));
    return out;
}

}  // namespace hyc
