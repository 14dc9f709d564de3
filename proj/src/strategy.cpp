#include "hyc/strategy.hpp"

#include <chrono>
#include <future>
#include <set>
#include <sstream>

namespace hyc {

CostModel updateCost(CostModel cost, double observedSeconds) {
    if (!(observedSeconds > 0.0)) throw std::invalid_argument("cost observation must be positive");
    if (cost.pinned) return cost;
    if (cost.traceCost <= 0.0) cost.traceCost = observedSeconds;
    else cost.traceCost = 0.8 * cost.traceCost + 0.2 * observedSeconds;
    return cost;
}

const char* strategyName(StrategyMode m) {
    switch (m) {
        case StrategyMode::RandomOnly: return "random";
        case StrategyMode::Local: return "local";
        case StrategyMode::Global: return "global";
        default: return "dynamic";
    }
}

std::optional<StrategyMode> strategyFromName(const std::string& name) {
    if (name == "random") return StrategyMode::RandomOnly;
    if (name == "local") return StrategyMode::Local;
    if (name == "global") return StrategyMode::Global;
    if (name == "dynamic") return StrategyMode::Dynamic;
    return std::nullopt;
}

const char* runOutcomeName(RunOutcome o) {
    switch (o) {
        case RunOutcome::Counterexample: return "counterexample";
        case RunOutcome::Pass: return "pass";
        default: return "timeout-inconclusive";
    }
}

// ── chooseAction ────────────────────────────────────────────────────────────

Action chooseAction(const std::vector<FrontierPair>& pairs, const HybridAutomaton& h,
                    const CostModel& cost, const StrategyConfig& cfg) {
    (void)h;
    Action action;
    if (pairs.empty()) return action;  // pure exploration

    bool havePick = false;
    double bestKey = 0.0;
    for (const auto& pair : pairs) {
        double qHat = estimateQ(*pair.node).qHat;
        // A local query solves one step; a global query solves the whole
        // path from the root plus the new transition.
        int steps = cfg.mode == StrategyMode::Global
                        ? static_cast<int>(pair.node->path.size())
                        : 1;
        double randomKey = cost.traceCost / qHat;
        double symbolicKey = cost.symbolicCost(steps);
        double key = std::min(randomKey, symbolicKey);
        if (!havePick || key < bestKey) {
            havePick = true;
            bestKey = key;
            action.choice.nodePath = pair.node->path;
            action.choice.target = pair.target;
            action.choice.qHat = qHat;
            action.choice.queryLength = steps;
            action.choice.randomKey = randomKey;
            action.choice.symbolicKey = symbolicKey;
        }
    }
    action.symbolic = !(action.choice.randomKey < action.choice.symbolicKey);
    return action;
}

// ── runConcolic ─────────────────────────────────────────────────────────────

namespace {

using Clock = std::chrono::steady_clock;

double secondsSince(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string pathNames(const HybridAutomaton& h, const std::vector<int>& path) {
    std::string out;
    for (std::size_t i = 0; i < path.size(); ++i) {
        if (i) out += ">";
        out += h.modes[static_cast<std::size_t>(path[i])].name;
    }
    return out;
}

std::vector<PathStep> rootPathOf(const Trace& anchor) {
    std::vector<PathStep> steps;
    for (std::size_t k = 0; k < anchor.jumps.size(); ++k) {
        const Jump& j = anchor.jumps[k];
        if (j.isStay()) steps.push_back(PathStep::stay(anchor.states[k].mode));
        else steps.push_back(PathStep::fire(j.transition));
    }
    return steps;
}

struct Runner {
    const HybridAutomaton& h;
    SamplerConfig scfg;
    SolverConfig solverCfg;
    StrategyConfig cfg;
    std::uint64_t seed;

    RunReport rep;
    ExploreTree tree;
    InfCache cache;
    CostModel cost;
    std::set<int> qbad;
    std::set<std::string> unknownPairs;
    long traceIndex = 0;
    long positives = 0;
    Clock::time_point started = Clock::now();

    Runner(const HybridAutomaton& automaton, const SamplerConfig& samplerCfg,
           const SolverConfig& solver, const StrategyConfig& strategy, std::uint64_t s)
        : h(automaton), scfg(samplerCfg), solverCfg(solver), cfg(strategy), seed(s),
          tree(automaton, splitmix64(s ^ 0xC0FFEEULL)) {
        scfg.seed = seed;
    }

    bool timedOut() const { return secondsSince(started) >= cfg.timeoutSeconds; }
    bool budgetSpent() const {
        return cfg.maxSamples > 0 && rep.tracesSampled >= cfg.maxSamples;
    }

    // Returns true when the trace is a counterexample (run should stop).
    bool record(const Trace& tr, DiscoveryOrigin origin) {
        tree.recordTrace(tr, origin);
        rep.tracesSampled += 1;
        if (isCounterexample(h, tr)) {
            rep.counterexample = tr;
            return true;
        }
        positives += 1;
        return false;
    }

    Trace extendToFullLength(Trace tr) {
        RngStream stream(seed, static_cast<std::uint64_t>(traceIndex));
        traceIndex += 1;
        ConcreteState s = tr.states.back();
        while (static_cast<int>(tr.steps()) < scfg.maxSteps &&
               !h.negativeModes.count(s.mode)) {
            StepResult step = randomStep(h, s, scfg, stream);
            tr.jumps.push_back(step.jump);
            tr.states.push_back(step.next);
            s = step.next;
        }
        return tr;
    }

    void runRandomBatch() {
        long want = cfg.batchSize;
        if (cfg.maxSamples > 0) want = std::min<long>(want, cfg.maxSamples - rep.tracesSampled);
        if (want <= 0) return;
        auto t0 = Clock::now();
        std::vector<Trace> traces(static_cast<std::size_t>(want));
        if (cfg.jobs > 1) {
            std::vector<std::future<Trace>> futs;
            futs.reserve(static_cast<std::size_t>(want));
            for (long j = 0; j < want; ++j) {
                std::uint64_t idx = static_cast<std::uint64_t>(traceIndex + j);
                futs.push_back(std::async(std::launch::async,
                                          [this, idx] { return sampleTrace(h, scfg, idx); }));
            }
            for (long j = 0; j < want; ++j) traces[static_cast<std::size_t>(j)] = futs[static_cast<std::size_t>(j)].get();
        } else {
            for (long j = 0; j < want; ++j)
                traces[static_cast<std::size_t>(j)] =
                    sampleTrace(h, scfg, static_cast<std::uint64_t>(traceIndex + j));
        }
        long recorded = 0;
        bool cx = false;
        for (const Trace& tr : traces) {
            ++recorded;
            if (record(tr, DiscoveryOrigin::Random)) {
                cx = true;
                break;
            }
        }
        traceIndex += recorded;
        double elapsed = secondsSince(t0);
        rep.samplingSeconds += elapsed;
        if (!cx && recorded > 0) cost = updateCost(cost, std::max(1e-9, elapsed / recorded));
    }

    std::string pairKey(const std::vector<int>& nodePath, int target) const {
        std::string key = pathNames(h, nodePath);
        key += "->";
        key += h.modes[static_cast<std::size_t>(target)].name;
        return key;
    }

    // Transitions from the node's last mode into the target that are not
    // already covered by a cached infeasible root path.
    std::vector<int> openTransitions(const ExploreNode& node, int target) const {
        std::vector<int> open;
        if (node.prefixes.empty()) return open;
        std::vector<PathStep> base = rootPathOf(node.prefixes.front());
        for (int tr : outgoing(h, node.lastMode())) {
            if (h.transitions[static_cast<std::size_t>(tr)].to != target) continue;
            std::vector<PathStep> path = base;
            path.push_back(PathStep::fire(tr));
            if (!cache.coversBox(h, path, h.initLower, h.initUpper)) open.push_back(tr);
        }
        return open;
    }

    std::vector<FrontierPair> frontierView() {
        std::vector<FrontierPair> pairs = frontier(tree, h, qbad, scfg.maxSteps);
        std::vector<FrontierPair> view;
        for (const auto& pair : pairs) {
            if (unknownPairs.count(pairKey(pair.node->path, pair.target))) continue;
            if (openTransitions(*pair.node, pair.target).empty()) continue;
            view.push_back(pair);
        }
        return view;
    }

    void tallySolve(const std::string& status) {
        if (status == "witness" || status == "sat") rep.solverSat += 1;
        else if (status == "infeasible" || status == "unsat") rep.solverUnsat += 1;
        else rep.solverUnknown += 1;
    }

    void runSymbolic(const FrontierChoice& choice) {
        ExploreNode* node = tree.find(choice.nodePath);
        if (!node || node->prefixes.empty()) return;
        auto t0 = Clock::now();
        std::vector<int> open = openTransitions(*node, choice.target);
        for (int tr : open) {
            SolverCallRecord rec;
            rec.path = pathNames(h, node->path);
            rec.target = h.modes[static_cast<std::size_t>(choice.target)].name;
            rep.solverCalls += 1;

            std::optional<Trace> witness;
            if (cfg.mode == StrategyMode::Global) {
                rec.kind = "path-any";
                std::vector<PathStep> path = rootPathOf(node->prefixes.front());
                path.push_back(PathStep::fire(tr));
                SatResult r = solvePathAny(h, path, h.initLower, h.initUpper, solverCfg,
                                           scfg.integrator, &cache);
                rec.status = satStatusName(r.status);
                rec.fromCache = r.fromCache;
                rec.cached = r.status == SatStatus::Unsat && !r.fromCache;
                rec.note = r.note;
                if (r.status == SatStatus::Sat) {
                    Trace t;
                    ConcreteState s0;
                    s0.mode = h.initialMode;
                    s0.valuation = r.startValuation;
                    t.states.push_back(s0);
                    for (std::size_t j = 0; j < r.witnessJumps.size(); ++j) {
                        t.jumps.push_back(r.witnessJumps[j]);
                        t.states.push_back(r.witnessStates[j]);
                    }
                    witness = std::move(t);
                } else if (r.status == SatStatus::Unknown) {
                    unknownPairs.insert(pairKey(node->path, choice.target));
                }
            } else {
                rec.kind = "backtrack";
                const Trace& anchor = node->prefixes.front();
                BacktrackOutcome out = backtrackSolve(h, anchor, anchor.steps(), tr, solverCfg,
                                                      scfg.integrator, cache);
                rec.queries = out.queries;
                rec.note = out.note;
                switch (out.kind) {
                    case BacktrackOutcome::Kind::Witness:
                        rec.status = "witness";
                        witness = std::move(out.trace);
                        break;
                    case BacktrackOutcome::Kind::Infeasible:
                        rec.status = "infeasible";
                        rec.cached = out.cached;
                        rec.fromCache = out.note == "cache hit";
                        break;
                    default:
                        rec.status = "unknown";
                        unknownPairs.insert(pairKey(node->path, choice.target));
                        break;
                }
            }
            tallySolve(rec.status);
            rep.audit.push_back(rec);

            if (witness) {
                rep.solvingSeconds += secondsSince(t0);
                Trace full = extendToFullLength(std::move(*witness));
                record(full, DiscoveryOrigin::Solver);
                return;
            }
            if (rec.status == "unknown") break;
        }
        rep.solvingSeconds += secondsSince(t0);
    }

    void mainLoop() {
        while (!rep.counterexample && !timedOut() && !budgetSpent()) {
            Action action{};
            if (cfg.mode == StrategyMode::Local || cfg.mode == StrategyMode::Global)
                action = chooseAction(frontierView(), h, cost, cfg);
            if (action.symbolic) runSymbolic(action.choice);
            else runRandomBatch();
        }
    }

    // Depth-first solver flips of the most recent branch; a plain concolic
    // testing baseline.
    void dynamicLoop() {
        struct Branch {
            Trace prefix;       // trace up to and including the branch step start
            std::size_t step;   // index of the step to flip
            int transition;
        };
        std::vector<Branch> stack;
        std::set<std::string> attempted;

        auto pushBranches = [&](const Trace& tr) {
            for (std::size_t k = 0; k < tr.jumps.size(); ++k) {
                for (int cand : outgoing(h, tr.states[k].mode)) {
                    if (!tr.jumps[k].isStay() && tr.jumps[k].transition == cand) continue;
                    if (!qbad.count(h.transitions[static_cast<std::size_t>(cand)].to)) continue;
                    std::ostringstream key;
                    for (std::size_t i = 0; i <= k; ++i) key << tr.states[i].mode << '.';
                    key << 't' << cand;
                    if (!attempted.insert(key.str()).second) continue;
                    Branch b;
                    b.prefix.states.assign(tr.states.begin(),
                                           tr.states.begin() + static_cast<long>(k) + 1);
                    b.prefix.jumps.assign(tr.jumps.begin(), tr.jumps.begin() + static_cast<long>(k));
                    b.step = k;
                    b.transition = cand;
                    stack.push_back(std::move(b));
                }
            }
        };

        Trace first = sampleTrace(h, scfg, static_cast<std::uint64_t>(traceIndex));
        traceIndex += 1;
        if (record(first, DiscoveryOrigin::Random)) return;
        pushBranches(first);

        while (!stack.empty() && !rep.counterexample && !timedOut() && !budgetSpent()) {
            Branch b = std::move(stack.back());
            stack.pop_back();
            auto t0 = Clock::now();
            rep.solverCalls += 1;
            SatResult r = solveOneStep(h, b.prefix.states[b.step], b.transition, solverCfg,
                                       scfg.integrator, &cache);
            rep.solvingSeconds += secondsSince(t0);
            SolverCallRecord rec;
            rec.kind = "one-step";
            rec.path = pathNames(h, std::vector<int>{b.prefix.states[b.step].mode});
            rec.target = h.modes[static_cast<std::size_t>(
                                     h.transitions[static_cast<std::size_t>(b.transition)].to)]
                             .name;
            rec.status = satStatusName(r.status);
            rec.fromCache = r.fromCache;
            rec.note = r.note;
            tallySolve(rec.status);
            rep.audit.push_back(rec);
            if (r.status != SatStatus::Sat) continue;  // unknown: skip to the next branch

            Trace t = b.prefix;
            t.jumps.push_back(r.witnessJumps.front());
            t.states.push_back(r.witnessStates.front());
            Trace full = extendToFullLength(std::move(t));
            if (record(full, DiscoveryOrigin::Solver)) return;
            pushBranches(full);
        }
    }

    RunReport finish() {
        SampleTally tally{positives, rep.counterexample ? 1 : 0};
        rep.confidence = makeConfidenceReport(tally, cfg.delta, Effectiveness{1.0},
                                              cfg.confidenceTarget, rep.counterexample.has_value());
        rep.outcome = rep.counterexample          ? RunOutcome::Counterexample
                      : rep.confidence.verdict ==
                              Verdict::Pass       ? RunOutcome::Pass
                                                  : RunOutcome::TimeoutInconclusive;
        tree.forEach([&](const ExploreNode& node) {
            TreeNodeSummary s;
            for (int m : node.path) s.path.push_back(h.modes[static_cast<std::size_t>(m)].name);
            s.m = node.m;
            s.n = node.n;
            s.qHat = estimateQ(node).qHat;
            s.particleCount = node.particles.size();
            s.origin = node.origin == DiscoveryOrigin::Solver ? "solver" : "random";
            rep.tree.push_back(std::move(s));
        });
        rep.cacheEntries = cache.size();
        rep.solverCacheHits = cache.hits();
        rep.finalTraceCost = cost.traceCost;
        rep.totalSeconds = secondsSince(started);
        return rep;
    }
};

}  // namespace

RunReport runConcolic(const HybridAutomaton& h, const SamplerConfig& samplerCfg,
                      const SolverConfig& solverCfg, const StrategyConfig& strategyCfg,
                      std::uint64_t seed) {
    std::vector<Diagnostic> diags = validate(h);
    if (!diags.empty()) {
        std::string msg = "model validation failed:";
        for (const auto& d : diags) msg += "\n  " + d.location + ": " + d.message;
        throw ModelError(msg);
    }
    samplerCfg.check();
    solverCfg.check();
    strategyCfg.check();

    Runner runner(h, samplerCfg, solverCfg, strategyCfg, seed);

    if (h.negativeModes.empty()) {
        runner.rep.note = "no negative modes declared";
        runner.rep.confidence =
            ConfidenceReport{SampleTally{}, strategyCfg.delta, 1.0, 1.0, Verdict::Pass};
        runner.rep.outcome = RunOutcome::Pass;
        runner.rep.totalSeconds = secondsSince(runner.started);
        return runner.rep;
    }

    runner.qbad = backwardReachableModes(h);
    if (!runner.qbad.count(h.initialMode)) {
        runner.rep.note = "negative modes are unreachable in the transition graph";
        runner.rep.confidence =
            ConfidenceReport{SampleTally{}, strategyCfg.delta, 1.0, 1.0, Verdict::Pass};
        runner.rep.outcome = RunOutcome::Pass;
        runner.rep.totalSeconds = secondsSince(runner.started);
        return runner.rep;
    }

    if (strategyCfg.fixedTraceCost > 0.0) {
        runner.cost.traceCost = strategyCfg.fixedTraceCost;
        runner.cost.pinned = true;
    } else {
        // One calibration trace initializes c_t.
        auto t0 = Clock::now();
        Trace tr = sampleTrace(h, runner.scfg, static_cast<std::uint64_t>(runner.traceIndex));
        runner.traceIndex += 1;
        runner.cost = updateCost(runner.cost, std::max(1e-9, secondsSince(t0)));
        runner.rep.calibrationSeconds = secondsSince(t0);
        runner.record(tr, DiscoveryOrigin::Random);
    }

    if (!runner.rep.counterexample) {
        if (strategyCfg.mode == StrategyMode::Dynamic) runner.dynamicLoop();
        else runner.mainLoop();
    }
    return runner.finish();
}

}  // namespace hyc
