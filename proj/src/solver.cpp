#include "hyc/solver.hpp"

#include <stdio.h>
#include <stdlib.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "json.hpp"

namespace hyc {

const char* satStatusName(SatStatus s) {
    switch (s) {
        case SatStatus::Sat: return "sat";
        case SatStatus::Unsat: return "unsat";
        default: return "unknown";
    }
}

// ── Path helpers ────────────────────────────────────────────────────────────

int pathStartMode(const HybridAutomaton& h, const std::vector<PathStep>& path) {
    if (path.empty()) throw std::invalid_argument("empty path");
    const PathStep& s = path.front();
    if (s.isStay()) return s.stayMode;
    return h.transitions.at(static_cast<std::size_t>(s.transition)).from;
}

int pathFiredSteps(const std::vector<PathStep>& path) {
    int n = 0;
    for (const auto& s : path)
        if (!s.isStay()) ++n;
    return n;
}

std::string pathSignature(const HybridAutomaton& h, const std::vector<PathStep>& path) {
    std::ostringstream os;
    os << 'm' << pathStartMode(h, path);
    for (const auto& s : path) {
        if (s.isStay()) os << ".s" << s.stayMode;
        else os << ".t" << s.transition;
    }
    return os.str();
}

namespace {

// Checks that `path` is connected and starts where expected; throws on a
// malformed query so the caller never mistakes misuse for infeasibility.
void checkPathConnected(const HybridAutomaton& h, const std::vector<PathStep>& path,
                        int startMode) {
    int mode = startMode;
    for (const auto& s : path) {
        if (s.isStay()) {
            if (s.stayMode != mode) throw std::invalid_argument("stay step breaks path connectivity");
        } else {
            const Transition& tr = h.transitions.at(static_cast<std::size_t>(s.transition));
            if (tr.from != mode) throw std::invalid_argument("transition breaks path connectivity");
            mode = tr.to;
        }
    }
}

}  // namespace

// ── InfCache ────────────────────────────────────────────────────────────────

void InfCache::insert(const HybridAutomaton& h, const std::vector<PathStep>& path,
                      const Eigen::VectorXd& lo, const Eigen::VectorXd& hi) {
    std::string sig = pathSignature(h, path);
    for (const auto& e : entries_)
        if (e.signature == sig) return;  // already known
    entries_.push_back({std::move(sig), lo, hi});
}

namespace {

bool signaturePrefix(const std::string& entry, const std::string& query) {
    if (entry.size() > query.size()) return false;
    if (query.compare(0, entry.size(), entry) != 0) return false;
    return entry.size() == query.size() || query[entry.size()] == '.';
}

}  // namespace

bool InfCache::coversPoint(const HybridAutomaton& h, const std::vector<PathStep>& path,
                           const Eigen::VectorXd& v) const {
    std::string sig = pathSignature(h, path);
    for (const auto& e : entries_) {
        if (!signaturePrefix(e.signature, sig)) continue;
        bool inside = true;
        for (Eigen::Index i = 0; i < v.size() && inside; ++i)
            inside = v[i] >= e.lo[i] - 1e-12 && v[i] <= e.hi[i] + 1e-12;
        if (inside) {
            ++hits_;
            return true;
        }
    }
    return false;
}

bool InfCache::coversBox(const HybridAutomaton& h, const std::vector<PathStep>& path,
                         const Eigen::VectorXd& lo, const Eigen::VectorXd& hi) const {
    std::string sig = pathSignature(h, path);
    for (const auto& e : entries_) {
        if (!signaturePrefix(e.signature, sig)) continue;
        bool inside = true;
        for (Eigen::Index i = 0; i < lo.size() && inside; ++i)
            inside = lo[i] >= e.lo[i] - 1e-12 && hi[i] <= e.hi[i] + 1e-12;
        if (inside) {
            ++hits_;
            return true;
        }
    }
    return false;
}

std::vector<std::string> InfCache::signatures() const {
    std::vector<std::string> out;
    out.reserve(entries_.size());
    for (const auto& e : entries_) out.push_back(e.signature);
    return out;
}

// ── Probe bookkeeping ───────────────────────────────────────────────────────

namespace {

struct BudgetExhausted {};

struct ProbeBudget {
    long remaining;
    void spend(long n) {
        remaining -= n;
        if (remaining < 0) throw BudgetExhausted{};
    }
};

// Outcome of sweeping one guard along one trajectory. A "weak" hit passes
// the δ-weakened guard; strict hits are the subset passing it exactly. Only
// strict hits may become witnesses; weak-only hits still demand coverage
// before the δ-robust UNSAT verdict.
struct Scan {
    std::optional<double> firstStrict;            // earliest strict hit (early-exit mode)
    std::vector<std::pair<double, bool>> hits;    // (time, strict?) weakened hits, sorted
    bool weakenedSeen = false;
    bool strictSeen = false;
    double spacing = 1.0;
};

// Dyadic sweep of (0,1): level L probes the odd multiples of 2^-(L+1), so
// levels 0..L jointly form the uniform grid of spacing 2^-(L+1). Probing is
// left to right inside each level, which makes the first hit of the
// shallowest hitting level the deterministic witness.
Scan scanStep(const Trajectory& traj, const Guard& guard, const SolverConfig& cfg,
              ProbeBudget& budget, bool earlyExit) {
    Scan scan;
    int sweepDepth = std::min(cfg.minSweepDepth, cfg.maxDepth);
    for (int level = 0;; ++level) {
        double spacing = std::ldexp(1.0, -(level + 1));
        scan.spacing = spacing;
        long count = 1L << level;
        budget.spend(count);
        for (long k = 0; k < count; ++k) {
            double t = static_cast<double>(2 * k + 1) * spacing;
            Eigen::VectorXd v = traj.at(t);
            if (guard.eval(v, t)) {
                scan.strictSeen = true;
                scan.weakenedSeen = true;
                scan.hits.emplace_back(t, true);
                if (earlyExit) {
                    scan.firstStrict = t;
                    return scan;
                }
            } else if (guard.evalWeakened(v, t, cfg.precision)) {
                scan.weakenedSeen = true;
                scan.hits.emplace_back(t, false);
            }
        }
        if (level >= sweepDepth) {
            // Mandatory sweep done. Keep hunting deeper only while something
            // weakened-satisfiable suggests a window below probe resolution.
            bool hunt = earlyExit && scan.weakenedSeen && !scan.strictSeen &&
                        level < cfg.maxDepth;
            if (!hunt) break;
        }
    }
    std::sort(scan.hits.begin(), scan.hits.end());
    return scan;
}

struct SeqSolver {
    const HybridAutomaton& h;
    const SolverConfig& cfg;
    const IntegratorConfig& icfg;
    ProbeBudget budget;
    bool sawUnknown = false;

    // Candidate firing times for one step: weakened hits thinned to the
    // δ_s coverage stride, ascending. Strict hits survive thinning with
    // priority so witnesses stay available.
    std::vector<std::pair<double, bool>> representatives(const Scan& scan) const {
        if (scan.hits.empty()) return {};
        long stride = std::max(1L, std::lround(cfg.precision / scan.spacing));
        std::vector<std::pair<double, bool>> reps;
        std::size_t i = 0;
        while (i < scan.hits.size()) {
            std::size_t end = std::min(scan.hits.size(), i + static_cast<std::size_t>(stride));
            // Prefer a strict representative within the stride block.
            std::size_t pick = i;
            for (std::size_t j = i; j < end; ++j)
                if (scan.hits[j].second) {
                    pick = j;
                    break;
                }
            reps.push_back(scan.hits[pick]);
            i = end;
        }
        return reps;
    }

    // Solves steps[i..] from `state`; fills jumps/states on success.
    SatStatus solveFrom(const ConcreteState& state, const std::vector<PathStep>& path,
                        std::size_t i, std::vector<Jump>& jumps,
                        std::vector<ConcreteState>& states) {
        if (i == path.size()) return SatStatus::Sat;
        const PathStep& step = path[i];
        if (step.isStay()) {
            budget.spend(icfg.stepsPerUnit() / 8 + 1);
            ConcreteState next;
            next.mode = state.mode;
            next.valuation = flow(h, state.mode, state.valuation, 1.0, icfg);
            SatStatus rest = solveFrom(next, path, i + 1, jumps, states);
            if (rest == SatStatus::Sat) {
                jumps.insert(jumps.begin() + static_cast<long>(i), Jump::stay());
                states.insert(states.begin() + static_cast<long>(i), next);
            }
            return rest;
        }

        const Transition& tr = h.transitions[static_cast<std::size_t>(step.transition)];
        Trajectory traj(h, state.mode, state.valuation, icfg);
        budget.spend(icfg.stepsPerUnit() / 8 + 1);
        bool lastStep = i + 1 == path.size();
        Scan scan = scanStep(traj, tr.guard, cfg, budget, /*earlyExit=*/lastStep);

        if (lastStep) {
            if (scan.firstStrict) {
                double t = *scan.firstStrict;
                ConcreteState next;
                next.mode = tr.to;
                next.valuation = composeStep(h, state.mode, state.valuation, step.transition, t,
                                             icfg);
                jumps.push_back(Jump::fire(step.transition, t));
                states.push_back(next);
                return SatStatus::Sat;
            }
            if (scan.weakenedSeen) {
                // Something comes within δ_s of the final guard but nothing
                // satisfies it outright: not robustly infeasible.
                sawUnknown = true;
                return SatStatus::Unknown;
            }
            return SatStatus::Unsat;
        }

        if (scan.hits.empty()) return SatStatus::Unsat;

        std::vector<std::pair<double, bool>> reps = representatives(scan);
        if (reps.size() > 4096) {
            sawUnknown = true;
            return SatStatus::Unknown;
        }
        bool branchUnknown = false;
        bool weakOnlyFeasible = false;
        std::size_t baseJumps = jumps.size();
        for (const auto& [t, strict] : reps) {
            ConcreteState next;
            next.mode = tr.to;
            next.valuation = composeStep(h, state.mode, state.valuation, step.transition, t, icfg);
            SatStatus rest = solveFrom(next, path, i + 1, jumps, states);
            if (rest == SatStatus::Sat) {
                if (strict) {
                    jumps.insert(jumps.begin() + static_cast<long>(i),
                                 Jump::fire(step.transition, t));
                    states.insert(states.begin() + static_cast<long>(i), next);
                    return SatStatus::Sat;
                }
                // The suffix is feasible but this firing time only clears
                // the weakened guard: no witness, no robust refutation.
                weakOnlyFeasible = true;
                jumps.resize(baseJumps);
                states.resize(baseJumps);
            }
            if (rest == SatStatus::Unknown) branchUnknown = true;
        }
        if (branchUnknown || weakOnlyFeasible) {
            sawUnknown = true;
            return SatStatus::Unknown;
        }
        return SatStatus::Unsat;
    }
};

// Independent witness verification: re-simulate the whole chain and demand
// every strict guard hold at the recorded firing times.
void verifyWitness(const HybridAutomaton& h, const ConcreteState& start,
                   const std::vector<PathStep>& path, const std::vector<Jump>& jumps,
                   const std::vector<ConcreteState>& states, const IntegratorConfig& icfg) {
    ConcreteState cur = start;
    for (std::size_t i = 0; i < path.size(); ++i) {
        const Jump& j = jumps[i];
        if (path[i].isStay() != j.isStay()) throw std::logic_error("witness shape mismatch");
        Eigen::VectorXd next;
        int nextMode;
        if (j.isStay()) {
            next = flow(h, cur.mode, cur.valuation, 1.0, icfg);
            nextMode = cur.mode;
        } else {
            const Transition& tr = h.transitions[static_cast<std::size_t>(j.transition)];
            Eigen::VectorXd atFire = flow(h, cur.mode, cur.valuation, j.fireTime, icfg);
            if (!tr.guard.eval(atFire, j.fireTime))
                throw std::logic_error("witness failed strict re-verification");
            next = composeStep(h, cur.mode, cur.valuation, j.transition, j.fireTime, icfg);
            nextMode = tr.to;
        }
        if (states[i].mode != nextMode ||
            (states[i].valuation - next).cwiseAbs().maxCoeff() > 1e-9)
            throw std::logic_error("witness state mismatch on re-simulation");
        cur = states[i];
    }
}

// ── External hook plumbing ──────────────────────────────────────────────────

std::optional<SatResult> tryExternalSolve(const HybridAutomaton& h, const ConcreteState* start,
                                          const Eigen::VectorXd* lo, const Eigen::VectorXd* hi,
                                          const std::vector<PathStep>& path,
                                          const SolverConfig& cfg, const IntegratorConfig& icfg);

}  // namespace

std::string serializeQuery(const HybridAutomaton& h, const ConcreteState* start,
                           const Eigen::VectorXd* boxLower, const Eigen::VectorXd* boxUpper,
                           const std::vector<PathStep>& path) {
    nlohmann::json q;
    q["variables"] = h.variables;
    q["steps"] = nlohmann::json::array();
    for (const auto& s : path) {
        nlohmann::json step;
        if (s.isStay()) {
            step["kind"] = "stay";
            step["mode"] = h.modes[static_cast<std::size_t>(s.stayMode)].name;
        } else {
            const Transition& tr = h.transitions[static_cast<std::size_t>(s.transition)];
            step["kind"] = "fire";
            step["from"] = h.modes[static_cast<std::size_t>(tr.from)].name;
            step["to"] = h.modes[static_cast<std::size_t>(tr.to)].name;
            step["guard"] = tr.guard.print(h.variables);
        }
        q["steps"].push_back(step);
    }
    if (start) {
        q["start"] = std::vector<double>(start->valuation.data(),
                                         start->valuation.data() + start->valuation.size());
        q["start_mode"] = h.modes[static_cast<std::size_t>(start->mode)].name;
    }
    if (boxLower && boxUpper) {
        q["box_lower"] = std::vector<double>(boxLower->data(), boxLower->data() + boxLower->size());
        q["box_upper"] = std::vector<double>(boxUpper->data(), boxUpper->data() + boxUpper->size());
    }
    return q.dump();
}

namespace {

std::optional<SatResult> tryExternalSolve(const HybridAutomaton& h, const ConcreteState* start,
                                          const Eigen::VectorXd* lo, const Eigen::VectorXd* hi,
                                          const std::vector<PathStep>& path,
                                          const SolverConfig& cfg, const IntegratorConfig& icfg) {
    if (cfg.externalCommand.empty()) return std::nullopt;
    std::string query = serializeQuery(h, start, lo, hi, path);
    // The hook reads the query JSON on stdin and prints the answer JSON on
    // stdout; popen cannot do both portably, so the query goes via a file.
    char tmpl[] = "/tmp/hyc_query_XXXXXX";
    int fd = ::mkstemp(tmpl);
    if (fd < 0) return std::nullopt;
    FILE* f = ::fdopen(fd, "w");
    std::fputs(query.c_str(), f);
    std::fclose(f);
    std::string full = cfg.externalCommand + " < " + tmpl;
    FILE* out = ::popen(full.c_str(), "r");
    if (!out) {
        std::remove(tmpl);
        return std::nullopt;
    }
    std::string answer;
    char buf[512];
    while (std::fgets(buf, sizeof(buf), out)) answer += buf;
    int rc = ::pclose(out);
    std::remove(tmpl);
    if (rc != 0) return std::nullopt;

    try {
        auto j = nlohmann::json::parse(answer);
        std::string status = j.at("status").get<std::string>();
        SatResult r;
        if (status == "unsat") {
            r.status = SatStatus::Unsat;
            r.note = "external";
            return r;
        }
        if (status == "unknown") {
            r.status = SatStatus::Unknown;
            r.note = "external";
            return r;
        }
        if (status != "sat") return std::nullopt;
        std::vector<double> times = j.at("times").get<std::vector<double>>();
        // Replay the proposed times; only a verified witness is accepted.
        ConcreteState cur;
        if (start) cur = *start;
        else {
            cur.mode = pathStartMode(h, path);
            if (!j.contains("start")) return std::nullopt;
            std::vector<double> sv = j.at("start").get<std::vector<double>>();
            cur.valuation = Eigen::Map<Eigen::VectorXd>(sv.data(), static_cast<long>(sv.size()));
            r.startValuation = cur.valuation;
        }
        std::size_t ti = 0;
        for (const auto& s : path) {
            if (s.isStay()) {
                cur.valuation = flow(h, cur.mode, cur.valuation, 1.0, icfg);
                r.witnessJumps.push_back(Jump::stay());
            } else {
                if (ti >= times.size()) return std::nullopt;
                double t = times[ti++];
                if (!(t > 0.0 && t < 1.0)) return std::nullopt;
                const Transition& tr = h.transitions[static_cast<std::size_t>(s.transition)];
                Eigen::VectorXd atFire = flow(h, cur.mode, cur.valuation, t, icfg);
                if (!tr.guard.eval(atFire, t)) return std::nullopt;
                cur.valuation = composeStep(h, cur.mode, cur.valuation, s.transition, t, icfg);
                cur.mode = tr.to;
                r.witnessJumps.push_back(Jump::fire(s.transition, t));
            }
            r.witnessStates.push_back(cur);
        }
        r.status = SatStatus::Sat;
        r.note = "external";
        return r;
    } catch (const std::exception&) {
        return std::nullopt;
    }
}

SatResult solvePathFromImpl(const HybridAutomaton& h, const ConcreteState& s,
                            const std::vector<PathStep>& path, const SolverConfig& cfg,
                            const IntegratorConfig& icfg, const InfCache* cache) {
    cfg.check();
    icfg.check();
    checkPathConnected(h, path, s.mode);

    SatResult result;
    if (cache && cache->coversPoint(h, path, s.valuation)) {
        result.status = SatStatus::Unsat;
        result.fromCache = true;
        return result;
    }
    if (pathFiredSteps(path) > cfg.maxPathSteps) {
        result.status = SatStatus::Unknown;
        result.note = "path exceeds the fired-step cap";
        return result;
    }
    if (auto ext = tryExternalSolve(h, &s, nullptr, nullptr, path, cfg, icfg)) return *ext;

    SeqSolver seq{h, cfg, icfg, ProbeBudget{cfg.probeBudget()}, false};
    std::vector<Jump> jumps;
    std::vector<ConcreteState> states;
    try {
        SatStatus st = seq.solveFrom(s, path, 0, jumps, states);
        result.status = st;
        if (st == SatStatus::Sat) {
            verifyWitness(h, s, path, jumps, states, icfg);
            result.witnessJumps = std::move(jumps);
            result.witnessStates = std::move(states);
        }
    } catch (const BudgetExhausted&) {
        result.status = SatStatus::Unknown;
        result.note = "probe budget exhausted";
    } catch (const DivergenceError& e) {
        result.status = SatStatus::Unknown;
        result.note = e.what();
    }
    result.probes = cfg.probeBudget() - seq.budget.remaining;
    return result;
}

}  // namespace

SatResult solvePathFrom(const HybridAutomaton& h, const ConcreteState& s,
                        const std::vector<PathStep>& path, const SolverConfig& cfg,
                        const IntegratorConfig& icfg, const InfCache* cache) {
    return solvePathFromImpl(h, s, path, cfg, icfg, cache);
}

SatResult solveOneStep(const HybridAutomaton& h, const ConcreteState& s, int transition,
                       const SolverConfig& cfg, const IntegratorConfig& icfg,
                       const InfCache* cache) {
    const Transition& tr = h.transitions.at(static_cast<std::size_t>(transition));
    if (tr.from != s.mode) throw std::invalid_argument("transition does not leave the state's mode");
    return solvePathFromImpl(h, s, {PathStep::fire(transition)}, cfg, icfg, cache);
}

SatResult solvePathAny(const HybridAutomaton& h, const std::vector<PathStep>& path,
                       const Eigen::VectorXd& boxLower, const Eigen::VectorXd& boxUpper,
                       const SolverConfig& cfg, const IntegratorConfig& icfg, InfCache* cache) {
    cfg.check();
    icfg.check();
    int startMode = pathStartMode(h, path);
    checkPathConnected(h, path, startMode);

    SatResult result;
    if (cache && cache->coversBox(h, path, boxLower, boxUpper)) {
        result.status = SatStatus::Unsat;
        result.fromCache = true;
        return result;
    }
    if (pathFiredSteps(path) > cfg.maxPathSteps) {
        result.status = SatStatus::Unknown;
        result.note = "path exceeds the fired-step cap";
        return result;
    }
    if (auto ext = tryExternalSolve(h, nullptr, &boxLower, &boxUpper, path, cfg, icfg)) {
        if (ext->status == SatStatus::Unsat && cache) cache->insert(h, path, boxLower, boxUpper);
        return *ext;
    }

    std::vector<Eigen::Index> freeDims;
    for (Eigen::Index i = 0; i < boxLower.size(); ++i)
        if (boxUpper[i] > boxLower[i]) freeDims.push_back(i);

    bool anyUnknown = false;
    long probes = 0;

    auto solveStart = [&](const Eigen::VectorXd& v) {
        ConcreteState s;
        s.mode = startMode;
        s.valuation = v;
        SatResult r = solvePathFromImpl(h, s, path, cfg, icfg, nullptr);
        probes += r.probes;
        return r;
    };

    // Dyadic sweep of the start box, coarse levels first; in every dimension
    // level L adds the odd multiples of 2^-(L+1) of the edge.
    std::vector<Eigen::VectorXd> starts;
    Eigen::VectorXd v = boxLower;
    if (freeDims.empty()) {
        starts.push_back(v);
    } else {
        std::vector<double> fracs;
        for (int level = 0; level <= cfg.boxSweepDepth; ++level) {
            double spacing = std::ldexp(1.0, -(level + 1));
            for (long k = 0; k < (1L << level); ++k) fracs.push_back((2 * k + 1) * spacing);
        }
        // Corners matter for monotone dynamics; include them at the front.
        std::vector<double> coords{0.0, 1.0};
        coords.insert(coords.end(), fracs.begin(), fracs.end());
        if (freeDims.size() == 1) {
            for (double f : coords) {
                v = boxLower;
                v[freeDims[0]] = boxLower[freeDims[0]] +
                                 f * (boxUpper[freeDims[0]] - boxLower[freeDims[0]]);
                starts.push_back(v);
            }
        } else {
            // Tensor grid, capped to keep the sweep affordable in many dims.
            std::size_t perDim = std::min<std::size_t>(coords.size(), freeDims.size() > 2 ? 5 : 33);
            std::vector<std::size_t> idx(freeDims.size(), 0);
            for (;;) {
                v = boxLower;
                for (std::size_t d = 0; d < freeDims.size(); ++d)
                    v[freeDims[d]] = boxLower[freeDims[d]] +
                                     coords[idx[d]] * (boxUpper[freeDims[d]] - boxLower[freeDims[d]]);
                starts.push_back(v);
                std::size_t d = 0;
                while (d < idx.size() && ++idx[d] == perDim) idx[d++] = 0;
                if (d == idx.size()) break;
            }
        }
    }

    for (const auto& start : starts) {
        SatResult r = solveStart(start);
        if (r.status == SatStatus::Sat) {
            r.startValuation = start;
            r.probes = probes;
            return r;
        }
        if (r.status == SatStatus::Unknown) anyUnknown = true;
    }

    result.probes = probes;
    if (anyUnknown) {
        result.status = SatStatus::Unknown;
        result.note = "some start points inconclusive";
        return result;
    }
    result.status = SatStatus::Unsat;
    if (cache) cache->insert(h, path, boxLower, boxUpper);
    return result;
}

// ── Backtracking ────────────────────────────────────────────────────────────

BacktrackOutcome backtrackSolve(const HybridAutomaton& h, const Trace& run,
                                std::size_t stepIndex, int transition, const SolverConfig& cfg,
                                const IntegratorConfig& icfg, InfCache& cache) {
    BacktrackOutcome outcome;
    if (stepIndex >= run.states.size())
        throw std::invalid_argument("step index beyond the run");
    const Transition& target = h.transitions.at(static_cast<std::size_t>(transition));
    if (run.states[stepIndex].mode != target.from)
        throw std::invalid_argument("run does not reach the transition's source mode at that step");

    std::vector<PathStep> path{PathStep::fire(transition)};
    bool sawUnknown = false;

    for (std::size_t i = stepIndex;; --i) {
        if (pathFiredSteps(path) <= cfg.maxPathSteps) {
            outcome.queries += 1;
            SatResult r = solvePathFrom(h, run.states[i], path, cfg, icfg, &cache);
            if (r.status == SatStatus::Sat) {
                outcome.kind = BacktrackOutcome::Kind::Witness;
                Trace tr;
                tr.states.assign(run.states.begin(), run.states.begin() + static_cast<long>(i) + 1);
                tr.jumps.assign(run.jumps.begin(), run.jumps.begin() + static_cast<long>(i));
                for (std::size_t j = 0; j < r.witnessJumps.size(); ++j) {
                    tr.jumps.push_back(r.witnessJumps[j]);
                    tr.states.push_back(r.witnessStates[j]);
                }
                outcome.trace = std::move(tr);
                return outcome;
            }
            if (r.fromCache) {
                outcome.kind = BacktrackOutcome::Kind::Infeasible;
                outcome.note = "cache hit";
                return outcome;
            }
            if (r.status == SatStatus::Unknown) sawUnknown = true;
        } else {
            sawUnknown = true;  // too long to check from this anchor
        }

        if (i == 0) {
            // The path is root-anchored now: decide it over the initial box.
            if (pathFiredSteps(path) <= cfg.maxPathSteps) {
                outcome.queries += 1;
                SatResult r = solvePathAny(h, path, h.initLower, h.initUpper, cfg, icfg, &cache);
                if (r.status == SatStatus::Sat) {
                    outcome.kind = BacktrackOutcome::Kind::Witness;
                    Trace tr;
                    ConcreteState s0;
                    s0.mode = h.initialMode;
                    s0.valuation = r.startValuation;
                    tr.states.push_back(s0);
                    for (std::size_t j = 0; j < r.witnessJumps.size(); ++j) {
                        tr.jumps.push_back(r.witnessJumps[j]);
                        tr.states.push_back(r.witnessStates[j]);
                    }
                    outcome.trace = std::move(tr);
                    return outcome;
                }
                if (r.status == SatStatus::Unsat) {
                    // The box query is conclusive on its own even if some of
                    // the anchored checks were not.
                    outcome.kind = BacktrackOutcome::Kind::Infeasible;
                    outcome.cached = !r.fromCache;
                    return outcome;
                }
            }
            outcome.kind = BacktrackOutcome::Kind::Unknown;
            outcome.note = sawUnknown ? "anchored checks and box query inconclusive"
                                      : "box query inconclusive";
            return outcome;
        }

        // Grow the path one run step backwards.
        const Jump& j = run.jumps[i - 1];
        if (j.isStay()) path.insert(path.begin(), PathStep::stay(run.states[i - 1].mode));
        else path.insert(path.begin(), PathStep::fire(j.transition));
    }
}

}  // namespace hyc
