#ifndef HYC_SOLVER_HPP
#define HYC_SOLVER_HPP

#include <optional>
#include <string>
#include <vector>

#include "hyc/automaton.hpp"
#include "hyc/ode.hpp"

namespace hyc {

// ── δ-decision feasibility of time windows and path conditions ──────────────
//
// Stand-in for an external ODE constraint solver. Queries are decided by
// dyadic probing of simulated trajectories: SAT answers carry a witness that
// re-verifies by simulation against the strict guards; UNSAT means that a
// sweep at the configured resolution found no probe satisfying even the
// δ-weakened guards (robust infeasibility at probe resolution, no symbolic
// enclosures); UNKNOWN is returned whenever the budget or depth limit ends
// the search first, never silently SAT or UNSAT.

struct SolverConfig {
    double precision = 1e-3;    // δ_s: weakening slack and coverage resolution
    int maxDepth = 30;          // dyadic subdivision depth limit
    double budgetSeconds = 10;  // interpreted as a deterministic probe allowance
    int minSweepDepth = 14;     // mandatory sweep depth while hunting witnesses
    int boxSweepDepth = 6;      // start-box subdivision depth for solvePathAny
    int maxPathSteps = 4;       // fired steps per query; longer paths -> UNKNOWN
    std::string externalCommand;  // optional external solver hook, see below

    void check() const {
        if (!(precision > 0.0)) throw std::invalid_argument("solver precision must be positive");
        if (maxDepth < 10) throw std::invalid_argument("solver depth limit must be >= 10");
        if (!(budgetSeconds > 0.0)) throw std::invalid_argument("solver budget must be positive");
    }
    // Budgets are spent in probe units at a fixed nominal rate so that
    // identical queries exhaust identically on every machine.
    long probeBudget() const { return static_cast<long>(budgetSeconds * 3e6); }
};

// One step of a path condition: a fired transition (existential firing time)
// or a deterministic full-unit stay in a mode.
struct PathStep {
    int transition = -1;
    int stayMode = -1;
    bool isStay() const { return transition < 0; }
    static PathStep fire(int t) { return PathStep{t, -1}; }
    static PathStep stay(int mode) { return PathStep{-1, mode}; }
};

// Source mode of the first step of a path.
int pathStartMode(const HybridAutomaton& h, const std::vector<PathStep>& path);
int pathFiredSteps(const std::vector<PathStep>& path);
std::string pathSignature(const HybridAutomaton& h, const std::vector<PathStep>& path);

enum class SatStatus { Sat, Unsat, Unknown };

struct SatResult {
    SatStatus status = SatStatus::Unknown;
    // Witness, present iff status == Sat: per path step either a fired jump
    // with its time or a stay, plus the end-of-unit state after each step.
    std::vector<Jump> witnessJumps;
    std::vector<ConcreteState> witnessStates;
    Eigen::VectorXd startValuation;  // chosen start (solvePathAny)
    bool fromCache = false;
    long probes = 0;
    std::string note;
};

const char* satStatusName(SatStatus s);

// Paths proven infeasible from every start valuation in a recorded box.
// Entries only accumulate; a query whose path extends a cached entry and
// whose start set lies inside the entry's box is answered without solving.
class InfCache {
public:
    void insert(const HybridAutomaton& h, const std::vector<PathStep>& path,
                const Eigen::VectorXd& lo, const Eigen::VectorXd& hi);

    // Entry path is a prefix of `path` and the query box/point lies inside
    // the entry box.
    bool coversPoint(const HybridAutomaton& h, const std::vector<PathStep>& path,
                     const Eigen::VectorXd& v) const;
    bool coversBox(const HybridAutomaton& h, const std::vector<PathStep>& path,
                   const Eigen::VectorXd& lo, const Eigen::VectorXd& hi) const;

    std::size_t size() const { return entries_.size(); }
    long hits() const { return hits_; }
    std::vector<std::string> signatures() const;

private:
    struct Entry {
        std::string signature;  // start mode + step tokens
        Eigen::VectorXd lo, hi;
    };
    std::vector<Entry> entries_;
    mutable long hits_ = 0;
};

// ∃t in (0,1): the trajectory of s satisfies the transition's guard at t.
// SAT witnesses carry the verified end-of-unit valuation.
SatResult solveOneStep(const HybridAutomaton& h, const ConcreteState& s, int transition,
                       const SolverConfig& cfg, const IntegratorConfig& icfg,
                       const InfCache* cache = nullptr);

// Feasibility of a connected path of steps from a fixed start valuation.
SatResult solvePathFrom(const HybridAutomaton& h, const ConcreteState& s,
                        const std::vector<PathStep>& path, const SolverConfig& cfg,
                        const IntegratorConfig& icfg, const InfCache* cache = nullptr);

// Feasibility of a path from any start valuation in a box. UNSAT results are
// recorded in the cache under the path's signature together with the box.
SatResult solvePathAny(const HybridAutomaton& h, const std::vector<PathStep>& path,
                       const Eigen::VectorXd& boxLower, const Eigen::VectorXd& boxUpper,
                       const SolverConfig& cfg, const IntegratorConfig& icfg,
                       InfCache* cache = nullptr);

// ── Backtracking over a concrete run ────────────────────────────────────────
//
// Tries to fire `transition` at step `stepIndex` of `run`: first from the
// run's own state at that step, then from progressively earlier states with
// the run's intermediate steps turned into path-condition conjuncts. When
// the whole run prefix is consumed, the path is root-anchored and is solved
// over the automaton's initial box: infeasible there means no trace at all
// can realize it, so it is cached; a satisfiable box query yields a brand
// new witness trace from a fresh initial valuation.

struct BacktrackOutcome {
    enum class Kind { Witness, Infeasible, Unknown };
    Kind kind = Kind::Unknown;
    Trace trace;           // present iff kind == Witness
    bool cached = false;   // true when an infeasible root path entered the cache
    int queries = 0;       // internal solver queries issued
    std::string note;
};

BacktrackOutcome backtrackSolve(const HybridAutomaton& h, const Trace& run,
                                std::size_t stepIndex, int transition, const SolverConfig& cfg,
                                const IntegratorConfig& icfg, InfCache& cache);

// ── External solver hook ─────────────────────────────────────────────────────
//
// When SolverConfig::externalCommand is set, one-step and path queries are
// serialized to a JSON file and `command <queryfile` is expected to print a
// JSON object {"status": "sat"|"unsat"|"unknown", "times": [...]} on stdout.
// SAT answers are re-verified by simulation before being trusted; anything
// malformed falls back to the internal engine.
std::string serializeQuery(const HybridAutomaton& h, const ConcreteState* start,
                           const Eigen::VectorXd* boxLower, const Eigen::VectorXd* boxUpper,
                           const std::vector<PathStep>& path);

}  // namespace hyc

#endif  // HYC_SOLVER_HPP
