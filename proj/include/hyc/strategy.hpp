#ifndef HYC_STRATEGY_HPP
#define HYC_STRATEGY_HPP

#include <optional>
#include <string>
#include <vector>

#include "hyc/automaton.hpp"
#include "hyc/exploretree.hpp"
#include "hyc/inference.hpp"
#include "hyc/sampler.hpp"
#include "hyc/solver.hpp"

namespace hyc {

// ── Cost model ──────────────────────────────────────────────────────────────
//
// c_t: expected seconds per random trace, an EWMA of measured wall time
// seeded by one calibration trace (or pinned via fixedTraceCost for
// reproducible runs). c_s(l): seconds to solve a path condition of l unit
// steps, exp(a*l - b) - 1 with the fitted defaults a=1.73, b=1.65.

struct CostModel {
    double traceCost = 0.0;  // c_t, seconds
    double coefA = 1.73;
    double coefB = 1.65;
    bool pinned = false;     // when set, observations are ignored

    double symbolicCost(int steps) const {
        double c = std::exp(coefA * static_cast<double>(steps) - coefB) - 1.0;
        return c > 1e-6 ? c : 1e-6;
    }
};

// EWMA with weight 0.2 on the new observation; the first observation
// initializes c_t directly. No-op for pinned models.
CostModel updateCost(CostModel cost, double observedSeconds);

enum class StrategyMode { RandomOnly, Local, Global, Dynamic };

const char* strategyName(StrategyMode m);
std::optional<StrategyMode> strategyFromName(const std::string& name);

struct StrategyConfig {
    StrategyMode mode = StrategyMode::Local;
    double timeoutSeconds = 60.0;
    int batchSize = 16;       // traces sampled between decisions
    long maxSamples = 0;      // 0 = bounded by the timeout only
    double delta = 0.1;       // tolerance for the confidence report
    double confidenceTarget = 0.99;
    double fixedTraceCost = 0.0;  // >0 pins c_t (reproducible decisions)
    int jobs = 1;

    void check() const {
        if (!(timeoutSeconds > 0.0)) throw std::invalid_argument("timeout must be positive");
        if (batchSize < 1) throw std::invalid_argument("batch size must be >= 1");
        if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("delta must lie in (0,1)");
    }
};

// ── chooseAction ────────────────────────────────────────────────────────────

struct FrontierChoice {
    std::vector<int> nodePath;  // mode path of the chosen node
    int target = -1;
    double qHat = 0.5;
    int queryLength = 1;  // unit steps of the symbolic query c_s would face
    double randomKey = 0.0;
    double symbolicKey = 0.0;
};

struct Action {
    bool symbolic = false;  // false: sample a random batch
    FrontierChoice choice;  // meaningful when a frontier existed
};

// Pure function of the frontier snapshot: picks the pair minimizing
// min(c_t / E(q(u)), c_s(l(u,v))) and dispatches on which side of the min
// won. An empty frontier always yields a random batch.
Action chooseAction(const std::vector<FrontierPair>& pairs, const HybridAutomaton& h,
                    const CostModel& cost, const StrategyConfig& cfg);

// ── Run report ──────────────────────────────────────────────────────────────

enum class RunOutcome { Counterexample, Pass, TimeoutInconclusive };

const char* runOutcomeName(RunOutcome o);

struct SolverCallRecord {
    std::string kind;       // "backtrack", "path-any", "one-step"
    std::string path;       // mode path of the frontier node
    std::string target;     // target mode name
    std::string status;     // witness / infeasible / unknown / sat / unsat
    int queries = 0;
    bool cached = false;    // inserted an infeasibility into the cache
    bool fromCache = false; // answered from the cache without solving
    std::string note;
};

struct TreeNodeSummary {
    std::vector<std::string> path;
    int m = 0;
    int n = 0;
    double qHat = 0.5;
    std::size_t particleCount = 0;
    std::string origin;  // "random" or "solver"
};

struct RunReport {
    RunOutcome outcome = RunOutcome::TimeoutInconclusive;
    std::optional<Trace> counterexample;
    long tracesSampled = 0;
    long solverCalls = 0;
    long solverSat = 0, solverUnsat = 0, solverUnknown = 0, solverCacheHits = 0;
    ConfidenceReport confidence;
    std::vector<SolverCallRecord> audit;
    std::vector<TreeNodeSummary> tree;
    std::size_t cacheEntries = 0;
    double calibrationSeconds = 0.0;
    double samplingSeconds = 0.0;
    double solvingSeconds = 0.0;
    double totalSeconds = 0.0;
    double finalTraceCost = 0.0;
    std::string note;
};

class ModelError : public std::runtime_error {
public:
    explicit ModelError(const std::string& what) : std::runtime_error(what) {}
};

// The concolic loop: validate, prune by backward reachability, then
// alternate random batches and symbolic queries per chooseAction until a
// counterexample, the sample budget, or the timeout ends the run.
RunReport runConcolic(const HybridAutomaton& h, const SamplerConfig& samplerCfg,
                      const SolverConfig& solverCfg, const StrategyConfig& strategyCfg,
                      std::uint64_t seed);

}  // namespace hyc

#endif  // HYC_STRATEGY_HPP
