#ifndef HYC_SAMPLER_HPP
#define HYC_SAMPLER_HPP

#include <cstdint>
#include <vector>

#include "hyc/automaton.hpp"
#include "hyc/ode.hpp"
#include "hyc/rng.hpp"

namespace hyc {

// ── Random trace generation ─────────────────────────────────────────────────
//
// Per unit step: J time points are drawn uniformly i.i.d. from (0,1), each
// outgoing guard is tested on the simulated trajectory at those points, a
// transition is chosen with probability proportional to its enabled-point
// count and fired at a point drawn uniformly from its enabled set. If every
// set is empty the step is a deterministic self-stay.

struct SamplerConfig {
    int timePoints = 64;          // J
    int maxSteps = 10;            // K, trace bound in unit steps
    std::uint64_t seed = 0;
    IntegratorConfig integrator;  // unit step is fixed at 1 time unit

    void check() const {
        if (timePoints < 1) throw std::invalid_argument("J must be >= 1");
        if (maxSteps < 1) throw std::invalid_argument("K must be >= 1");
        integrator.check();
    }
};

// A finite union of disjoint open sub-intervals of (0,1) with its measure:
// the time window T_q(v,g) where a guard is enabled, either reconstructed
// from Monte Carlo samples or refined by dense-grid bisection.
struct TimeWindowSet {
    enum class Provenance { MonteCarlo, Refined };

    std::vector<std::pair<double, double>> intervals;  // disjoint, each subset of (0,1)
    double measure = 0.0;                              // sum of interval lengths
    Provenance provenance = Provenance::Refined;

    static TimeWindowSet fromIntervals(std::vector<std::pair<double, double>> iv,
                                       Provenance prov);

    // Interval reconstruction from sampled points: every maximal run of
    // enabled sample points becomes one interval reaching halfway towards
    // its disabled neighbours (clipped to (0,1)).
    static TimeWindowSet fromSamples(const std::vector<double>& sortedPoints,
                                     const std::vector<bool>& enabled);

    bool contains(double t) const;
};

// Enabled time points per outgoing transition: the J sampled points are
// shared across all guards of the step.
struct WindowEstimate {
    int transition = -1;                // index into h.transitions
    std::vector<double> enabledPoints;  // subset of the J sampled points, ascending
};

std::vector<WindowEstimate> estimateWindows(const HybridAutomaton& h, int mode,
                                            const Eigen::VectorXd& v, const SamplerConfig& cfg,
                                            RngStream& rng);

struct StepResult {
    ConcreteState next;
    Jump jump;
};

StepResult randomStep(const HybridAutomaton& h, const ConcreteState& s, const SamplerConfig& cfg,
                      RngStream& rng);

// Initial valuation uniform over the initial box, then K random steps.
Trace sampleTrace(const HybridAutomaton& h, const SamplerConfig& cfg, RngStream& rng);

// Convenience: derive the per-trace stream from (cfg.seed, traceIndex).
Trace sampleTrace(const HybridAutomaton& h, const SamplerConfig& cfg, std::uint64_t traceIndex);

bool isCounterexample(const HybridAutomaton& h, const Trace& tr);

// Re-simulate a trace step by step and confirm every recorded firing time
// satisfies its guard on the re-integrated trajectory (δ-weakened) and that
// the recorded states are reproduced within `stateTol`.
bool traceReplaysConsistently(const HybridAutomaton& h, const Trace& tr,
                              const IntegratorConfig& cfg, double guardDelta = 1e-6,
                              double stateTol = 1e-9);

// Dense-grid window refinement: locates the enabled set of `guard` along the
// trajectory of (mode, v) on a uniform grid of `gridPoints` cells, bisecting
// each boundary to `timeTol`. Exact up to features narrower than a grid cell.
TimeWindowSet refineWindows(const HybridAutomaton& h, int mode, const Eigen::VectorXd& v,
                            const Guard& guard, const IntegratorConfig& cfg,
                            int gridPoints = 4096, double timeTol = 1e-12);

}  // namespace hyc

#endif  // HYC_SAMPLER_HPP
