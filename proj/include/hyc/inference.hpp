#ifndef HYC_INFERENCE_HPP
#define HYC_INFERENCE_HPP

#include <functional>
#include <string>
#include <vector>

#include "hyc/automaton.hpp"
#include "hyc/ode.hpp"

namespace hyc {

// ── Bayesian confidence calculus ────────────────────────────────────────────
//
// Posterior over the error probability θ after n positive and m negative
// samples drawn by a method whose effectiveness is θ^α, starting from the
// non-informative prior f(θ) ≡ 1:
//
//     f(θ | n,m) ∝ θ^(αm) (1-θ^α)^n
//
// and the confidence that θ < δ is the normalized integral of that kernel
// over [0,δ]. All integrals go through one adaptive Gauss–Kronrod routine.

struct SampleTally {
    long positives = 0;  // n
    long negatives = 0;  // m
};

struct Effectiveness {
    double alpha = 1.0;  // exponent in (0,1]

    void check() const {
        if (!(alpha > 0.0 && alpha <= 1.0))
            throw std::invalid_argument("effectiveness exponent must lie in (0,1]");
    }
};

enum class Verdict { Pass, Fail, Inconclusive };

struct ConfidenceReport {
    SampleTally tally;
    double delta = 0.1;
    double alpha = 1.0;
    double confidence = 0.0;
    Verdict verdict = Verdict::Inconclusive;
};

// Adaptive Gauss–Kronrod (G7,K15) integration with interval bisection.
// Refines until the panel error estimate drops below
// max(absTol, relTol*|integral|).
double integrate(const std::function<double(double)>& f, double lo, double hi,
                 double absTol = 1e-13, double relTol = 1e-11);

// Normalized posterior density as a callable; integrates to 1 within 1e-9.
std::function<double(double)> posteriorDensity(const SampleTally& tally, Effectiveness eff);

// c_φ(n,m,δ) with φ(θ) = θ^α; absolute error <= 1e-9.
double confidence(const SampleTally& tally, double delta, Effectiveness eff);

// Smallest n such that confidence((n,0), δ, α) reaches the target.
long requiredSamples(double delta, double targetConfidence, Effectiveness eff);

ConfidenceReport makeConfidenceReport(const SampleTally& tally, double delta, Effectiveness eff,
                                      double targetConfidence, bool counterexampleFound);

const char* verdictName(Verdict v);

// ── Exact transition-probability oracle ─────────────────────────────────────
//
// Computes the per-transition step probabilities from a mode exactly (up to
// quadrature error ~1e-4): window measures along the trajectory by dense
// grid with bisection-refined boundaries, then the measure ratio integrated
// over the uniform initial box. Oracle scope: at most 2 state variables.

class OracleScopeError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

std::vector<double> exactTransitionProbability(const HybridAutomaton& h, int mode,
                                               const std::vector<int>& transitions,
                                               const Eigen::VectorXd& boxLower,
                                               const Eigen::VectorXd& boxUpper,
                                               const IntegratorConfig& cfg);

}  // namespace hyc

#endif  // HYC_INFERENCE_HPP
