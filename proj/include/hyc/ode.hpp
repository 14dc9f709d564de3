#ifndef HYC_ODE_HPP
#define HYC_ODE_HPP

#include <Eigen/Dense>
#include <stdexcept>
#include <vector>

#include "hyc/automaton.hpp"

namespace hyc {

// ── Numeric trajectories within a mode ──────────────────────────────────────
//
// Classical fixed-step RK4. The step divides the unit interval evenly; an
// arbitrary query time is reached by whole grid steps plus one partial RK4
// step with the residual size, which keeps 4th-order accuracy at every t.
// The time argument fed to the right-hand sides is the time since the start
// of the current flow segment.

struct IntegratorConfig {
    double step = 1e-3;

    void check() const {
        if (!(step > 0.0) || step > 0.1)
            throw std::invalid_argument("ODE step must lie in (0, 0.1]");
        double n = 1.0 / step;
        if (std::abs(n - std::round(n)) > 1e-9 * n)
            throw std::invalid_argument("1/step must be an integer (unit interval divides evenly)");
    }
    long stepsPerUnit() const { return static_cast<long>(std::llround(1.0 / step)); }
};

class DivergenceError : public std::runtime_error {
public:
    DivergenceError(int mode, long step, const std::string& cause)
        : std::runtime_error("trajectory diverged at mode " + std::to_string(mode) + ", step " +
                             std::to_string(step) + ": " + cause) {}
};

// Dense evaluator for θ_q(v, ·) on [0,1]: integrates lazily to the nearest
// grid point below the query and finishes with one partial step. Grid states
// are cached, so repeated queries (window estimation, solver probing) cost a
// single RK4 step each.
class Trajectory {
public:
    Trajectory(const HybridAutomaton& h, int mode, Eigen::VectorXd start,
               const IntegratorConfig& cfg);

    // θ_q(v, t) for t in [0,1]; θ_q(v, 0) == v bit-exactly.
    Eigen::VectorXd at(double t) const;

    int mode() const { return mode_; }
    const Eigen::VectorXd& start() const { return grid_.front(); }
    double step() const { return cfg_.step; }

private:
    const HybridAutomaton& automaton_;
    int mode_;
    IntegratorConfig cfg_;
    mutable std::vector<Eigen::VectorXd> grid_;  // states at k*step, extended on demand

    void extendTo(long idx) const;
    Eigen::VectorXd rk4Step(const Eigen::VectorXd& y, double tLocal, double hstep) const;
};

// θ_q(v, t): RK4 approximation of the ODE solution of mode q after time
// t in [0,1] starting from v.
Eigen::VectorXd flow(const HybridAutomaton& h, int mode, const Eigen::VectorXd& v, double t,
                     const IntegratorConfig& cfg);

// One-step composition v_{q,p}(v,t): flow t time units in q (the source mode
// of `transition`), jump, then flow 1-t units in the target mode. t must lie
// strictly inside (0,1).
Eigen::VectorXd composeStep(const HybridAutomaton& h, int mode, const Eigen::VectorXd& v,
                            int transition, double t, const IntegratorConfig& cfg);

}  // namespace hyc

#endif  // HYC_ODE_HPP
