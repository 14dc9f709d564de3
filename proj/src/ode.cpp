#include "hyc/ode.hpp"

#include <cmath>

namespace hyc {

namespace {

constexpr double kDivergenceBound = 1e12;

void evalRhs(const HybridAutomaton& h, int mode, const Eigen::VectorXd& y, double tLocal,
             Eigen::VectorXd& dydt) {
    const auto& rhs = h.modes[mode].rhs;
    for (std::size_t i = 0; i < rhs.size(); ++i) dydt[static_cast<Eigen::Index>(i)] = rhs[i].eval(y, tLocal);
}

}  // namespace

Trajectory::Trajectory(const HybridAutomaton& h, int mode, Eigen::VectorXd start,
                       const IntegratorConfig& cfg)
    : automaton_(h), mode_(mode), cfg_(cfg) {
    cfg_.check();
    grid_.reserve(16);
    grid_.push_back(std::move(start));
}

Eigen::VectorXd Trajectory::rk4Step(const Eigen::VectorXd& y, double tLocal, double hstep) const {
    const Eigen::Index n = y.size();
    Eigen::VectorXd k1(n), k2(n), k3(n), k4(n);
    evalRhs(automaton_, mode_, y, tLocal, k1);
    evalRhs(automaton_, mode_, y + (hstep / 2.0) * k1, tLocal + hstep / 2.0, k2);
    evalRhs(automaton_, mode_, y + (hstep / 2.0) * k2, tLocal + hstep / 2.0, k3);
    evalRhs(automaton_, mode_, y + hstep * k3, tLocal + hstep, k4);
    return y + (hstep / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

void Trajectory::extendTo(long idx) const {
    while (static_cast<long>(grid_.size()) <= idx) {
        long k = static_cast<long>(grid_.size()) - 1;
        Eigen::VectorXd next;
        try {
            next = rk4Step(grid_.back(), static_cast<double>(k) * cfg_.step, cfg_.step);
        } catch (const EvalError& e) {
            throw DivergenceError(mode_, k, e.what());
        }
        if (!next.allFinite() || next.cwiseAbs().maxCoeff() > kDivergenceBound)
            throw DivergenceError(mode_, k, "state magnitude exceeded 1e12");
        grid_.push_back(std::move(next));
    }
}

Eigen::VectorXd Trajectory::at(double t) const {
    if (t < 0.0 || t > 1.0 + 1e-12) throw std::invalid_argument("trajectory time outside [0,1]");
    if (t == 0.0) return grid_.front();
    long idx = static_cast<long>(std::floor(t / cfg_.step));
    if (idx > cfg_.stepsPerUnit()) idx = cfg_.stepsPerUnit();
    double residual = t - static_cast<double>(idx) * cfg_.step;
    if (residual > cfg_.step * (1.0 - 1e-9)) {  // rounding put us just below a grid point
        ++idx;
        residual = 0.0;
    }
    if (residual < cfg_.step * 1e-9) {  // query lies on the grid
        extendTo(idx);
        return grid_[static_cast<std::size_t>(idx)];
    }
    extendTo(idx);
    try {
        Eigen::VectorXd y =
            rk4Step(grid_[static_cast<std::size_t>(idx)], static_cast<double>(idx) * cfg_.step,
                    residual);
        if (!y.allFinite() || y.cwiseAbs().maxCoeff() > kDivergenceBound)
            throw DivergenceError(mode_, idx, "state magnitude exceeded 1e12");
        return y;
    } catch (const EvalError& e) {
        throw DivergenceError(mode_, idx, e.what());
    }
}

Eigen::VectorXd flow(const HybridAutomaton& h, int mode, const Eigen::VectorXd& v, double t,
                     const IntegratorConfig& cfg) {
    Trajectory traj(h, mode, v, cfg);
    return traj.at(t);
}

Eigen::VectorXd composeStep(const HybridAutomaton& h, int mode, const Eigen::VectorXd& v,
                            int transition, double t, const IntegratorConfig& cfg) {
    if (!(t > 0.0 && t < 1.0))
        throw std::invalid_argument("firing time must lie strictly inside (0,1)");
    const Transition& tr = h.transitions.at(static_cast<std::size_t>(transition));
    if (tr.from != mode) throw std::invalid_argument("transition does not leave the given mode");
    Eigen::VectorXd atJump = flow(h, mode, v, t, cfg);
    // The target flow runs for the remaining 1-t with its own clock at zero.
    Trajectory rest(h, tr.to, std::move(atJump), cfg);
    return rest.at(1.0 - t);
}

}  // namespace hyc
