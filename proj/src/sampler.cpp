#include "hyc/sampler.hpp"

#include <algorithm>
#include <cmath>

namespace hyc {

// ── TimeWindowSet ───────────────────────────────────────────────────────────

TimeWindowSet TimeWindowSet::fromIntervals(std::vector<std::pair<double, double>> iv,
                                           Provenance prov) {
    std::sort(iv.begin(), iv.end());
    TimeWindowSet w;
    w.provenance = prov;
    for (auto& [lo, hi] : iv) {
        if (!(hi > lo)) continue;
        if (lo < 0.0 || hi > 1.0) throw std::invalid_argument("window interval outside (0,1)");
        if (!w.intervals.empty() && lo < w.intervals.back().second)
            throw std::invalid_argument("window intervals overlap");
        w.intervals.emplace_back(lo, hi);
        w.measure += hi - lo;
    }
    return w;
}

TimeWindowSet TimeWindowSet::fromSamples(const std::vector<double>& pts,
                                         const std::vector<bool>& enabled) {
    std::vector<std::pair<double, double>> iv;
    std::size_t n = pts.size();
    std::size_t i = 0;
    while (i < n) {
        if (!enabled[i]) { ++i; continue; }
        std::size_t j = i;
        while (j + 1 < n && enabled[j + 1]) ++j;
        double lo = i == 0 ? 0.0 : 0.5 * (pts[i - 1] + pts[i]);
        double hi = j + 1 == n ? 1.0 : 0.5 * (pts[j] + pts[j + 1]);
        iv.emplace_back(lo, hi);
        i = j + 1;
    }
    return fromIntervals(std::move(iv), Provenance::MonteCarlo);
}

bool TimeWindowSet::contains(double t) const {
    for (const auto& [lo, hi] : intervals)
        if (t > lo && t < hi) return true;
    return false;
}

// ── Window estimation (Monte Carlo) ─────────────────────────────────────────

std::vector<WindowEstimate> estimateWindows(const HybridAutomaton& h, int mode,
                                            const Eigen::VectorXd& v, const SamplerConfig& cfg,
                                            RngStream& rng) {
    cfg.check();
    std::vector<int> outs = outgoing(h, mode);

    std::vector<double> points(static_cast<std::size_t>(cfg.timePoints));
    for (double& p : points) p = rng.uniformOpen01();
    std::sort(points.begin(), points.end());

    std::vector<WindowEstimate> result;
    result.reserve(outs.size());
    if (outs.empty()) return result;

    Trajectory traj(h, mode, v, cfg.integrator);
    std::vector<Eigen::VectorXd> states;
    states.reserve(points.size());
    for (double p : points) states.push_back(traj.at(p));

    for (int tr : outs) {
        WindowEstimate est;
        est.transition = tr;
        const Guard& g = h.transitions[static_cast<std::size_t>(tr)].guard;
        for (std::size_t j = 0; j < points.size(); ++j)
            if (g.eval(states[j], points[j])) est.enabledPoints.push_back(points[j]);
        result.push_back(std::move(est));
    }
    return result;
}

// ── Stepping ────────────────────────────────────────────────────────────────

StepResult randomStep(const HybridAutomaton& h, const ConcreteState& s, const SamplerConfig& cfg,
                      RngStream& rng) {
    std::vector<WindowEstimate> windows = estimateWindows(h, s.mode, s.valuation, cfg, rng);

    std::size_t total = 0;
    for (const auto& w : windows) total += w.enabledPoints.size();

    if (total == 0) {
        // Nothing enabled at any sampled point: deterministic self-stay.
        StepResult r;
        r.next.mode = s.mode;
        r.next.valuation = flow(h, s.mode, s.valuation, 1.0, cfg.integrator);
        r.jump = Jump::stay();
        return r;
    }

    // Choose a transition with probability |T_i| / sum |T_j|, then a firing
    // time uniformly from the chosen discrete set.
    std::uint64_t pick = rng.below(total);
    for (const auto& w : windows) {
        if (pick >= w.enabledPoints.size()) {
            pick -= w.enabledPoints.size();
            continue;
        }
        double fireAt = w.enabledPoints[static_cast<std::size_t>(pick)];
        StepResult r;
        r.next.mode = h.transitions[static_cast<std::size_t>(w.transition)].to;
        r.next.valuation = composeStep(h, s.mode, s.valuation, w.transition, fireAt,
                                       cfg.integrator);
        r.jump = Jump::fire(w.transition, fireAt);
        return r;
    }
    throw std::logic_error("transition choice out of range");
}

Trace sampleTrace(const HybridAutomaton& h, const SamplerConfig& cfg, RngStream& rng) {
    cfg.check();
    Trace tr;
    ConcreteState s;
    s.mode = h.initialMode;
    s.valuation.resize(static_cast<Eigen::Index>(h.varCount()));
    for (Eigen::Index i = 0; i < s.valuation.size(); ++i)
        s.valuation[i] = rng.uniform(h.initLower[i], h.initUpper[i]);
    tr.states.push_back(s);

    for (int k = 0; k < cfg.maxSteps; ++k) {
        StepResult step = randomStep(h, s, cfg, rng);
        tr.jumps.push_back(step.jump);
        tr.states.push_back(step.next);
        s = step.next;
    }
    return tr;
}

Trace sampleTrace(const HybridAutomaton& h, const SamplerConfig& cfg, std::uint64_t traceIndex) {
    RngStream rng(cfg.seed, traceIndex);
    return sampleTrace(h, cfg, rng);
}

bool isCounterexample(const HybridAutomaton& h, const Trace& tr) {
    for (const auto& s : tr.states)
        if (h.negativeModes.count(s.mode)) return true;
    return false;
}

bool traceReplaysConsistently(const HybridAutomaton& h, const Trace& tr,
                              const IntegratorConfig& cfg, double guardDelta, double stateTol) {
    if (tr.states.size() != tr.jumps.size() + 1) return false;
    if (tr.states.empty()) return false;
    if (tr.states.front().mode != h.initialMode) return false;
    for (Eigen::Index i = 0; i < tr.states.front().valuation.size(); ++i) {
        double x = tr.states.front().valuation[i];
        if (x < h.initLower[i] - stateTol || x > h.initUpper[i] + stateTol) return false;
    }

    for (std::size_t k = 0; k < tr.jumps.size(); ++k) {
        const ConcreteState& from = tr.states[k];
        const ConcreteState& to = tr.states[k + 1];
        const Jump& j = tr.jumps[k];
        Eigen::VectorXd replayed;
        if (j.isStay()) {
            if (to.mode != from.mode) return false;
            replayed = flow(h, from.mode, from.valuation, 1.0, cfg);
        } else {
            const Transition& t = h.transitions.at(static_cast<std::size_t>(j.transition));
            if (t.from != from.mode || t.to != to.mode) return false;
            if (!(j.fireTime > 0.0 && j.fireTime < 1.0)) return false;
            Eigen::VectorXd atFire = flow(h, from.mode, from.valuation, j.fireTime, cfg);
            if (!t.guard.evalWeakened(atFire, j.fireTime, guardDelta)) return false;
            replayed = composeStep(h, from.mode, from.valuation, j.transition, j.fireTime, cfg);
        }
        if ((replayed - to.valuation).cwiseAbs().maxCoeff() > stateTol) return false;
    }
    return true;
}

// ── Window refinement ───────────────────────────────────────────────────────

TimeWindowSet refineWindows(const HybridAutomaton& h, int mode, const Eigen::VectorXd& v,
                            const Guard& guard, const IntegratorConfig& cfg, int gridPoints,
                            double timeTol) {
    Trajectory traj(h, mode, v, cfg);
    auto enabledAt = [&](double t) { return guard.eval(traj.at(t), t); };

    // The boundary points 0 and 1 are excluded from the window by
    // definition; probe strictly inside.
    auto bisect = [&](double lo, double hi, bool loEnabled) {
        // invariant: enabled(lo) == loEnabled != enabled(hi)
        while (hi - lo > timeTol) {
            double mid = 0.5 * (lo + hi);
            if (enabledAt(mid) == loEnabled) lo = mid;
            else hi = mid;
        }
        return 0.5 * (lo + hi);
    };

    std::vector<std::pair<double, double>> iv;
    double cellWidth = 1.0 / gridPoints;
    bool prevEnabled = false;
    double open = 0.0;
    for (int i = 0; i <= gridPoints; ++i) {
        double t = i == 0 ? cellWidth * 1e-6
                          : (i == gridPoints ? 1.0 - cellWidth * 1e-6 : i * cellWidth);
        bool en = enabledAt(t);
        if (i == 0) {
            prevEnabled = en;
            if (en) open = 0.0;
            continue;
        }
        if (en != prevEnabled) {
            double prev = i == 1 ? cellWidth * 1e-6 : (i - 1) * cellWidth;
            double cross = bisect(prev, t, prevEnabled);
            if (en) open = cross;
            else iv.emplace_back(open, cross);
            prevEnabled = en;
        }
    }
    if (prevEnabled) iv.emplace_back(open, 1.0);
    return TimeWindowSet::fromIntervals(std::move(iv), TimeWindowSet::Provenance::Refined);
}

}  // namespace hyc
