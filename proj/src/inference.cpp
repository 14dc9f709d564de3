#include "hyc/inference.hpp"

#include <cmath>

#include "hyc/sampler.hpp"

namespace hyc {

// ── Gauss–Kronrod (G7,K15) ──────────────────────────────────────────────────

namespace {

// Nodes/weights on [-1,1]; the Gauss weights pair with every second Kronrod
// node. Values from the standard QUADPACK tables.
constexpr double kKronrodNodes[8] = {
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
};
constexpr double kKronrodWeights[8] = {
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
};
constexpr double kGaussWeights[4] = {
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
};

struct Panel {
    double lo, hi, integral, error;
};

Panel evalPanel(const std::function<double(double)>& f, double lo, double hi) {
    double c = 0.5 * (lo + hi);
    double half = 0.5 * (hi - lo);
    double kron = 0.0, gauss = 0.0;
    for (int i = 0; i < 8; ++i) {
        double x = kKronrodNodes[i];
        double v = (i == 7) ? f(c) : f(c - half * x) + f(c + half * x);
        kron += kKronrodWeights[i] * v;
        if (i % 2 == 1) gauss += kGaussWeights[i / 2] * v;
    }
    kron *= half;
    gauss *= half;
    // The plain |K15 - G7| difference is a conservative error estimate; the
    // integrands here are cheap, so the extra subdivisions it causes are
    // preferable to an optimistic scaled estimate.
    double err = std::abs(kron - gauss);
    return {lo, hi, kron, std::max(err, std::abs(kron) * 1e-16)};
}

}  // namespace

double integrate(const std::function<double(double)>& f, double lo, double hi, double absTol,
                 double relTol) {
    if (!(hi > lo)) return 0.0;
    std::vector<Panel> panels{evalPanel(f, lo, hi)};
    for (int round = 0; round < 2000; ++round) {
        double total = 0.0, err = 0.0;
        std::size_t worst = 0;
        for (std::size_t i = 0; i < panels.size(); ++i) {
            total += panels[i].integral;
            err += panels[i].error;
            if (panels[i].error > panels[worst].error) worst = i;
        }
        if (err <= std::max(absTol, relTol * std::abs(total))) return total;
        Panel p = panels[worst];
        double mid = 0.5 * (p.lo + p.hi);
        if (mid <= p.lo || mid >= p.hi) return total;  // cannot split further
        panels[worst] = evalPanel(f, p.lo, mid);
        panels.push_back(evalPanel(f, mid, p.hi));
    }
    double total = 0.0;
    for (const auto& p : panels) total += p.integral;
    return total;
}

// ── Posterior and confidence ────────────────────────────────────────────────

namespace {

std::function<double(double)> posteriorKernel(const SampleTally& tally, double alpha) {
    double am = alpha * static_cast<double>(tally.negatives);
    double n = static_cast<double>(tally.positives);
    return [am, n, alpha](double theta) {
        if (theta <= 0.0) return am == 0.0 ? 1.0 : 0.0;
        if (theta >= 1.0) return n == 0.0 ? 1.0 : 0.0;
        double base = 1.0 - std::pow(theta, alpha);
        if (base <= 0.0) return 0.0;
        return std::pow(theta, am) * std::pow(base, n);
    };
}

}  // namespace

std::function<double(double)> posteriorDensity(const SampleTally& tally, Effectiveness eff) {
    eff.check();
    auto kernel = posteriorKernel(tally, eff.alpha);
    double normalizer = integrate(kernel, 0.0, 1.0);
    return [kernel, normalizer](double theta) { return kernel(theta) / normalizer; };
}

double confidence(const SampleTally& tally, double delta, Effectiveness eff) {
    eff.check();
    if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("delta must lie in (0,1)");
    auto kernel = posteriorKernel(tally, eff.alpha);
    double head = integrate(kernel, 0.0, delta);
    double tail = integrate(kernel, delta, 1.0);
    return head / (head + tail);
}

long requiredSamples(double delta, double targetConfidence, Effectiveness eff) {
    if (!(targetConfidence > 0.0 && targetConfidence < 1.0))
        throw std::invalid_argument("target confidence must lie in (0,1)");
    // c((n,0), δ, α) is nondecreasing in n and converges to 1, so a linear
    // scan terminates.
    for (long n = 0;; ++n) {
        if (confidence({n, 0}, delta, eff) >= targetConfidence - 1e-12) return n;
        if (n > 2000000) throw std::runtime_error("required sample search did not converge");
    }
}

ConfidenceReport makeConfidenceReport(const SampleTally& tally, double delta, Effectiveness eff,
                                      double targetConfidence, bool counterexampleFound) {
    ConfidenceReport rep;
    rep.tally = tally;
    rep.delta = delta;
    rep.alpha = eff.alpha;
    rep.confidence = confidence(tally, delta, eff);
    if (counterexampleFound || tally.negatives > 0) rep.verdict = Verdict::Fail;
    else if (rep.confidence >= targetConfidence) rep.verdict = Verdict::Pass;
    else rep.verdict = Verdict::Inconclusive;
    return rep;
}

const char* verdictName(Verdict v) {
    switch (v) {
        case Verdict::Pass: return "pass";
        case Verdict::Fail: return "fail";
        default: return "inconclusive";
    }
}

// ── Exact transition probabilities ──────────────────────────────────────────

namespace {

// Ratio ||T_i(v)|| / sum_j ||T_j(v)|| for one concrete start.
std::vector<double> windowRatiosAt(const HybridAutomaton& h, int mode,
                                   const std::vector<int>& transitions, const Eigen::VectorXd& v,
                                   const IntegratorConfig& cfg) {
    std::vector<double> measures;
    measures.reserve(transitions.size());
    double total = 0.0;
    for (int tr : transitions) {
        TimeWindowSet w = refineWindows(h, mode, v, h.transitions[static_cast<std::size_t>(tr)].guard,
                                        cfg, 8192, 1e-13);
        measures.push_back(w.measure);
        total += w.measure;
    }
    if (total > 0.0)
        for (double& x : measures) x /= total;
    return measures;
}

// 20-point Gauss–Legendre nodes/weights on [-1,1] (positive half).
constexpr double kGL20Nodes[10] = {
    0.076526521133497333754640409398838, 0.227785851141645078080496195368575,
    0.373706088715419560672548177024927, 0.510867001950827098004364050955251,
    0.636053680726515025452836696226286, 0.746331906460150792614305070355642,
    0.839116971822218823394529061701521, 0.912234428251325905867752441203298,
    0.963971927277913791267666131197277, 0.993128599185094924786122388471320,
};
constexpr double kGL20Weights[10] = {
    0.152753387130725850698084331955098, 0.149172986472603746787828737001969,
    0.142096109318382051329298325067165, 0.131688638449176626898494499748163,
    0.118194531961518417312377377711382, 0.101930119817240435036750135480350,
    0.083276741576704748724758143222046, 0.062672048334109063569506535187042,
    0.040601429800386941331039952274932, 0.017614007139152118311861962351853,
};

}  // namespace

std::vector<double> exactTransitionProbability(const HybridAutomaton& h, int mode,
                                               const std::vector<int>& transitions,
                                               const Eigen::VectorXd& boxLower,
                                               const Eigen::VectorXd& boxUpper,
                                               const IntegratorConfig& cfg) {
    if (h.varCount() > 2)
        throw OracleScopeError("exact transition probabilities are limited to <= 2 variables");
    if (transitions.empty()) return {};

    // Collect the non-degenerate box dimensions.
    std::vector<Eigen::Index> freeDims;
    for (Eigen::Index i = 0; i < boxLower.size(); ++i)
        if (boxUpper[i] > boxLower[i]) freeDims.push_back(i);

    std::vector<double> acc(transitions.size(), 0.0);
    if (freeDims.empty()) {
        return windowRatiosAt(h, mode, transitions, boxLower, cfg);
    }

    // Tensor Gauss–Legendre over the box; the ratio integrand is bounded and
    // piecewise smooth, 20 points per axis land well below the 1e-4 budget.
    auto axisNodes = [&](Eigen::Index dim) {
        std::vector<std::pair<double, double>> nw;  // (point, weight) on [lo,hi], weight sums to 1
        double lo = boxLower[dim], hi = boxUpper[dim];
        double c = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
        for (int i = 0; i < 10; ++i) {
            nw.emplace_back(c - half * kGL20Nodes[i], 0.5 * kGL20Weights[i]);
            nw.emplace_back(c + half * kGL20Nodes[i], 0.5 * kGL20Weights[i]);
        }
        return nw;
    };

    Eigen::VectorXd v = boxLower;
    if (freeDims.size() == 1) {
        for (const auto& [x, wgt] : axisNodes(freeDims[0])) {
            v[freeDims[0]] = x;
            std::vector<double> r = windowRatiosAt(h, mode, transitions, v, cfg);
            for (std::size_t i = 0; i < r.size(); ++i) acc[i] += wgt * r[i];
        }
        return acc;
    }

    for (const auto& [x0, w0] : axisNodes(freeDims[0])) {
        for (const auto& [x1, w1] : axisNodes(freeDims[1])) {
            v[freeDims[0]] = x0;
            v[freeDims[1]] = x1;
            std::vector<double> r = windowRatiosAt(h, mode, transitions, v, cfg);
            for (std::size_t i = 0; i < r.size(); ++i) acc[i] += w0 * w1 * r[i];
        }
    }
    return acc;
}

}  // namespace hyc
