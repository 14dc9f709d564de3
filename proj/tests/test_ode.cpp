#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "hyc/ode.hpp"
#include "hyc/rng.hpp"
#include "testutil.hpp"

using namespace hyc;

namespace {

HybridAutomaton twoVarModel(const std::string& dx, const std::string& dv) {
    HybridAutomaton h;
    h.variables = {"x", "v"};
    h.initLower = Eigen::VectorXd::Zero(2);
    h.initUpper = Eigen::VectorXd::Zero(2);
    Mode m;
    m.name = "m";
    m.rhs.push_back(parseExpr(dx, h.variables));
    m.rhs.push_back(parseExpr(dv, h.variables));
    h.modes.push_back(std::move(m));
    h.initialMode = 0;
    return h;
}

// Underdamped closed form for x'' + x' + 4*pi^2 x = 0 from (0, v0):
// x(t) = (v0 / wd) e^{-t/2} sin(wd t), wd = sqrt(4 pi^2 - 1/4).
double oscX(double v0, double t) {
    double wd = std::sqrt(4.0 * M_PI * M_PI - 0.25);
    return v0 / wd * std::exp(-t / 2.0) * std::sin(wd * t);
}
double oscV(double v0, double t) {
    double wd = std::sqrt(4.0 * M_PI * M_PI - 0.25);
    return v0 / wd * std::exp(-t / 2.0) * (wd * std::cos(wd * t) - 0.5 * std::sin(wd * t));
}

}  // namespace

TEST_CASE("constant dynamics keep the state put") {
    HybridAutomaton h = hyctest::lineModel("0", {});
    IntegratorConfig cfg;
    Eigen::VectorXd v(1);
    v << 3.25;
    for (double t : {0.0, 0.125, 0.5, 1.0})
        CHECK(flow(h, 0, v, t, cfg)[0] == 3.25);
}

TEST_CASE("falling-ball step matches the closed form to 1e-6") {
    // dv/dt = g, dx/dt = -v from (x, v) = (10, 0):
    // x(t) = 10 - 4.9 t^2, v(t) = 9.8 t.
    HybridAutomaton h = twoVarModel("-v", "9.8");
    IntegratorConfig cfg;
    Eigen::VectorXd start(2);
    start << 10.0, 0.0;
    Eigen::VectorXd end = flow(h, 0, start, 1.0, cfg);
    CHECK(end[0] == doctest::Approx(5.1).epsilon(1e-9));
    CHECK(end[1] == doctest::Approx(9.8).epsilon(1e-9));
    CHECK(std::abs(end[0] - 5.1) < 1e-6);
    CHECK(std::abs(end[1] - 9.8) < 1e-6);
}

TEST_CASE("oscillator flow tracks the analytic solution") {
    HybridAutomaton h = twoVarModel("v", "-v - 39.478417604357434*x");
    IntegratorConfig cfg;
    Eigen::VectorXd start(2);
    start << 0.0, 2.0 * M_PI;
    Eigen::VectorXd got = flow(h, 0, start, 0.25, cfg);
    CHECK(std::abs(got[0] - oscX(2.0 * M_PI, 0.25)) < 1e-4);
    CHECK(std::abs(got[1] - oscV(2.0 * M_PI, 0.25)) < 1e-4);
}

TEST_CASE("flow at t = 0 returns the start bit-exactly") {
    HybridAutomaton h = twoVarModel("v", "-x");
    IntegratorConfig cfg;
    Eigen::VectorXd start(2);
    start << 0.1234567890123456, -7.654321;
    Eigen::VectorXd got = flow(h, 0, start, 0.0, cfg);
    CHECK(got[0] == start[0]);
    CHECK(got[1] == start[1]);
}

TEST_CASE("semigroup property on random linear systems") {
    RngStream rng(11, 0);
    IntegratorConfig cfg;
    cfg.step = 0.01;
    double tol = 10.0 * std::pow(cfg.step, 4);
    for (int trial = 0; trial < 100; ++trial) {
        double a = rng.uniform(-1, 1), b = rng.uniform(-1, 1);
        double c = rng.uniform(-1, 1), d = rng.uniform(-1, 1);
        HybridAutomaton h = twoVarModel(std::to_string(a) + "*x + " + std::to_string(b) + "*v",
                                        std::to_string(c) + "*x + " + std::to_string(d) + "*v");
        Eigen::VectorXd v(2);
        v << rng.uniform(-1, 1), rng.uniform(-1, 1);
        double s = rng.uniform(0.05, 0.9);
        double u = rng.uniform(0.05, 1.0 - s);
        Eigen::VectorXd direct = flow(h, 0, v, s + u, cfg);
        Eigen::VectorXd chained = flow(h, 0, flow(h, 0, v, s, cfg), u, cfg);
        CHECK((direct - chained).cwiseAbs().maxCoeff() < tol);
    }
}

TEST_CASE("halving the step improves accuracy by at least 12x") {
    HybridAutomaton h = twoVarModel("v", "-v - 39.478417604357434*x");
    Eigen::VectorXd start(2);
    start << 0.0, 2.0 * M_PI;
    auto maxErr = [&](double step) {
        IntegratorConfig cfg;
        cfg.step = step;
        Trajectory traj(h, 0, start, cfg);
        double worst = 0.0;
        for (int k = 1; k <= 100; ++k) {
            double t = 0.01 * k;
            worst = std::max(worst, std::abs(traj.at(t)[0] - oscX(2.0 * M_PI, t)));
        }
        return worst;
    };
    double coarse = maxErr(0.01);
    double fine = maxErr(0.005);
    CHECK(coarse / fine >= 12.0);
}

TEST_CASE("compose freezes after a linear flow") {
    // run: dx/dt = 1; sink: dx/dt = 0. Fire at t = 0.3: 0.3 + 0*0.7.
    HybridAutomaton h = hyctest::lineModel("1", {{"x > 0", "sink"}});
    IntegratorConfig cfg;
    Eigen::VectorXd v = Eigen::VectorXd::Zero(1);
    Eigen::VectorXd end = composeStep(h, 0, v, 0, 0.3, cfg);
    CHECK(end[0] == doctest::Approx(0.3).epsilon(1e-12));
}

TEST_CASE("compose chains both segments") {
    // run: dx/dt = 1; sink: dx/dt = 2. Fire at 0.3: 0.3 + 2*0.7 = 1.7.
    HybridAutomaton h = hyctest::lineModel("1", {{"x > 0", "sink"}});
    h.modes[1].rhs[0] = parseExpr("2", h.variables);
    IntegratorConfig cfg;
    Eigen::VectorXd v = Eigen::VectorXd::Zero(1);
    Eigen::VectorXd end = composeStep(h, 0, v, 0, 0.3, cfg);
    CHECK(end[0] == doctest::Approx(1.7).epsilon(1e-12));
}

TEST_CASE("firing times must lie strictly inside the unit interval") {
    HybridAutomaton h = hyctest::lineModel("1", {{"x > 0", "sink"}});
    IntegratorConfig cfg;
    Eigen::VectorXd v = Eigen::VectorXd::Zero(1);
    CHECK_THROWS_AS(composeStep(h, 0, v, 0, 0.0, cfg), std::invalid_argument);
    CHECK_THROWS_AS(composeStep(h, 0, v, 0, 1.0, cfg), std::invalid_argument);
}

TEST_CASE("divergence is an error naming the step") {
    HybridAutomaton h = hyctest::lineModel("x*x", {});
    IntegratorConfig cfg;
    Eigen::VectorXd v(1);
    v << 20.0;  // 1/x blowup at t = 0.05
    CHECK_THROWS_AS(flow(h, 0, v, 1.0, cfg), DivergenceError);
}

TEST_CASE("integrator config validation") {
    IntegratorConfig cfg;
    cfg.step = 0.3;
    CHECK_THROWS_AS(cfg.check(), std::invalid_argument);
    cfg.step = 0.0007;  // 1/h not an integer
    CHECK_THROWS_AS(cfg.check(), std::invalid_argument);
    cfg.step = 0.001;
    CHECK_NOTHROW(cfg.check());
    CHECK(cfg.stepsPerUnit() == 1000);
}
