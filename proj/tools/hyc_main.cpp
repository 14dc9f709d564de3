// hyc — falsification engine for hybrid automata.
//
// Subcommands:
//   check     probability-guided random simulation interleaved with symbolic
//             one-step/path solving; writes a JSON run report
//   simulate  seeded random traces dumped as CSV, one row per ODE grid point
//   bench     the bundled model suite under all four strategies

#include <cstdlib>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"

#include "hyc/bench.hpp"
#include "hyc/modelio.hpp"

namespace {

struct CommonFlags {
    std::uint64_t seed = 0;
    bool seedSet = false;
    int points = 64;
    int steps = 10;
    double odeStep = 1e-3;

    void add(CLI::App* cmd) {
        cmd->add_option("--seed,-s", seed, "RNG seed (env HYC_SEED is the fallback)")
            ->each([this](const std::string&) { seedSet = true; });
        cmd->add_option("--points,-J", points, "time points sampled per unit step")
            ->check(CLI::PositiveNumber);
        cmd->add_option("--steps,-K", steps, "trace bound in unit steps")
            ->check(CLI::PositiveNumber);
        cmd->add_option("--ode-step", odeStep, "RK4 step (1/step must be an integer)")
            ->check(CLI::PositiveNumber);
    }

    std::uint64_t resolveSeed() const {
        if (seedSet) return seed;
        if (const char* env = std::getenv("HYC_SEED")) return std::strtoull(env, nullptr, 10);
        return 0;
    }
};

int failUsage(const std::string& msg) {
    std::cerr << "error: " << msg << '\n';
    return 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"hyc: falsification for hybrid automata with confidence reporting"};
    app.require_subcommand(1);

    // ── check ──
    auto* check = app.add_subcommand("check", "search for a counterexample trace");
    std::string checkModel, checkOut, strategyName = "local", externalSolver;
    CommonFlags checkFlags;
    double timeout = 60.0, delta = 0.1, confidenceTarget = 0.99;
    double solverPrecision = 1e-3, solverBudget = 10.0, fixedTraceCost = 0.0;
    long maxSamples = 0;
    int batch = 16, jobs = 1;
    check->add_option("model", checkModel, "model file (JSON)")->required();
    checkFlags.add(check);
    check->add_option("--strategy", strategyName, "random | local | global | dynamic");
    check->add_option("--samples,-n", maxSamples, "max sampled traces (0 = timeout-bound)");
    check->add_option("--timeout", timeout, "wall-clock budget in seconds");
    check->add_option("--batch", batch, "traces per batch between decisions");
    check->add_option("--jobs", jobs, "parallel sampling workers")->check(CLI::PositiveNumber);
    check->add_option("--delta", delta, "error-probability tolerance for the confidence report");
    check->add_option("--confidence-target", confidenceTarget, "pass threshold for confidence");
    check->add_option("--solver-precision", solverPrecision, "delta-decision weakening slack");
    check->add_option("--solver-budget", solverBudget, "per-query solver budget in seconds");
    check->add_option("--fixed-trace-cost", fixedTraceCost,
                      "pin c_t in seconds instead of measuring (reproducible decisions)");
    check->add_option("--external-solver", externalSolver,
                      "external solver command (reads a query JSON on stdin)");
    check->add_option("--out,-o", checkOut, "report file path (default: stdout)");

    // ── simulate ──
    auto* simulate = app.add_subcommand("simulate", "dump seeded random traces as CSV");
    std::string simModel, simOut;
    CommonFlags simFlags;
    long simTraces = 1;
    simulate->add_option("model", simModel, "model file (JSON)")->required();
    simFlags.add(simulate);
    simulate->add_option("--traces,-n", simTraces, "number of traces")->check(CLI::PositiveNumber);
    simulate->add_option("--out,-o", simOut, "CSV path (default: stdout)");

    // ── bench ──
    auto* bench = app.add_subcommand("bench", "run the bundled benchmark suite");
    std::string suiteName = "paper-small", benchModels = "models", benchOut;
    std::uint64_t benchSeed = 1;
    bench->add_option("suite", suiteName, "suite name (paper-small)");
    bench->add_option("--models-dir", benchModels, "directory with the bundled models");
    bench->add_option("--seed", benchSeed, "base seed");
    bench->add_option("--out,-o", benchOut, "also write the table to a file");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*check) {
            auto mode = hyc::strategyFromName(strategyName);
            if (!mode) return failUsage("unknown strategy `" + strategyName + "`");

            hyc::HybridAutomaton h = hyc::loadModel(checkModel);
            hyc::SamplerConfig scfg;
            scfg.timePoints = checkFlags.points;
            scfg.maxSteps = checkFlags.steps;
            scfg.integrator.step = checkFlags.odeStep;
            hyc::SolverConfig solver;
            solver.precision = solverPrecision;
            solver.budgetSeconds = solverBudget;
            solver.externalCommand = externalSolver;
            hyc::StrategyConfig strat;
            strat.mode = *mode;
            strat.timeoutSeconds = timeout;
            strat.maxSamples = maxSamples;
            strat.batchSize = batch;
            strat.jobs = jobs;
            strat.delta = delta;
            strat.confidenceTarget = confidenceTarget;
            strat.fixedTraceCost = fixedTraceCost;
            std::uint64_t seed = checkFlags.resolveSeed();

            hyc::RunReport rep = hyc::runConcolic(h, scfg, solver, strat, seed);

            hyc::ReportContext ctx;
            ctx.modelName = h.name;
            ctx.modelPath = checkModel;
            ctx.seed = seed;
            ctx.sampler = scfg;
            ctx.solver = solver;
            ctx.strategy = strat;
            std::string json = hyc::reportToJson(rep, h, ctx);
            if (checkOut.empty()) {
                std::cout << json << '\n';
            } else {
                std::ofstream out(checkOut);
                if (!out) return failUsage("cannot write report to " + checkOut);
                out << json << '\n';
                std::cerr << hyc::runOutcomeName(rep.outcome) << " (report: " << checkOut << ")\n";
            }
            switch (rep.outcome) {
                case hyc::RunOutcome::Pass: return 0;
                case hyc::RunOutcome::Counterexample: return 2;
                default: return 3;
            }
        }

        if (*simulate) {
            hyc::HybridAutomaton h = hyc::loadModel(simModel);
            hyc::SamplerConfig scfg;
            scfg.timePoints = simFlags.points;
            scfg.maxSteps = simFlags.steps;
            scfg.integrator.step = simFlags.odeStep;
            scfg.seed = simFlags.resolveSeed();
            std::ofstream file;
            std::ostream* os = &std::cout;
            if (!simOut.empty()) {
                file.open(simOut);
                if (!file) return failUsage("cannot write CSV to " + simOut);
                os = &file;
            }
            for (long i = 0; i < simTraces; ++i) {
                hyc::Trace tr = hyc::sampleTrace(h, scfg, static_cast<std::uint64_t>(i));
                hyc::writeTraceCsv(*os, h, tr, scfg.integrator, static_cast<int>(i), i == 0);
            }
            return 0;
        }

        if (*bench) {
            std::vector<hyc::BenchCell> cells =
                hyc::runBench(suiteName, benchModels, benchSeed, &std::cerr);
            hyc::printBenchTable(std::cout, cells);
            if (!benchOut.empty()) {
                std::ofstream out(benchOut);
                if (!out) return failUsage("cannot write table to " + benchOut);
                hyc::printBenchTable(out, cells);
            }
            return 0;
        }
    } catch (const hyc::ModelFormatError& e) {
        return failUsage(e.what());
    } catch (const hyc::ModelError& e) {
        return failUsage(e.what());
    } catch (const std::exception& e) {
        return failUsage(e.what());
    }
    return 1;
}
