#include "hyc/bench.hpp"

#include <iomanip>
#include <ostream>

#include "hyc/modelio.hpp"

namespace hyc {

std::vector<BenchEntry> benchSuite(const std::string& suiteName) {
    if (suiteName != "paper-small")
        throw std::invalid_argument("unknown suite `" + suiteName + "` (available: paper-small)");
    std::vector<BenchEntry> suite;
    suite.push_back({"oscillator.json", 5, 64, 1e-3, 20.0, 500, 0.012});
    suite.push_back({"bouncing-ball.json", 5, 64, 1e-3, 20.0, 500, 0.005});
    suite.push_back({"sewerage.json", 2, 8, 1e-4, 30.0, 500, 0.006});
    suite.push_back({"room-heating-2x1.json", 5, 64, 1e-3, 20.0, 500, 0.005});
    suite.push_back({"navigation-3x3.json", 6, 64, 1e-3, 20.0, 500, 0.005});
    return suite;
}

std::vector<BenchCell> runBench(const std::string& suiteName, const std::string& modelsDir,
                                std::uint64_t seed, std::ostream* progress) {
    std::vector<BenchCell> cells;
    for (const BenchEntry& entry : benchSuite(suiteName)) {
        HybridAutomaton h = loadModel(modelsDir + "/" + entry.model);
        for (StrategyMode mode : {StrategyMode::RandomOnly, StrategyMode::Dynamic,
                                  StrategyMode::Global, StrategyMode::Local}) {
            SamplerConfig scfg;
            scfg.timePoints = entry.points;
            scfg.maxSteps = entry.steps;
            scfg.integrator.step = entry.odeStep;
            SolverConfig solver;
            StrategyConfig strat;
            strat.mode = mode;
            strat.timeoutSeconds = entry.timeout;
            strat.maxSamples = entry.maxSamples;
            strat.fixedTraceCost = entry.fixedTraceCost;
            if (progress)
                *progress << "bench: " << entry.model << " / " << strategyName(mode) << "...\n";
            RunReport rep = runConcolic(h, scfg, solver, strat, seed);
            BenchCell cell;
            cell.model = h.name.empty() ? entry.model : h.name;
            cell.strategy = strategyName(mode);
            cell.verdict = runOutcomeName(rep.outcome);
            cell.seconds = rep.totalSeconds;
            cell.samples = rep.tracesSampled;
            cell.solverCalls = rep.solverCalls;
            cells.push_back(cell);
        }
    }
    return cells;
}

void printBenchTable(std::ostream& os, const std::vector<BenchCell>& cells) {
    os << std::left << std::setw(22) << "model" << std::setw(10) << "strategy" << std::setw(22)
       << "verdict" << std::right << std::setw(10) << "time(s)" << std::setw(10) << "#samples"
       << std::setw(10) << "#solves" << '\n';
    os << std::string(84, '-') << '\n';
    for (const auto& c : cells) {
        os << std::left << std::setw(22) << c.model << std::setw(10) << c.strategy << std::setw(22)
           << c.verdict << std::right << std::setw(10) << std::fixed << std::setprecision(2)
           << c.seconds << std::setw(10) << c.samples << std::setw(10) << c.solverCalls << '\n';
    }
}

}  // namespace hyc
