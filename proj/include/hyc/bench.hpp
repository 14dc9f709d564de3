#ifndef HYC_BENCH_HPP
#define HYC_BENCH_HPP

#include <iosfwd>
#include <string>
#include <vector>

#include "hyc/strategy.hpp"

namespace hyc {

// ── Benchmark suite ─────────────────────────────────────────────────────────
//
// Runs every bundled model under all four strategies with fixed seeds and
// per-model step bounds, then prints a comparison table:
// verdict / time(s) / #samples / #solver-calls per cell. Decision-relevant
// costs are pinned so the #samples columns reproduce across machines.

struct BenchEntry {
    std::string model;      // file name under the models directory
    int steps = 5;          // K
    int points = 64;        // J
    double odeStep = 1e-3;
    double timeout = 30.0;
    long maxSamples = 2000;
    double fixedTraceCost = 0.005;
};

struct BenchCell {
    std::string model;
    std::string strategy;
    std::string verdict;
    double seconds = 0.0;
    long samples = 0;
    long solverCalls = 0;
};

std::vector<BenchEntry> benchSuite(const std::string& suiteName);  // "paper-small"

std::vector<BenchCell> runBench(const std::string& suiteName, const std::string& modelsDir,
                                std::uint64_t seed, std::ostream* progress);

void printBenchTable(std::ostream& os, const std::vector<BenchCell>& cells);

}  // namespace hyc

#endif  // HYC_BENCH_HPP
