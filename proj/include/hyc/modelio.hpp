#ifndef HYC_MODELIO_HPP
#define HYC_MODELIO_HPP

#include <iosfwd>
#include <string>

#include "hyc/automaton.hpp"
#include "hyc/strategy.hpp"

namespace hyc {

inline constexpr const char* kToolVersion = "0.1.0";
inline constexpr int kReportSchemaVersion = 1;

// ── Model files ─────────────────────────────────────────────────────────────
//
// JSON with exactly these keys (unknown keys are rejected):
//   variables      : ["x", ...]
//   init           : { var: [lo, hi], ... }       (point boxes via lo == hi)
//   initial_mode   : "name"
//   modes          : { name: { var: "rhs expr", ... }, ... }
//   transitions    : [ { "from": a, "guard": "expr cmp expr ...", "to": b } ]
//   negative_modes : ["name", ...]
//   parameters     : { name: number, ... }        (optional constants)
//   name, notes    : free-text strings (optional)

class ModelFormatError : public std::runtime_error {
public:
    explicit ModelFormatError(const std::string& what) : std::runtime_error(what) {}
};

HybridAutomaton loadModel(const std::string& path);
HybridAutomaton parseModel(const std::string& jsonText, const std::string& origin = "<string>");

// ── Report files ────────────────────────────────────────────────────────────

struct ReportContext {
    std::string modelName;
    std::string modelPath;
    std::uint64_t seed = 0;
    SamplerConfig sampler;
    SolverConfig solver;
    StrategyConfig strategy;
};

std::string reportToJson(const RunReport& rep, const HybridAutomaton& h,
                         const ReportContext& ctx);

// Round-trips reportToJson output; throws on schema mismatch.
RunReport reportFromJson(const std::string& jsonText, std::string* modelName = nullptr);

// Strips the fields that legitimately differ between reruns (wall-clock
// timings); what remains must be byte-identical for identical (model, flags,
// seed) runs.
std::string reportStableSubset(const std::string& reportJson);

// ── Trace CSV ───────────────────────────────────────────────────────────────
//
// One row per ODE grid point: trace index, step, mode, global time, then a
// column per state variable. The initial state contributes one extra row.
void writeTraceCsv(std::ostream& os, const HybridAutomaton& h, const Trace& tr,
                   const IntegratorConfig& cfg, int traceIndex, bool header);

}  // namespace hyc

#endif  // HYC_MODELIO_HPP
