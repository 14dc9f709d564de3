#include "hyc/modelio.hpp"

#include <algorithm>
#include <fstream>
#include <memory>
#include <ostream>
#include <sstream>

#include "json.hpp"

#include "hyc/ode.hpp"

namespace hyc {

using nlohmann::json;

// ── Model loading ───────────────────────────────────────────────────────────

namespace {

[[noreturn]] void formatFail(const std::string& origin, const std::string& what) {
    throw ModelFormatError(origin + ": " + what);
}

}  // namespace

HybridAutomaton parseModel(const std::string& jsonText, const std::string& origin) {
    json doc;
    try {
        doc = json::parse(jsonText);
    } catch (const json::parse_error& e) {
        formatFail(origin, std::string("not valid JSON: ") + e.what());
    }
    if (!doc.is_object()) formatFail(origin, "top level must be an object");

    static const std::set<std::string> known{"variables", "init",           "initial_mode",
                                             "modes",     "transitions",    "negative_modes",
                                             "parameters", "name",          "notes"};
    for (const auto& [key, value] : doc.items()) {
        (void)value;
        if (!known.count(key)) formatFail(origin, "unknown key `" + key + "`");
    }
    for (const char* required : {"variables", "init", "initial_mode", "modes", "transitions",
                                 "negative_modes"})
        if (!doc.contains(required)) formatFail(origin, std::string("missing key `") + required + "`");

    HybridAutomaton h;
    h.name = doc.value("name", "");

    try {
        h.variables = doc.at("variables").get<std::vector<std::string>>();
    } catch (const json::exception&) {
        formatFail(origin, "`variables` must be an array of strings");
    }
    for (const auto& v : h.variables)
        if (v == "t") formatFail(origin, "`t` is reserved for the time symbol");

    std::vector<std::pair<std::string, double>> params;
    if (doc.contains("parameters")) {
        if (!doc["parameters"].is_object()) formatFail(origin, "`parameters` must be an object");
        for (const auto& [key, value] : doc["parameters"].items()) {
            if (!value.is_number()) formatFail(origin, "parameter `" + key + "` must be a number");
            params.emplace_back(key, value.get<double>());
        }
    }

    const json& init = doc.at("init");
    if (!init.is_object()) formatFail(origin, "`init` must be an object of [lo,hi] pairs");
    h.initLower.resize(static_cast<Eigen::Index>(h.variables.size()));
    h.initUpper.resize(static_cast<Eigen::Index>(h.variables.size()));
    for (std::size_t i = 0; i < h.variables.size(); ++i) {
        if (!init.contains(h.variables[i]))
            formatFail(origin, "`init` misses variable `" + h.variables[i] + "`");
        const json& box = init.at(h.variables[i]);
        if (!box.is_array() || box.size() != 2 || !box[0].is_number() || !box[1].is_number())
            formatFail(origin, "`init." + h.variables[i] + "` must be [lo, hi]");
        h.initLower[static_cast<Eigen::Index>(i)] = box[0].get<double>();
        h.initUpper[static_cast<Eigen::Index>(i)] = box[1].get<double>();
    }
    for (const auto& [key, value] : init.items()) {
        (void)value;
        bool knownVar = false;
        for (const auto& v : h.variables) knownVar |= v == key;
        if (!knownVar) formatFail(origin, "`init` names unknown variable `" + key + "`");
    }

    const json& modes = doc.at("modes");
    if (!modes.is_object() || modes.empty()) formatFail(origin, "`modes` must be a non-empty object");
    for (const auto& [modeName, rhsMap] : modes.items()) {
        Mode m;
        m.name = modeName;
        if (!rhsMap.is_object())
            formatFail(origin, "mode `" + modeName + "` must map variables to ODE strings");
        for (const auto& [key, value] : rhsMap.items()) {
            (void)value;
            bool knownVar = false;
            for (const auto& v : h.variables) knownVar |= v == key;
            if (!knownVar)
                formatFail(origin, "mode `" + modeName + "` names unknown variable `" + key + "`");
        }
        for (const auto& v : h.variables) {
            if (!rhsMap.contains(v))
                formatFail(origin, "mode `" + modeName + "` misses the ODE for `" + v + "`");
            if (!rhsMap.at(v).is_string())
                formatFail(origin, "mode `" + modeName + "`, variable `" + v + "`: ODE must be a string");
            try {
                m.rhs.push_back(parseExpr(rhsMap.at(v).get<std::string>(), h.variables, params));
            } catch (const ParseError& e) {
                formatFail(origin, "mode `" + modeName + "`, ODE for `" + v + "`: " + e.what());
            }
        }
        h.modes.push_back(std::move(m));
    }

    std::string initialMode;
    if (!doc.at("initial_mode").is_string()) formatFail(origin, "`initial_mode` must be a string");
    initialMode = doc.at("initial_mode").get<std::string>();
    h.initialMode = h.modeIndex(initialMode);
    if (h.initialMode < 0) formatFail(origin, "initial mode `" + initialMode + "` is not declared");

    const json& transitions = doc.at("transitions");
    if (!transitions.is_array()) formatFail(origin, "`transitions` must be an array");
    for (std::size_t i = 0; i < transitions.size(); ++i) {
        const json& t = transitions[i];
        std::string where = "transitions[" + std::to_string(i) + "]";
        if (!t.is_object() || !t.contains("from") || !t.contains("to") || !t.contains("guard"))
            formatFail(origin, where + " must have `from`, `guard`, `to`");
        for (const auto& [key, value] : t.items()) {
            (void)value;
            if (key != "from" && key != "to" && key != "guard")
                formatFail(origin, where + ": unknown key `" + key + "`");
        }
        Transition tr;
        tr.from = h.modeIndex(t.at("from").get<std::string>());
        tr.to = h.modeIndex(t.at("to").get<std::string>());
        if (tr.from < 0) formatFail(origin, where + ".from: undeclared mode");
        if (tr.to < 0) formatFail(origin, where + ".to: undeclared mode");
        tr.guardText = t.at("guard").get<std::string>();
        try {
            tr.guard = parseGuard(tr.guardText, h.variables, params);
        } catch (const ParseError& e) {
            formatFail(origin, where + ".guard: " + std::string(e.what()));
        }
        h.transitions.push_back(std::move(tr));
    }

    const json& negatives = doc.at("negative_modes");
    if (!negatives.is_array()) formatFail(origin, "`negative_modes` must be an array");
    for (const auto& n : negatives) {
        int idx = h.modeIndex(n.get<std::string>());
        if (idx < 0) formatFail(origin, "negative mode `" + n.get<std::string>() + "` is not declared");
        h.negativeModes.insert(idx);
    }

    std::vector<Diagnostic> diags = validate(h);
    if (!diags.empty()) {
        std::string msg = "invalid model:";
        for (const auto& d : diags) msg += "\n  " + d.location + ": " + d.message;
        formatFail(origin, msg);
    }
    return h;
}

HybridAutomaton loadModel(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ModelFormatError(path + ": cannot open file");
    std::stringstream buf;
    buf << in.rdbuf();
    return parseModel(buf.str(), path);
}

// ── Reports ─────────────────────────────────────────────────────────────────

namespace {

json traceToJson(const Trace& tr, const HybridAutomaton& h) {
    json states = json::array();
    for (const auto& s : tr.states) {
        json st;
        st["mode"] = h.modes[static_cast<std::size_t>(s.mode)].name;
        st["valuation"] = std::vector<double>(s.valuation.data(),
                                              s.valuation.data() + s.valuation.size());
        states.push_back(st);
    }
    json jumps = json::array();
    for (const auto& j : tr.jumps) {
        json jj;
        if (j.isStay()) {
            jj["stay"] = true;
        } else {
            jj["stay"] = false;
            jj["transition"] = j.transition;
            jj["time"] = j.fireTime;
        }
        jumps.push_back(jj);
    }
    return json{{"states", states}, {"jumps", jumps}};
}

Trace traceFromJson(const json& j, std::vector<std::string>* modeNames) {
    Trace tr;
    for (const auto& st : j.at("states")) {
        ConcreteState s;
        s.mode = 0;
        if (modeNames) {
            std::string name = st.at("mode").get<std::string>();
            auto it = std::find(modeNames->begin(), modeNames->end(), name);
            if (it == modeNames->end()) {
                modeNames->push_back(name);
                s.mode = static_cast<int>(modeNames->size()) - 1;
            } else {
                s.mode = static_cast<int>(it - modeNames->begin());
            }
        }
        std::vector<double> v = st.at("valuation").get<std::vector<double>>();
        s.valuation = Eigen::Map<Eigen::VectorXd>(v.data(), static_cast<long>(v.size()));
        tr.states.push_back(std::move(s));
    }
    for (const auto& jj : j.at("jumps")) {
        if (jj.at("stay").get<bool>()) tr.jumps.push_back(Jump::stay());
        else tr.jumps.push_back(Jump::fire(jj.at("transition").get<int>(), jj.at("time").get<double>()));
    }
    return tr;
}

}  // namespace

std::string reportToJson(const RunReport& rep, const HybridAutomaton& h,
                         const ReportContext& ctx) {
    json r;
    r["schema_version"] = kReportSchemaVersion;
    r["tool_version"] = kToolVersion;
    r["model"] = ctx.modelName.empty() ? h.name : ctx.modelName;
    r["model_path"] = ctx.modelPath;
    r["verdict"] = runOutcomeName(rep.outcome);
    r["seed"] = ctx.seed;
    if (!rep.note.empty()) r["note"] = rep.note;

    r["config"] = {
        {"strategy", strategyName(ctx.strategy.mode)},
        {"points", ctx.sampler.timePoints},
        {"steps", ctx.sampler.maxSteps},
        {"ode_step", ctx.sampler.integrator.step},
        {"batch", ctx.strategy.batchSize},
        {"timeout", ctx.strategy.timeoutSeconds},
        {"max_samples", ctx.strategy.maxSamples},
        {"delta", ctx.strategy.delta},
        {"confidence_target", ctx.strategy.confidenceTarget},
        {"fixed_trace_cost", ctx.strategy.fixedTraceCost},
        {"jobs", ctx.strategy.jobs},
        {"solver_precision", ctx.solver.precision},
        {"solver_budget", ctx.solver.budgetSeconds},
    };

    if (rep.counterexample) r["counterexample"] = traceToJson(*rep.counterexample, h);
    else r["counterexample"] = nullptr;

    r["tallies"] = {
        {"traces_sampled", rep.tracesSampled},
        {"solver_calls", rep.solverCalls},
        {"solver_sat", rep.solverSat},
        {"solver_unsat", rep.solverUnsat},
        {"solver_unknown", rep.solverUnknown},
        {"solver_cache_hits", rep.solverCacheHits},
        {"cache_entries", rep.cacheEntries},
    };

    r["confidence"] = {
        {"positives", rep.confidence.tally.positives},
        {"negatives", rep.confidence.tally.negatives},
        {"delta", rep.confidence.delta},
        {"alpha", rep.confidence.alpha},
        {"value", rep.confidence.confidence},
        {"verdict", verdictName(rep.confidence.verdict)},
        // The combined strategy's true effectiveness exponent is unknown;
        // α = 1 is the conservative choice, so the true confidence is at
        // least the reported value.
        {"alpha_note", "alpha=1 (conservative); the combined method's exponent is unknown"},
    };

    json audit = json::array();
    for (const auto& rec : rep.audit) {
        audit.push_back({{"kind", rec.kind},
                         {"path", rec.path},
                         {"target", rec.target},
                         {"status", rec.status},
                         {"queries", rec.queries},
                         {"cached", rec.cached},
                         {"from_cache", rec.fromCache},
                         {"note", rec.note}});
    }
    r["solver_audit"] = audit;

    json tree = json::array();
    for (const auto& node : rep.tree) {
        tree.push_back({{"path", node.path},
                        {"m", node.m},
                        {"n", node.n},
                        {"q_hat", node.qHat},
                        {"particles", node.particleCount},
                        {"discovered_by", node.origin}});
    }
    r["explore_tree"] = tree;

    r["timing"] = {
        {"calibration_s", rep.calibrationSeconds},
        {"sampling_s", rep.samplingSeconds},
        {"solving_s", rep.solvingSeconds},
        {"total_s", rep.totalSeconds},
        {"final_trace_cost", rep.finalTraceCost},
    };
    return r.dump(2);
}

RunReport reportFromJson(const std::string& jsonText, std::string* modelName) {
    json r = json::parse(jsonText);
    if (r.at("schema_version").get<int>() != kReportSchemaVersion)
        throw ModelFormatError("unsupported report schema version");
    RunReport rep;
    if (modelName) *modelName = r.at("model").get<std::string>();
    std::string verdict = r.at("verdict").get<std::string>();
    if (verdict == "counterexample") rep.outcome = RunOutcome::Counterexample;
    else if (verdict == "pass") rep.outcome = RunOutcome::Pass;
    else rep.outcome = RunOutcome::TimeoutInconclusive;
    if (!r.at("counterexample").is_null()) {
        std::vector<std::string> names;
        rep.counterexample = traceFromJson(r.at("counterexample"), &names);
    }
    if ((rep.outcome == RunOutcome::Counterexample) != rep.counterexample.has_value())
        throw ModelFormatError("verdict and counterexample presence disagree");
    const json& tallies = r.at("tallies");
    rep.tracesSampled = tallies.at("traces_sampled").get<long>();
    rep.solverCalls = tallies.at("solver_calls").get<long>();
    rep.solverSat = tallies.at("solver_sat").get<long>();
    rep.solverUnsat = tallies.at("solver_unsat").get<long>();
    rep.solverUnknown = tallies.at("solver_unknown").get<long>();
    rep.solverCacheHits = tallies.at("solver_cache_hits").get<long>();
    rep.cacheEntries = tallies.at("cache_entries").get<std::size_t>();
    const json& conf = r.at("confidence");
    rep.confidence.tally.positives = conf.at("positives").get<long>();
    rep.confidence.tally.negatives = conf.at("negatives").get<long>();
    rep.confidence.delta = conf.at("delta").get<double>();
    rep.confidence.alpha = conf.at("alpha").get<double>();
    rep.confidence.confidence = conf.at("value").get<double>();
    std::string cv = conf.at("verdict").get<std::string>();
    rep.confidence.verdict = cv == "pass" ? Verdict::Pass
                             : cv == "fail" ? Verdict::Fail
                                            : Verdict::Inconclusive;
    for (const auto& rec : r.at("solver_audit")) {
        SolverCallRecord s;
        s.kind = rec.at("kind").get<std::string>();
        s.path = rec.at("path").get<std::string>();
        s.target = rec.at("target").get<std::string>();
        s.status = rec.at("status").get<std::string>();
        s.queries = rec.at("queries").get<int>();
        s.cached = rec.at("cached").get<bool>();
        s.fromCache = rec.at("from_cache").get<bool>();
        s.note = rec.at("note").get<std::string>();
        rep.audit.push_back(std::move(s));
    }
    for (const auto& node : r.at("explore_tree")) {
        TreeNodeSummary t;
        t.path = node.at("path").get<std::vector<std::string>>();
        t.m = node.at("m").get<int>();
        t.n = node.at("n").get<int>();
        t.qHat = node.at("q_hat").get<double>();
        t.particleCount = node.at("particles").get<std::size_t>();
        t.origin = node.at("discovered_by").get<std::string>();
        rep.tree.push_back(std::move(t));
    }
    const json& timing = r.at("timing");
    rep.calibrationSeconds = timing.at("calibration_s").get<double>();
    rep.samplingSeconds = timing.at("sampling_s").get<double>();
    rep.solvingSeconds = timing.at("solving_s").get<double>();
    rep.totalSeconds = timing.at("total_s").get<double>();
    rep.finalTraceCost = timing.at("final_trace_cost").get<double>();
    if (r.contains("note")) rep.note = r.at("note").get<std::string>();
    return rep;
}

std::string reportStableSubset(const std::string& reportJson) {
    json r = json::parse(reportJson);
    r.erase("timing");
    return r.dump(2);
}

// ── Trace CSV ───────────────────────────────────────────────────────────────

void writeTraceCsv(std::ostream& os, const HybridAutomaton& h, const Trace& tr,
                   const IntegratorConfig& cfg, int traceIndex, bool header) {
    if (header) {
        os << "trace,step,mode,time";
        for (const auto& v : h.variables) os << ',' << v;
        os << '\n';
    }
    char buf[64];
    auto emit = [&](int step, int mode, double tGlobal, const Eigen::VectorXd& v) {
        os << traceIndex << ',' << step << ',' << h.modes[static_cast<std::size_t>(mode)].name
           << ',';
        std::snprintf(buf, sizeof(buf), "%.12g", tGlobal);
        os << buf;
        for (Eigen::Index i = 0; i < v.size(); ++i) {
            std::snprintf(buf, sizeof(buf), "%.12g", v[i]);
            os << ',' << buf;
        }
        os << '\n';
    };

    emit(0, tr.states.front().mode, 0.0, tr.states.front().valuation);
    long perUnit = cfg.stepsPerUnit();
    for (std::size_t k = 0; k < tr.jumps.size(); ++k) {
        const ConcreteState& from = tr.states[k];
        const Jump& j = tr.jumps[k];
        // Sample the composed trajectory of this unit step on the grid.
        Trajectory pre(h, from.mode, from.valuation, cfg);
        int postMode = j.isStay() ? from.mode : h.transitions[static_cast<std::size_t>(j.transition)].to;
        std::unique_ptr<Trajectory> post;
        if (!j.isStay()) {
            Eigen::VectorXd atFire = pre.at(j.fireTime);
            post = std::make_unique<Trajectory>(h, postMode, std::move(atFire), cfg);
        }
        for (long g = 1; g <= perUnit; ++g) {
            double tLocal = static_cast<double>(g) * cfg.step;
            double tGlobal = static_cast<double>(k) + tLocal;
            if (j.isStay() || tLocal <= j.fireTime)
                emit(static_cast<int>(k) + 1, from.mode, tGlobal, pre.at(tLocal));
            else
                emit(static_cast<int>(k) + 1, postMode, tGlobal, post->at(tLocal - j.fireTime));
        }
    }
}

}  // namespace hyc
