#ifndef HYC_AUTOMATON_HPP
#define HYC_AUTOMATON_HPP

#include <Eigen/Dense>
#include <set>
#include <string>
#include <vector>

#include "hyc/expr.hpp"

namespace hyc {

// ── Hybrid automaton ────────────────────────────────────────────────────────
//
// Finite modes with one ODE right-hand side per state variable, guarded
// discrete transitions, a box of initial valuations and a set of negative
// (unsafe) modes. Jumps do not reset variables; resets must be encoded in
// the dynamics. Immutable after load; shareable across threads.

struct Mode {
    std::string name;
    std::vector<Expr> rhs;  // one per state variable, in variable order
};

struct Transition {
    int from = -1;
    int to = -1;
    Guard guard;
    std::string guardText;  // as written in the model file, for reporting
};

struct HybridAutomaton {
    std::vector<std::string> variables;
    std::vector<Mode> modes;
    std::vector<Transition> transitions;
    int initialMode = 0;
    Eigen::VectorXd initLower, initUpper;  // initial box, per variable
    std::set<int> negativeModes;
    std::string name;

    int modeIndex(const std::string& modeName) const;  // -1 if unknown
    std::size_t varCount() const { return variables.size(); }
};

struct ConcreteState {
    int mode = 0;
    Eigen::VectorXd valuation;
};

// One unit step of a trace: either a fired transition with its firing time
// in (0,1), or a self-stay (no guard enabled across the whole step).
struct Jump {
    int transition = -1;  // index into HybridAutomaton::transitions; -1 = stay
    double fireTime = 0.0;
    bool isStay() const { return transition < 0; }
    static Jump stay() { return Jump{}; }
    static Jump fire(int trans, double time) { return Jump{trans, time}; }
};

// Alternating observations at unit-time boundaries: states.size() == K+1,
// jumps.size() == K.
struct Trace {
    std::vector<ConcreteState> states;
    std::vector<Jump> jumps;

    std::size_t steps() const { return jumps.size(); }
};

struct Diagnostic {
    std::string location;
    std::string message;
};

// Empty result iff every structural invariant holds; one located diagnostic
// per violation.
std::vector<Diagnostic> validate(const HybridAutomaton& h);

// Modes with a directed transition-graph path (length >= 0) to some negative
// mode. Negative modes themselves are always included.
std::set<int> backwardReachableModes(const HybridAutomaton& h);

// Transitions leaving q, in declaration order. Throws std::out_of_range for
// an undeclared mode.
std::vector<int> outgoing(const HybridAutomaton& h, int q);

class UnknownModeError : public std::out_of_range {
public:
    explicit UnknownModeError(int q)
        : std::out_of_range("unknown mode index " + std::to_string(q)) {}
};

}  // namespace hyc

#endif  // HYC_AUTOMATON_HPP
