#ifndef HYC_EXPR_HPP
#define HYC_EXPR_HPP

#include <Eigen/Dense>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace hyc {

// ── Arithmetic expressions ──────────────────────────────────────────────────
//
// A small total expression language for ODE right-hand sides, guard atoms and
// path conditions. Nodes are immutable after construction, so trees can be
// shared freely across threads. Variable references are resolved to indices
// at parse time; the reserved symbol `t` refers to the time elapsed since the
// current flow segment started.

enum class ExprOp {
    Const,
    Var,   // state variable, payload = index
    Time,  // the symbol t
    Neg,
    Sin,
    Cos,
    Exp,
    Sqrt,
    Abs,
    Add,
    Sub,
    Mul,
    Div,
    Pow,
};

struct ExprNode;
using ExprPtr = std::shared_ptr<const ExprNode>;

struct ExprNode {
    ExprOp op;
    double value = 0.0;  // Const payload
    int var = -1;        // Var payload
    ExprPtr lhs;
    ExprPtr rhs;
};

class Expr {
public:
    Expr() = default;
    explicit Expr(ExprPtr root) : root_(std::move(root)) {}

    static Expr constant(double v);
    static Expr variable(int index);
    static Expr time();
    static Expr unary(ExprOp op, Expr child);
    static Expr binary(ExprOp op, Expr lhs, Expr rhs);

    const ExprNode* root() const { return root_.get(); }
    ExprPtr share() const { return root_; }
    bool empty() const { return root_ == nullptr; }

    double eval(const Eigen::Ref<const Eigen::VectorXd>& valuation, double t) const;
    int length() const;  // node count

    // Canonical fully parenthesized infix; round-trips through parseExpr.
    // Without a name table, variables print as $<index>.
    std::string print(const std::vector<std::string>& vars = {}) const;

    bool sameTree(const Expr& other) const;

private:
    ExprPtr root_;
};

// Raised when evaluation leaves the reals (division by zero, sqrt of a
// negative, any non-finite intermediate). Never silently produces NaN/Inf.
class EvalError : public std::runtime_error {
public:
    EvalError(const std::string& what, std::string nodeText)
        : std::runtime_error(what + " in `" + nodeText + "`"), node(std::move(nodeText)) {}
    std::string node;
};

class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& what, std::size_t position)
        : std::runtime_error(what + " (at position " + std::to_string(position) + ")"),
          pos(position) {}
    std::size_t pos;
};

// ── Guards ──────────────────────────────────────────────────────────────────
//
// Boolean trees over atoms `lhs ⋈ rhs`, ⋈ ∈ {<, <=, >, >=}, with and/or/not.
// Equality atoms are rejected at parse time: under the time-window measure
// semantics they enable transitions on a measure-zero set.

enum class CmpOp { Lt, Le, Gt, Ge };
enum class GuardKind { Atom, And, Or, Not };

struct GuardNode;
using GuardPtr = std::shared_ptr<const GuardNode>;

struct GuardNode {
    GuardKind kind;
    CmpOp cmp = CmpOp::Lt;  // Atom payload
    Expr lhs, rhs;          // Atom payload
    GuardPtr a, b;          // children
};

class Guard {
public:
    Guard() = default;
    explicit Guard(GuardPtr root) : root_(std::move(root)) {}

    static Guard atom(CmpOp cmp, Expr lhs, Expr rhs);
    static Guard conj(Guard a, Guard b);
    static Guard disj(Guard a, Guard b);
    static Guard negate(Guard a);

    const GuardNode* root() const { return root_.get(); }
    bool empty() const { return root_ == nullptr; }

    // Strict evaluation: a definite boolean at every finite valuation.
    bool eval(const Eigen::Ref<const Eigen::VectorXd>& valuation, double t) const;

    // δ-weakened evaluation: each atom `a < b` becomes `a < b + δ`
    // (symmetrically for the other comparators, after pushing negations to
    // the atoms so that weakening always enlarges the satisfied set).
    // Monotone: eval(..) implies evalWeakened(.., δ) for every δ ≥ 0.
    bool evalWeakened(const Eigen::Ref<const Eigen::VectorXd>& valuation, double t,
                      double delta) const;

    int length() const;  // node count: 1 per connective/atom plus expression nodes
    std::string print(const std::vector<std::string>& vars = {}) const;

    bool sameTree(const Guard& other) const;

private:
    GuardPtr root_;
};

// Node count of an expression or guard tree; length of a composite is
// 1 + the sum of its children's lengths, leaves count 1.
int exprLength(const Expr& e);
int exprLength(const Guard& g);

// ── Parsing ─────────────────────────────────────────────────────────────────
//
// Infix grammar over vars ∪ {t} with functions sin, cos, exp, sqrt, abs,
// operators + - * / ^ (right-associative ^), unary minus, and parentheses.
// `params` maps named constants; references are substituted as Const nodes.
// Errors carry the offending position; unknown identifiers are named.

Expr parseExpr(const std::string& text, const std::vector<std::string>& vars,
               const std::vector<std::pair<std::string, double>>& params = {});

// Guards: comparison atoms combined with `and`, `or`, `not` (also && || !).
Guard parseGuard(const std::string& text, const std::vector<std::string>& vars,
                 const std::vector<std::pair<std::string, double>>& params = {});

}  // namespace hyc

#endif  // HYC_EXPR_HPP
