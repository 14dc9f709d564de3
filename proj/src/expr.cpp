#include "hyc/expr.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>

namespace hyc {

// ── Construction ────────────────────────────────────────────────────────────

Expr Expr::constant(double v) {
    auto n = std::make_shared<ExprNode>();
    n->op = ExprOp::Const;
    n->value = v;
    return Expr(n);
}

Expr Expr::variable(int index) {
    auto n = std::make_shared<ExprNode>();
    n->op = ExprOp::Var;
    n->var = index;
    return Expr(n);
}

Expr Expr::time() {
    auto n = std::make_shared<ExprNode>();
    n->op = ExprOp::Time;
    return Expr(n);
}

Expr Expr::unary(ExprOp op, Expr child) {
    auto n = std::make_shared<ExprNode>();
    n->op = op;
    n->lhs = child.share();
    return Expr(n);
}

Expr Expr::binary(ExprOp op, Expr lhs, Expr rhs) {
    auto n = std::make_shared<ExprNode>();
    n->op = op;
    n->lhs = lhs.share();
    n->rhs = rhs.share();
    return Expr(n);
}

// ── Printing ────────────────────────────────────────────────────────────────

namespace {

std::string formatNumber(double v) {
    char buf[40];
    // %.17g round-trips every double through the parser.
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void printNode(const ExprNode* n, std::string& out, const std::vector<std::string>& vars) {
    switch (n->op) {
        case ExprOp::Const:
            if (n->value < 0) {
                out += '(';
                out += formatNumber(n->value);
                out += ')';
            } else {
                out += formatNumber(n->value);
            }
            return;
        case ExprOp::Var:
            if (n->var >= 0 && static_cast<std::size_t>(n->var) < vars.size())
                out += vars[n->var];
            else
                out += "$" + std::to_string(n->var);
            return;
        case ExprOp::Time:
            out += 't';
            return;
        case ExprOp::Neg:
            out += "(-";
            printNode(n->lhs.get(), out, vars);
            out += ')';
            return;
        case ExprOp::Sin:
        case ExprOp::Cos:
        case ExprOp::Exp:
        case ExprOp::Sqrt:
        case ExprOp::Abs: {
            const char* f = n->op == ExprOp::Sin    ? "sin"
                            : n->op == ExprOp::Cos  ? "cos"
                            : n->op == ExprOp::Exp  ? "exp"
                            : n->op == ExprOp::Sqrt ? "sqrt"
                                                    : "abs";
            out += f;
            out += '(';
            printNode(n->lhs.get(), out, vars);
            out += ')';
            return;
        }
        default: {
            const char* op = n->op == ExprOp::Add   ? " + "
                             : n->op == ExprOp::Sub ? " - "
                             : n->op == ExprOp::Mul ? " * "
                             : n->op == ExprOp::Div ? " / "
                                                    : " ^ ";
            out += '(';
            printNode(n->lhs.get(), out, vars);
            out += op;
            printNode(n->rhs.get(), out, vars);
            out += ')';
            return;
        }
    }
}

}  // namespace

std::string Expr::print(const std::vector<std::string>& vars) const {
    if (!root_) return "";
    std::string out;
    printNode(root_.get(), out, vars);
    return out;
}

// ── Evaluation ──────────────────────────────────────────────────────────────

namespace {

[[noreturn]] void evalFail(const char* what, const ExprNode* n) {
    std::string text;
    printNode(n, text, {});
    throw EvalError(what, text);
}

double evalNode(const ExprNode* n, const Eigen::Ref<const Eigen::VectorXd>& val, double t) {
    double r;
    switch (n->op) {
        case ExprOp::Const: return n->value;
        case ExprOp::Var: return val[n->var];
        case ExprOp::Time: return t;
        case ExprOp::Neg: return -evalNode(n->lhs.get(), val, t);
        case ExprOp::Sin: return std::sin(evalNode(n->lhs.get(), val, t));
        case ExprOp::Cos: return std::cos(evalNode(n->lhs.get(), val, t));
        case ExprOp::Exp:
            r = std::exp(evalNode(n->lhs.get(), val, t));
            if (!std::isfinite(r)) evalFail("overflow in exp", n);
            return r;
        case ExprOp::Sqrt: {
            double a = evalNode(n->lhs.get(), val, t);
            if (a < 0.0) evalFail("sqrt of negative", n);
            return std::sqrt(a);
        }
        case ExprOp::Abs: return std::fabs(evalNode(n->lhs.get(), val, t));
        case ExprOp::Add:
            r = evalNode(n->lhs.get(), val, t) + evalNode(n->rhs.get(), val, t);
            break;
        case ExprOp::Sub:
            r = evalNode(n->lhs.get(), val, t) - evalNode(n->rhs.get(), val, t);
            break;
        case ExprOp::Mul:
            r = evalNode(n->lhs.get(), val, t) * evalNode(n->rhs.get(), val, t);
            break;
        case ExprOp::Div: {
            double b = evalNode(n->rhs.get(), val, t);
            if (b == 0.0) evalFail("division by zero", n);
            r = evalNode(n->lhs.get(), val, t) / b;
            break;
        }
        case ExprOp::Pow:
            r = std::pow(evalNode(n->lhs.get(), val, t), evalNode(n->rhs.get(), val, t));
            break;
        default: evalFail("unknown operator", n);
    }
    if (!std::isfinite(r)) evalFail("non-finite result", n);
    return r;
}

}  // namespace

double Expr::eval(const Eigen::Ref<const Eigen::VectorXd>& valuation, double t) const {
    return evalNode(root_.get(), valuation, t);
}

// ── Structural measures ─────────────────────────────────────────────────────

namespace {

int nodeCount(const ExprNode* n) {
    if (!n) return 0;
    return 1 + nodeCount(n->lhs.get()) + nodeCount(n->rhs.get());
}

int guardCount(const GuardNode* g) {
    if (!g) return 0;
    if (g->kind == GuardKind::Atom) return 1 + nodeCount(g->lhs.root()) + nodeCount(g->rhs.root());
    return 1 + guardCount(g->a.get()) + guardCount(g->b.get());
}

bool sameNode(const ExprNode* a, const ExprNode* b) {
    if (a == b) return true;
    if (!a || !b) return false;
    if (a->op != b->op) return false;
    if (a->op == ExprOp::Const) return a->value == b->value;
    if (a->op == ExprOp::Var) return a->var == b->var;
    return sameNode(a->lhs.get(), b->lhs.get()) && sameNode(a->rhs.get(), b->rhs.get());
}

}  // namespace

int Expr::length() const { return nodeCount(root_.get()); }

bool Expr::sameTree(const Expr& other) const { return sameNode(root_.get(), other.root_.get()); }

int exprLength(const Expr& e) { return e.length(); }
int exprLength(const Guard& g) { return g.length(); }

// ── Guards ──────────────────────────────────────────────────────────────────

Guard Guard::atom(CmpOp cmp, Expr lhs, Expr rhs) {
    auto n = std::make_shared<GuardNode>();
    n->kind = GuardKind::Atom;
    n->cmp = cmp;
    n->lhs = std::move(lhs);
    n->rhs = std::move(rhs);
    return Guard(n);
}

Guard Guard::conj(Guard a, Guard b) {
    auto n = std::make_shared<GuardNode>();
    n->kind = GuardKind::And;
    n->a = a.root_;
    n->b = b.root_;
    return Guard(n);
}

Guard Guard::disj(Guard a, Guard b) {
    auto n = std::make_shared<GuardNode>();
    n->kind = GuardKind::Or;
    n->a = a.root_;
    n->b = b.root_;
    return Guard(n);
}

Guard Guard::negate(Guard a) {
    auto n = std::make_shared<GuardNode>();
    n->kind = GuardKind::Not;
    n->a = a.root_;
    return Guard(n);
}

namespace {

// Polarity-aware evaluation. Negations are pushed down to the atoms
// (De Morgan), so the δ relaxation is applied to the effective literal and
// weakening stays monotone under arbitrary `not` nesting.
bool evalGuardNode(const GuardNode* g, const Eigen::Ref<const Eigen::VectorXd>& val, double t,
                   double delta, bool positive) {
    switch (g->kind) {
        case GuardKind::Not:
            return evalGuardNode(g->a.get(), val, t, delta, !positive);
        case GuardKind::And: {
            bool a = evalGuardNode(g->a.get(), val, t, delta, positive);
            bool b = evalGuardNode(g->b.get(), val, t, delta, positive);
            return positive ? (a && b) : (a || b);
        }
        case GuardKind::Or: {
            bool a = evalGuardNode(g->a.get(), val, t, delta, positive);
            bool b = evalGuardNode(g->b.get(), val, t, delta, positive);
            return positive ? (a || b) : (a && b);
        }
        case GuardKind::Atom: {
            double l = g->lhs.eval(val, t);
            double r = g->rhs.eval(val, t);
            CmpOp cmp = g->cmp;
            if (!positive) {
                // complement of the atom, evaluated positively
                switch (cmp) {
                    case CmpOp::Lt: cmp = CmpOp::Ge; break;
                    case CmpOp::Le: cmp = CmpOp::Gt; break;
                    case CmpOp::Gt: cmp = CmpOp::Le; break;
                    case CmpOp::Ge: cmp = CmpOp::Lt; break;
                }
            }
            switch (cmp) {
                case CmpOp::Lt: return l < r + delta;
                case CmpOp::Le: return l <= r + delta;
                case CmpOp::Gt: return l > r - delta;
                case CmpOp::Ge: return l >= r - delta;
            }
            return false;
        }
    }
    return false;
}

}  // namespace

bool Guard::eval(const Eigen::Ref<const Eigen::VectorXd>& valuation, double t) const {
    return evalGuardNode(root_.get(), valuation, t, 0.0, true);
}

bool Guard::evalWeakened(const Eigen::Ref<const Eigen::VectorXd>& valuation, double t,
                         double delta) const {
    return evalGuardNode(root_.get(), valuation, t, delta, true);
}

int Guard::length() const { return guardCount(root_.get()); }

namespace {

void printGuardNode(const GuardNode* g, std::string& out, const std::vector<std::string>& vars) {
    switch (g->kind) {
        case GuardKind::Atom: {
            const char* op = g->cmp == CmpOp::Lt   ? " < "
                             : g->cmp == CmpOp::Le ? " <= "
                             : g->cmp == CmpOp::Gt ? " > "
                                                   : " >= ";
            out += '(';
            out += g->lhs.print(vars);
            out += op;
            out += g->rhs.print(vars);
            out += ')';
            return;
        }
        case GuardKind::Not:
            out += "(not ";
            printGuardNode(g->a.get(), out, vars);
            out += ')';
            return;
        case GuardKind::And:
        case GuardKind::Or:
            out += '(';
            printGuardNode(g->a.get(), out, vars);
            out += g->kind == GuardKind::And ? " and " : " or ";
            printGuardNode(g->b.get(), out, vars);
            out += ')';
            return;
    }
}

bool sameGuardNode(const GuardNode* a, const GuardNode* b) {
    if (a == b) return true;
    if (!a || !b) return false;
    if (a->kind != b->kind) return false;
    if (a->kind == GuardKind::Atom)
        return a->cmp == b->cmp && a->lhs.sameTree(b->lhs) && a->rhs.sameTree(b->rhs);
    return sameGuardNode(a->a.get(), b->a.get()) && sameGuardNode(a->b.get(), b->b.get());
}

}  // namespace

std::string Guard::print(const std::vector<std::string>& vars) const {
    if (!root_) return "";
    std::string out;
    printGuardNode(root_.get(), out, vars);
    return out;
}

bool Guard::sameTree(const Guard& other) const {
    return sameGuardNode(root_.get(), other.root_.get());
}

// ── Parser ──────────────────────────────────────────────────────────────────

namespace {

struct Lexer {
    const std::string& text;
    std::size_t pos = 0;

    void skipSpace() {
        while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
    }
    bool done() {
        skipSpace();
        return pos >= text.size();
    }
    char peek() {
        skipSpace();
        return pos < text.size() ? text[pos] : '\0';
    }
    bool consume(char c) {
        skipSpace();
        if (pos < text.size() && text[pos] == c) {
            ++pos;
            return true;
        }
        return false;
    }
    bool consumeWord(const char* w) {
        skipSpace();
        std::size_t n = std::strlen(w);
        if (text.compare(pos, n, w) != 0) return false;
        // keyword must not run into an identifier tail
        std::size_t end = pos + n;
        if (end < text.size() &&
            (std::isalnum(static_cast<unsigned char>(text[end])) || text[end] == '_'))
            return false;
        pos = end;
        return true;
    }
};

struct Parser {
    Lexer lex;
    const std::vector<std::string>& vars;
    const std::vector<std::pair<std::string, double>>& params;

    [[noreturn]] void fail(const std::string& msg) { throw ParseError(msg, lex.pos); }

    bool identStart(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }

    std::string readIdent() {
        lex.skipSpace();
        std::size_t start = lex.pos;
        while (lex.pos < lex.text.size() &&
               (std::isalnum(static_cast<unsigned char>(lex.text[lex.pos])) ||
                lex.text[lex.pos] == '_'))
            ++lex.pos;
        return lex.text.substr(start, lex.pos - start);
    }

    Expr parsePrimary() {
        lex.skipSpace();
        if (lex.pos >= lex.text.size()) fail("unexpected end of expression");
        char c = lex.text[lex.pos];
        if (c == '(') {
            ++lex.pos;
            Expr e = parseAdditive();
            if (!lex.consume(')')) fail("expected ')'");
            return e;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            const char* begin = lex.text.c_str() + lex.pos;
            char* end = nullptr;
            double v = std::strtod(begin, &end);
            if (end == begin) fail("malformed number");
            lex.pos += static_cast<std::size_t>(end - begin);
            return Expr::constant(v);
        }
        if (identStart(c)) {
            std::size_t at = lex.pos;
            std::string name = readIdent();
            if (lex.peek() == '(') {
                ExprOp op;
                if (name == "sin") op = ExprOp::Sin;
                else if (name == "cos") op = ExprOp::Cos;
                else if (name == "exp") op = ExprOp::Exp;
                else if (name == "sqrt") op = ExprOp::Sqrt;
                else if (name == "abs") op = ExprOp::Abs;
                else { lex.pos = at; fail("unknown function `" + name + "`"); }
                lex.consume('(');
                Expr arg = parseAdditive();
                if (!lex.consume(')')) fail("expected ')' after function argument");
                return Expr::unary(op, arg);
            }
            if (name == "t") return Expr::time();
            for (std::size_t i = 0; i < vars.size(); ++i)
                if (vars[i] == name) return Expr::variable(static_cast<int>(i));
            for (const auto& [pname, pvalue] : params)
                if (pname == name) return Expr::constant(pvalue);
            lex.pos = at;
            fail("unknown identifier `" + name + "`");
        }
        fail(std::string("unexpected character `") + c + "`");
    }

    Expr parsePower() {
        Expr base = parsePrimary();
        if (lex.consume('^')) {
            Expr exp = parseUnary();  // right-associative
            return Expr::binary(ExprOp::Pow, base, exp);
        }
        return base;
    }

    Expr parseUnary() {
        if (lex.consume('-')) return Expr::unary(ExprOp::Neg, parseUnary());
        return parsePower();
    }

    Expr parseMultiplicative() {
        Expr e = parseUnary();
        for (;;) {
            if (lex.consume('*')) e = Expr::binary(ExprOp::Mul, e, parseUnary());
            else if (lex.consume('/')) e = Expr::binary(ExprOp::Div, e, parseUnary());
            else return e;
        }
    }

    Expr parseAdditive() {
        Expr e = parseMultiplicative();
        for (;;) {
            lex.skipSpace();
            if (lex.pos < lex.text.size() && lex.text[lex.pos] == '+') {
                ++lex.pos;
                e = Expr::binary(ExprOp::Add, e, parseMultiplicative());
            } else if (lex.pos < lex.text.size() && lex.text[lex.pos] == '-') {
                ++lex.pos;
                e = Expr::binary(ExprOp::Sub, e, parseMultiplicative());
            } else {
                return e;
            }
        }
    }

    CmpOp parseCmpOp() {
        lex.skipSpace();
        std::size_t at = lex.pos;
        if (lex.pos >= lex.text.size()) fail("expected comparison operator");
        char c = lex.text[lex.pos];
        char c2 = lex.pos + 1 < lex.text.size() ? lex.text[lex.pos + 1] : '\0';
        if (c == '=' || (c == '!' && c2 == '=')) {
            lex.pos = at;
            fail("equality atoms are not supported (they enable transitions on a measure-zero "
                 "time set); use strict or weak inequalities");
        }
        if (c == '<') { lex.pos += (c2 == '=') ? 2 : 1; return c2 == '=' ? CmpOp::Le : CmpOp::Lt; }
        if (c == '>') { lex.pos += (c2 == '=') ? 2 : 1; return c2 == '=' ? CmpOp::Ge : CmpOp::Gt; }
        fail("expected comparison operator");
    }

    Guard parseAtom() {
        Expr lhs = parseAdditive();
        CmpOp op = parseCmpOp();
        Expr rhs = parseAdditive();
        return Guard::atom(op, lhs, rhs);
    }

    Guard parseGuardNotLevel() {
        if (lex.consumeWord("not") || lex.consume('!')) return Guard::negate(parseGuardNotLevel());
        lex.skipSpace();
        if (lex.pos < lex.text.size() && lex.text[lex.pos] == '(') {
            // Could be a parenthesized boolean or a parenthesized arithmetic
            // sub-expression of an atom; try the boolean reading first.
            std::size_t save = lex.pos;
            ++lex.pos;
            try {
                Guard g = parseGuardOrLevel();
                if (lex.consume(')')) {
                    // reject `(a < b) + 1`-style continuations
                    lex.skipSpace();
                    char nxt = lex.pos < lex.text.size() ? lex.text[lex.pos] : '\0';
                    if (nxt == '\0' || nxt == ')' || identStart(nxt) || nxt == '&' || nxt == '|')
                        return g;
                }
            } catch (const ParseError&) {
                // fall through to the atom reading
            }
            lex.pos = save;
        }
        return parseAtom();
    }

    bool consumeOp2(char c) {  // '&&' or '||'
        lex.skipSpace();
        if (lex.pos + 1 < lex.text.size() && lex.text[lex.pos] == c && lex.text[lex.pos + 1] == c) {
            lex.pos += 2;
            return true;
        }
        return false;
    }

    Guard parseGuardAndLevel() {
        Guard g = parseGuardNotLevel();
        for (;;) {
            if (lex.consumeWord("and") || consumeOp2('&'))
                g = Guard::conj(g, parseGuardNotLevel());
            else return g;
        }
    }

    Guard parseGuardOrLevel() {
        Guard g = parseGuardAndLevel();
        for (;;) {
            if (lex.consumeWord("or") || consumeOp2('|'))
                g = Guard::disj(g, parseGuardAndLevel());
            else return g;
        }
    }
};

}  // namespace

Expr parseExpr(const std::string& text, const std::vector<std::string>& vars,
               const std::vector<std::pair<std::string, double>>& params) {
    Parser p{Lexer{text}, vars, params};
    Expr e = p.parseAdditive();
    if (!p.lex.done()) p.fail("trailing input");
    return e;
}

Guard parseGuard(const std::string& text, const std::vector<std::string>& vars,
                 const std::vector<std::pair<std::string, double>>& params) {
    Parser p{Lexer{text}, vars, params};
    Guard g = p.parseGuardOrLevel();
    if (!p.lex.done()) p.fail("trailing input");
    return g;
}

}  // namespace hyc
