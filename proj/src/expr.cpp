#include "iterfix/expr.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <utility>

namespace iterfix {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double named_constant_value(const std::string& name) {
    if (name == "log2") return std::log(2.0);
    if (name == "e") return std::exp(1.0);
    if (name == "pi") return 4.0 * std::atan(1.0);
    throw Error("unknown_constant", "unknown named constant '" + name + "'");
}

bool is_named_constant(const std::string& s) {
    return s == "log2" || s == "e" || s == "pi";
}

bool is_function_name(const std::string& s) {
    return s == "exp" || s == "log" || s == "abs";
}

[[noreturn]] void domain_fault(const std::string& what) {
    throw Error("eval_domain_error", what);
}

bool integral_exponent(double w) {
    return std::isfinite(w) && w == std::nearbyint(w) && std::abs(w) < 1e15;
}

// Value plus derivative; `constant` marks subtrees free of the variable so
// x^k uses the plain power rule (valid for negative bases with integer k).
struct Dual {
    double v = 0.0;
    double d = 0.0;
    bool constant = true;
};

double checked_pow(double u, double w) {
    if (u == 0.0 && w < 0.0) domain_fault("0 raised to a negative power");
    if (u < 0.0 && !integral_exponent(w))
        domain_fault("negative base with non-integer exponent");
    double r = std::pow(u, w);
    if (!std::isfinite(r)) domain_fault("power overflow");
    return r;
}

template <typename Num>
Num eval_rec(const ExprNode& e, const Num& x);

template <>
double eval_rec<double>(const ExprNode& e, const double& x) {
    using K = ExprNode::Kind;
    switch (e.kind) {
    case K::Constant: return e.value;
    case K::Variable: return x;
    case K::Add: return eval_rec(*e.lhs, x) + eval_rec(*e.rhs, x);
    case K::Sub: return eval_rec(*e.lhs, x) - eval_rec(*e.rhs, x);
    case K::Mul: return eval_rec(*e.lhs, x) * eval_rec(*e.rhs, x);
    case K::Div: {
        double den = eval_rec(*e.rhs, x);
        if (den == 0.0) domain_fault("division by zero");
        return eval_rec(*e.lhs, x) / den;
    }
    case K::Pow: return checked_pow(eval_rec(*e.lhs, x), eval_rec(*e.rhs, x));
    case K::Neg: return -eval_rec(*e.lhs, x);
    case K::Exp: {
        double r = std::exp(eval_rec(*e.lhs, x));
        if (!std::isfinite(r)) domain_fault("exp overflow");
        return r;
    }
    case K::Log: {
        double u = eval_rec(*e.lhs, x);
        if (u <= 0.0) domain_fault("log of a non-positive number");
        return std::log(u);
    }
    case K::Abs: return std::abs(eval_rec(*e.lhs, x));
    }
    throw Error("internal", "unhandled expression node");
}

template <>
Dual eval_rec<Dual>(const ExprNode& e, const Dual& x) {
    using K = ExprNode::Kind;
    switch (e.kind) {
    case K::Constant: return {e.value, 0.0, true};
    case K::Variable: return x;
    case K::Add: {
        Dual a = eval_rec(*e.lhs, x), b = eval_rec(*e.rhs, x);
        return {a.v + b.v, a.d + b.d, a.constant && b.constant};
    }
    case K::Sub: {
        Dual a = eval_rec(*e.lhs, x), b = eval_rec(*e.rhs, x);
        return {a.v - b.v, a.d - b.d, a.constant && b.constant};
    }
    case K::Mul: {
        Dual a = eval_rec(*e.lhs, x), b = eval_rec(*e.rhs, x);
        return {a.v * b.v, a.d * b.v + a.v * b.d, a.constant && b.constant};
    }
    case K::Div: {
        Dual a = eval_rec(*e.lhs, x), b = eval_rec(*e.rhs, x);
        if (b.v == 0.0) domain_fault("division by zero");
        return {a.v / b.v, (a.d * b.v - a.v * b.d) / (b.v * b.v),
                a.constant && b.constant};
    }
    case K::Pow: {
        Dual a = eval_rec(*e.lhs, x), b = eval_rec(*e.rhs, x);
        double v = checked_pow(a.v, b.v);
        double d;
        if (b.constant) {
            if (b.v == 0.0) {
                d = 0.0;
            } else if (b.v == 1.0) {
                d = a.d;
            } else {
                d = b.v * checked_pow(a.v, b.v - 1.0) * a.d;
            }
        } else {
            if (a.v <= 0.0)
                domain_fault("derivative of power with non-constant exponent "
                             "requires a positive base");
            d = v * (b.d * std::log(a.v) + b.v * a.d / a.v);
        }
        return {v, d, a.constant && b.constant};
    }
    case K::Neg: {
        Dual a = eval_rec(*e.lhs, x);
        return {-a.v, -a.d, a.constant};
    }
    case K::Exp: {
        Dual a = eval_rec(*e.lhs, x);
        double v = std::exp(a.v);
        if (!std::isfinite(v)) domain_fault("exp overflow");
        return {v, v * a.d, a.constant};
    }
    case K::Log: {
        Dual a = eval_rec(*e.lhs, x);
        if (a.v <= 0.0) domain_fault("log of a non-positive number");
        return {std::log(a.v), a.d / a.v, a.constant};
    }
    case K::Abs: {
        Dual a = eval_rec(*e.lhs, x);
        if (a.v == 0.0 && !a.constant)
            domain_fault("abs is not differentiable at 0");
        return {std::abs(a.v), a.v < 0.0 ? -a.d : a.d, a.constant};
    }
    }
    throw Error("internal", "unhandled expression node");
}

void collect_variables(const ExprNode& e, std::set<std::string>& out) {
    if (e.kind == ExprNode::Kind::Variable) out.insert(e.name);
    if (e.lhs) collect_variables(*e.lhs, out);
    if (e.rhs) collect_variables(*e.rhs, out);
}

// ---------------------------------------------------------------------------
// Tokenizer. Offsets are 1-based character positions, reported in errors.

enum class Tok {
    KwPiece,
    Ident,
    Number,
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    LBracket,
    RBracket,
    Colon,
    Semicolon,
    Comma,
    End,
};

struct Token {
    Tok kind;
    std::string text;
    double number = 0.0;
    std::size_t offset = 0; // 1-based
};

class Lexer {
public:
    explicit Lexer(const std::string& src) : src_(src) { advance(); }

    const Token& tok() const { return tok_; }

    void advance() {
        while (pos_ < src_.size() &&
               std::isspace(static_cast<unsigned char>(src_[pos_])))
            ++pos_;
        tok_.offset = pos_ + 1;
        if (pos_ >= src_.size()) {
            tok_ = {Tok::End, "", 0.0, pos_ + 1};
            return;
        }
        char c = src_[pos_];
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::size_t start = pos_;
            while (pos_ < src_.size() &&
                   (std::isalnum(static_cast<unsigned char>(src_[pos_])) ||
                    src_[pos_] == '_'))
                ++pos_;
            std::string word = src_.substr(start, pos_ - start);
            tok_ = {word == "piece" ? Tok::KwPiece : Tok::Ident, word, 0.0,
                    start + 1};
            return;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            const char* begin = src_.c_str() + pos_;
            char* end = nullptr;
            double v = std::strtod(begin, &end);
            if (end == begin)
                throw ParseError(pos_ + 1, "malformed number");
            std::size_t len = static_cast<std::size_t>(end - begin);
            tok_ = {Tok::Number, src_.substr(pos_, len), v, pos_ + 1};
            pos_ += len;
            return;
        }
        Tok k;
        switch (c) {
        case '+': k = Tok::Plus; break;
        case '-': k = Tok::Minus; break;
        case '*': k = Tok::Star; break;
        case '/': k = Tok::Slash; break;
        case '^': k = Tok::Caret; break;
        case '(': k = Tok::LParen; break;
        case ')': k = Tok::RParen; break;
        case '[': k = Tok::LBracket; break;
        case ']': k = Tok::RBracket; break;
        case ':': k = Tok::Colon; break;
        case ';': k = Tok::Semicolon; break;
        case ',': k = Tok::Comma; break;
        default:
            throw ParseError(pos_ + 1, std::string("unexpected character '") +
                                           c + "'");
        }
        tok_ = {k, std::string(1, c), 0.0, pos_ + 1};
        ++pos_;
    }

private:
    const std::string& src_;
    std::size_t pos_ = 0;
    Token tok_;
};

// ---------------------------------------------------------------------------
// Recursive-descent parser.
//
//   def      := piece (";" piece)* [";"]
//   piece    := "piece" interval ":" expr
//   interval := ("("|"[") bound "," bound (")"|"]")
//   bound    := ["-"] (number | "inf" | "log2" | "e" | "pi")
//   expr     := term (("+"|"-") term)*
//   term     := unary (("*"|"/") unary)*
//   unary    := "-" unary | power
//   power    := atom ["^" unary]          (right associative)
//   atom     := number | ident | func "(" expr ")" | "(" expr ")"

class Parser {
public:
    explicit Parser(const std::string& src) : lex_(src) {}

    std::vector<Piece> parse_pieces() {
        std::vector<Piece> pieces;
        pieces.push_back(parse_piece());
        while (lex_.tok().kind == Tok::Semicolon) {
            lex_.advance();
            if (lex_.tok().kind == Tok::End) break; // trailing ';'
            pieces.push_back(parse_piece());
        }
        expect(Tok::End, "end of input");
        return pieces;
    }

    ExprPtr parse_single_expr() {
        ExprPtr e = parse_expr();
        expect(Tok::End, "end of input");
        return e;
    }

private:
    [[noreturn]] void fail(const std::string& expected) {
        const Token& t = lex_.tok();
        std::string got =
            t.kind == Tok::End ? "end of input" : "'" + t.text + "'";
        throw ParseError(t.offset, "expected " + expected + ", got " + got);
    }

    void expect(Tok kind, const std::string& what) {
        if (lex_.tok().kind != kind) fail(what);
    }

    void consume(Tok kind, const std::string& what) {
        expect(kind, what);
        lex_.advance();
    }

    Piece parse_piece() {
        consume(Tok::KwPiece, "'piece'");
        PieceInterval iv = parse_interval();
        consume(Tok::Colon, "':'");
        ExprPtr body = parse_expr();
        return {iv, std::move(body)};
    }

    PieceInterval parse_interval() {
        PieceInterval iv;
        if (lex_.tok().kind == Tok::LParen)
            iv.lo_closed = false;
        else if (lex_.tok().kind == Tok::LBracket)
            iv.lo_closed = true;
        else
            fail("'(' or '['");
        lex_.advance();
        iv.lo = parse_bound();
        consume(Tok::Comma, "','");
        iv.hi = parse_bound();
        if (lex_.tok().kind == Tok::RParen)
            iv.hi_closed = false;
        else if (lex_.tok().kind == Tok::RBracket)
            iv.hi_closed = true;
        else
            fail("')' or ']'");
        std::size_t at = lex_.tok().offset;
        lex_.advance();
        if (!(iv.lo < iv.hi))
            throw ParseError(at, "interval bounds must satisfy lo < hi");
        if (std::isinf(iv.lo) && iv.lo_closed)
            throw ParseError(at, "infinite endpoint must be open");
        if (std::isinf(iv.hi) && iv.hi_closed)
            throw ParseError(at, "infinite endpoint must be open");
        return iv;
    }

    double parse_bound() {
        bool neg = false;
        if (lex_.tok().kind == Tok::Minus) {
            neg = true;
            lex_.advance();
        }
        double v;
        if (lex_.tok().kind == Tok::Number) {
            v = lex_.tok().number;
        } else if (lex_.tok().kind == Tok::Ident) {
            const std::string& w = lex_.tok().text;
            if (w == "inf")
                v = kInf;
            else if (is_named_constant(w))
                v = named_constant_value(w);
            else
                fail("interval bound");
        } else {
            fail("interval bound");
        }
        lex_.advance();
        return neg ? -v : v;
    }

    ExprPtr parse_expr() {
        ExprPtr lhs = parse_term();
        while (lex_.tok().kind == Tok::Plus ||
               lex_.tok().kind == Tok::Minus) {
            bool add = lex_.tok().kind == Tok::Plus;
            lex_.advance();
            ExprPtr rhs = parse_term();
            lhs = make_binary(add ? ExprNode::Kind::Add : ExprNode::Kind::Sub,
                              std::move(lhs), std::move(rhs));
        }
        return lhs;
    }

    ExprPtr parse_term() {
        ExprPtr lhs = parse_unary();
        while (lex_.tok().kind == Tok::Star ||
               lex_.tok().kind == Tok::Slash) {
            bool mul = lex_.tok().kind == Tok::Star;
            lex_.advance();
            ExprPtr rhs = parse_unary();
            lhs = make_binary(mul ? ExprNode::Kind::Mul : ExprNode::Kind::Div,
                              std::move(lhs), std::move(rhs));
        }
        return lhs;
    }

    ExprPtr parse_unary() {
        if (lex_.tok().kind == Tok::Minus) {
            lex_.advance();
            ExprPtr arg = parse_unary();
            // Fold a negated bare literal into a negative constant.
            if (arg->kind == ExprNode::Kind::Constant && arg->name.empty())
                return make_constant(-arg->value);
            return make_unary(ExprNode::Kind::Neg, std::move(arg));
        }
        return parse_power();
    }

    ExprPtr parse_power() {
        ExprPtr base = parse_atom();
        if (lex_.tok().kind == Tok::Caret) {
            lex_.advance();
            ExprPtr exponent = parse_unary();
            return make_binary(ExprNode::Kind::Pow, std::move(base),
                               std::move(exponent));
        }
        return base;
    }

    ExprPtr parse_atom() {
        const Token t = lex_.tok();
        if (t.kind == Tok::Number) {
            lex_.advance();
            return make_constant(t.number);
        }
        if (t.kind == Tok::LParen) {
            lex_.advance();
            ExprPtr inner = parse_expr();
            consume(Tok::RParen, "')'");
            return inner;
        }
        if (t.kind == Tok::Ident) {
            if (t.text == "inf")
                throw ParseError(t.offset,
                                 "'inf' is only allowed as an interval bound");
            lex_.advance();
            if (is_function_name(t.text)) {
                consume(Tok::LParen, "'(' after function name");
                ExprPtr arg = parse_expr();
                consume(Tok::RParen, "')'");
                ExprNode::Kind k = t.text == "exp" ? ExprNode::Kind::Exp
                                   : t.text == "log" ? ExprNode::Kind::Log
                                                     : ExprNode::Kind::Abs;
                return make_unary(k, std::move(arg));
            }
            if (is_named_constant(t.text)) return make_named_constant(t.text);
            return make_variable(t.text);
        }
        fail("number, identifier or '('");
    }

    Lexer lex_;
};

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string format_bound(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    return format_double(v);
}

void print_rec(const ExprNode& e, std::string& out) {
    using K = ExprNode::Kind;
    auto binary = [&](const char* op) {
        out += '(';
        print_rec(*e.lhs, out);
        out += ' ';
        out += op;
        out += ' ';
        print_rec(*e.rhs, out);
        out += ')';
    };
    auto func = [&](const char* name) {
        out += name;
        out += '(';
        print_rec(*e.lhs, out);
        out += ')';
    };
    switch (e.kind) {
    case K::Constant:
        out += e.name.empty() ? format_double(e.value) : e.name;
        break;
    case K::Variable: out += e.name; break;
    case K::Add: binary("+"); break;
    case K::Sub: binary("-"); break;
    case K::Mul: binary("*"); break;
    case K::Div: binary("/"); break;
    case K::Pow: binary("^"); break;
    case K::Neg:
        out += "(-";
        print_rec(*e.lhs, out);
        out += ')';
        break;
    case K::Exp: func("exp"); break;
    case K::Log: func("log"); break;
    case K::Abs: func("abs"); break;
    }
}

} // namespace

ExprPtr make_constant(double value) {
    auto n = std::make_shared<ExprNode>();
    n->kind = ExprNode::Kind::Constant;
    n->value = value;
    return n;
}

ExprPtr make_named_constant(const std::string& name) {
    auto n = std::make_shared<ExprNode>();
    n->kind = ExprNode::Kind::Constant;
    n->value = named_constant_value(name);
    n->name = name;
    return n;
}

ExprPtr make_variable(const std::string& name) {
    auto n = std::make_shared<ExprNode>();
    n->kind = ExprNode::Kind::Variable;
    n->name = name;
    return n;
}

ExprPtr make_unary(ExprNode::Kind kind, ExprPtr arg) {
    auto n = std::make_shared<ExprNode>();
    n->kind = kind;
    n->lhs = std::move(arg);
    return n;
}

ExprPtr make_binary(ExprNode::Kind kind, ExprPtr lhs, ExprPtr rhs) {
    auto n = std::make_shared<ExprNode>();
    n->kind = kind;
    n->lhs = std::move(lhs);
    n->rhs = std::move(rhs);
    return n;
}

bool same_tree(const ExprNode& x, const ExprNode& y) {
    if (x.kind != y.kind || x.name != y.name) return false;
    if (x.kind == ExprNode::Kind::Constant && x.value != y.value) return false;
    if (static_cast<bool>(x.lhs) != static_cast<bool>(y.lhs)) return false;
    if (static_cast<bool>(x.rhs) != static_cast<bool>(y.rhs)) return false;
    if (x.lhs && !same_tree(*x.lhs, *y.lhs)) return false;
    if (x.rhs && !same_tree(*x.rhs, *y.rhs)) return false;
    return true;
}

double eval_tree(const ExprNode& e, double x) {
    double v = eval_rec<double>(e, x);
    if (!std::isfinite(v)) domain_fault("evaluation produced non-finite value");
    return v;
}

double eval_tree_derivative(const ExprNode& e, double x) {
    Dual seed{x, 1.0, false};
    Dual r = eval_rec<Dual>(e, seed);
    if (!std::isfinite(r.v) || !std::isfinite(r.d))
        domain_fault("evaluation produced non-finite value");
    return r.d;
}

std::string print_tree(const ExprNode& e) {
    std::string out;
    print_rec(e, out);
    return out;
}

PiecewiseExpr PiecewiseExpr::parse(const std::string& source) {
    Parser parser(source);
    std::vector<Piece> pieces = parser.parse_pieces();

    std::set<std::string> vars;
    for (const Piece& p : pieces) collect_variables(*p.body, vars);
    if (vars.size() > 1) {
        std::string names;
        for (const auto& v : vars) names += (names.empty() ? "" : ", ") + v;
        throw Error("multiple_variables",
                    "expressions use more than one variable: " + names);
    }
    std::string variable = vars.empty() ? "x" : *vars.begin();
    return PiecewiseExpr(std::move(pieces), std::move(variable));
}

PiecewiseExpr::PiecewiseExpr(std::vector<Piece> pieces, std::string variable)
    : pieces_(std::move(pieces)), variable_(std::move(variable)) {
    std::stable_sort(pieces_.begin(), pieces_.end(),
                     [](const Piece& a, const Piece& b) {
                         return a.interval.lo < b.interval.lo;
                     });
    validate();
}

void PiecewiseExpr::validate() const {
    if (pieces_.empty())
        throw Error("empty_definition", "at least one piece is required");
    for (std::size_t i = 0; i + 1 < pieces_.size(); ++i) {
        const PieceInterval& l = pieces_[i].interval;
        const PieceInterval& r = pieces_[i + 1].interval;
        if (r.lo < l.hi)
            throw Error("overlapping_pieces",
                        "pieces overlap near x = " + format_bound(r.lo));
        if (r.lo > l.hi)
            throw Error("domain_gap", "uncovered gap between x = " +
                                          format_bound(l.hi) + " and x = " +
                                          format_bound(r.lo));
        if (!l.hi_closed && !r.lo_closed)
            throw Error("domain_gap",
                        "point x = " + format_bound(l.hi) +
                            " is excluded by both neighbouring pieces");
        // Shared endpoint: the stored definitions are meant to be continuous.
        double z = l.hi;
        double vl, vr;
        try {
            vl = eval_tree(*pieces_[i].body, z);
            vr = eval_tree(*pieces_[i + 1].body, z);
        } catch (const Error& e) {
            throw Error("discontinuous_pieces",
                        std::string("cannot evaluate both sides at shared "
                                    "endpoint x = ") +
                            format_bound(z) + ": " + e.what());
        }
        if (std::abs(vl - vr) > kContinuityTol)
            throw Error("discontinuous_pieces",
                        "pieces disagree at shared endpoint x = " +
                            format_bound(z) + " (" + format_double(vl) +
                            " vs " + format_double(vr) + ")");
    }
}

bool PiecewiseExpr::domain_contains(double x) const {
    for (const Piece& p : pieces_)
        if (p.interval.contains(x)) return true;
    return false;
}

const Piece& PiecewiseExpr::piece_at(double x) const {
    for (const Piece& p : pieces_)
        if (p.interval.contains(x)) return p;
    throw Error("outside_domain",
                "x = " + format_double(x) + " is outside the declared domain");
}

double PiecewiseExpr::eval(double x) const {
    return eval_tree(*piece_at(x).body, x);
}

double PiecewiseExpr::derivative(double x) const {
    for (const Piece& p : pieces_) {
        if (p.interval.lo < x && x < p.interval.hi)
            return eval_tree_derivative(*p.body, x);
    }
    if (domain_contains(x))
        throw Error("derivative_at_boundary",
                    "x = " + format_double(x) +
                        " is a piece boundary; use a one-sided query");
    throw Error("outside_domain",
                "x = " + format_double(x) + " is outside the declared domain");
}

double PiecewiseExpr::derivative_side(double x, Side side) const {
    for (const Piece& p : pieces_) {
        bool inside = side == Side::Left
                          ? (p.interval.lo < x && x <= p.interval.hi)
                          : (p.interval.lo <= x && x < p.interval.hi);
        if (inside) return eval_tree_derivative(*p.body, x);
    }
    throw Error("outside_domain",
                "x = " + format_double(x) +
                    " has no piece on the requested side");
}

std::vector<double> PiecewiseExpr::breakpoints() const {
    std::vector<double> out;
    for (std::size_t i = 0; i + 1 < pieces_.size(); ++i)
        out.push_back(pieces_[i].interval.hi);
    return out;
}

std::string PiecewiseExpr::pretty() const {
    std::string out;
    for (std::size_t i = 0; i < pieces_.size(); ++i) {
        const Piece& p = pieces_[i];
        out += "piece ";
        out += p.interval.lo_closed ? '[' : '(';
        out += format_bound(p.interval.lo);
        out += ", ";
        out += format_bound(p.interval.hi);
        out += p.interval.hi_closed ? ']' : ')';
        out += ": ";
        out += print_tree(*p.body);
        out += ";";
        if (i + 1 < pieces_.size()) out += ' ';
    }
    return out;
}

double parse_scalar(const std::string& source) {
    Parser parser(source);
    ExprPtr e = parser.parse_single_expr();
    std::set<std::string> vars;
    collect_variables(*e, vars);
    if (!vars.empty())
        throw Error("unexpected_variable",
                    "scalar expression must not reference a variable");
    return eval_tree(*e, 0.0);
}

} // namespace iterfix
