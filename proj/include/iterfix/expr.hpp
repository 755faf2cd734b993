#pragma once

#include <memory>
#include <string>
#include <vector>

#include "iterfix/error.hpp"

namespace iterfix {

enum class Side { Left, Right };

struct ExprNode;
using ExprPtr = std::shared_ptr<const ExprNode>;

// Operator tree over {+, -, *, /, ^, exp, log, abs}, numeric literals, the
// named constants log2/e/pi, and a single free variable. Immutable after
// construction.
struct ExprNode {
    enum class Kind {
        Constant, // value (name non-empty for a named constant)
        Variable, // name
        Add,
        Sub,
        Mul,
        Div,
        Pow,
        Neg,
        Exp,
        Log,
        Abs,
    };

    Kind kind;
    double value = 0.0;
    std::string name;
    ExprPtr lhs;
    ExprPtr rhs;
};

ExprPtr make_constant(double value);
ExprPtr make_named_constant(const std::string& name); // log2, e, pi
ExprPtr make_variable(const std::string& name);
ExprPtr make_unary(ExprNode::Kind kind, ExprPtr arg);
ExprPtr make_binary(ExprNode::Kind kind, ExprPtr lhs, ExprPtr rhs);

bool same_tree(const ExprNode& x, const ExprNode& y);

// Evaluate the tree at variable = x. Domain faults (log of a non-positive
// number, division by zero, 0^negative, negative base with a non-integer
// exponent, non-finite result) throw Error("eval_domain_error").
double eval_tree(const ExprNode& e, double x);

// Exact derivative at x via forward-mode differentiation of the tree.
double eval_tree_derivative(const ExprNode& e, double x);

std::string print_tree(const ExprNode& e);

// Interval of a single piece; infinite endpoints are permitted and must be
// open.
struct PieceInterval {
    double lo = 0.0;
    double hi = 0.0;
    bool lo_closed = false;
    bool hi_closed = false;

    bool contains(double x) const {
        if (x < lo || (x == lo && !lo_closed)) return false;
        if (x > hi || (x == hi && !hi_closed)) return false;
        return true;
    }
};

struct Piece {
    PieceInterval interval;
    ExprPtr body;
};

// A function given piecewise by expressions on contiguous intervals.
// Pieces are kept sorted; at a shared endpoint both bodies must agree
// within kContinuityTol and evaluation uses the left piece.
class PiecewiseExpr {
public:
    static constexpr double kContinuityTol = 1e-9;

    static PiecewiseExpr parse(const std::string& source);
    PiecewiseExpr(std::vector<Piece> pieces, std::string variable);

    double eval(double x) const;

    // Derivative strictly inside a piece; throws
    // Error("derivative_at_boundary") at any piece endpoint.
    double derivative(double x) const;

    // One-sided derivative; usable at piece boundaries.
    double derivative_side(double x, Side side) const;

    std::string pretty() const;

    const std::vector<Piece>& pieces() const noexcept { return pieces_; }
    const std::string& variable() const noexcept { return variable_; }

    double domain_lo() const noexcept { return pieces_.front().interval.lo; }
    double domain_hi() const noexcept { return pieces_.back().interval.hi; }
    bool domain_contains(double x) const;

    // Interior breakpoints (shared endpoints between adjacent pieces).
    std::vector<double> breakpoints() const;

private:
    void validate() const;
    const Piece& piece_at(double x) const;

    std::vector<Piece> pieces_;
    std::string variable_;
};

// Parse and evaluate a variable-free expression ("20*log2/9", "1e-10", ...).
double parse_scalar(const std::string& source);

} // namespace iterfix
