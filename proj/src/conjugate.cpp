#include "iterfix/conjugate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace iterfix {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

ExprPtr substitute(const ExprNode& e, const ExprPtr& replacement) {
    if (e.kind == ExprNode::Kind::Variable) return replacement;
    if (!e.lhs) {
        auto n = std::make_shared<ExprNode>(e);
        return n;
    }
    auto n = std::make_shared<ExprNode>();
    n->kind = e.kind;
    n->value = e.value;
    n->name = e.name;
    n->lhs = substitute(*e.lhs, replacement);
    if (e.rhs) n->rhs = substitute(*e.rhs, replacement);
    return n;
}

// Log-spaced sample of the positive axis around the finite breakpoints of G,
// three decades out on either side.
std::vector<double> positive_axis_mesh(const PiecewiseExpr& G, int per_decade) {
    double lo = kInf, hi = 0.0;
    for (const Piece& p : G.pieces()) {
        if (std::isfinite(p.interval.lo) && p.interval.lo > 0)
            lo = std::min(lo, p.interval.lo);
        if (std::isfinite(p.interval.hi) && p.interval.hi > 0) {
            lo = std::min(lo, p.interval.hi);
            hi = std::max(hi, p.interval.hi);
        }
    }
    if (!std::isfinite(lo) || hi <= 0.0) {
        lo = 1.0;
        hi = 1.0;
    }
    double la = std::log(lo) - 3.0 * std::log(10.0);
    double lb = std::log(hi) + 3.0 * std::log(10.0);
    int n = std::max(2, static_cast<int>((lb - la) / std::log(10.0)) *
                            per_decade);
    std::vector<double> mesh(static_cast<std::size_t>(n) + 1);
    for (int i = 0; i <= n; ++i)
        mesh[static_cast<std::size_t>(i)] = std::exp(la + (lb - la) * i / n);
    return mesh;
}

} // namespace

double derivative_on_interval(const PiecewiseExpr& e, double x,
                              Interval interval) {
    if (x == interval.a) return e.derivative_side(x, Side::Right);
    if (x == interval.b) return e.derivative_side(x, Side::Left);
    try {
        return e.derivative(x);
    } catch (const Error& err) {
        if (err.code() == std::string("derivative_at_boundary"))
            return e.derivative_side(x, Side::Left);
        throw;
    }
}

GridFunction sample_to_grid(const PiecewiseExpr& e, Interval interval,
                            int n_nodes) {
    if (n_nodes < 2) throw Error("bad_grid", "need N >= 2 nodes");
    std::vector<double> nodes(static_cast<std::size_t>(n_nodes));
    double h = interval.length() / (n_nodes - 1);
    for (int i = 0; i < n_nodes; ++i)
        nodes[static_cast<std::size_t>(i)] = interval.a + i * h;
    nodes.back() = interval.b;
    std::vector<double> values(nodes.size()), derivs(nodes.size());
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        values[i] = e.eval(nodes[i]);
        derivs[i] = derivative_on_interval(e, nodes[i], interval);
    }
    return GridFunction(interval, std::move(nodes), std::move(values),
                        std::move(derivs));
}

PiecewiseExpr reduce_G_to_F(const PiecewiseExpr& G) {
    for (double x : positive_axis_mesh(G, 64)) {
        if (!G.domain_contains(x)) continue;
        if (G.eval(x) <= 0.0)
            throw Error("nonpositive_G",
                        "G must be positive on the positive axis");
    }
    ExprPtr exp_x = make_unary(ExprNode::Kind::Exp,
                               make_variable(G.variable()));
    std::vector<Piece> mapped;
    mapped.reserve(G.pieces().size());
    for (const Piece& p : G.pieces()) {
        PieceInterval iv;
        iv.lo = p.interval.lo <= 0.0 ? -kInf : std::log(p.interval.lo);
        iv.hi = std::isinf(p.interval.hi) ? kInf : std::log(p.interval.hi);
        iv.lo_closed = std::isinf(iv.lo) ? false : p.interval.lo_closed;
        iv.hi_closed = std::isinf(iv.hi) ? false : p.interval.hi_closed;
        ExprPtr body =
            make_unary(ExprNode::Kind::Log, substitute(*p.body, exp_x));
        mapped.push_back({iv, std::move(body)});
    }
    return PiecewiseExpr(std::move(mapped), G.variable());
}

GridFunction lift_f_to_g(const GridFunction& f) {
    const std::size_t n = f.nodes().size();
    std::vector<double> nodes(n), values(n), derivs(n);
    for (std::size_t i = 0; i < n; ++i) {
        nodes[i] = std::exp(f.nodes()[i]);
        values[i] = std::exp(f.values()[i]);
        derivs[i] = f.derivs()[i] * values[i] / nodes[i];
    }
    Interval J{nodes.front(), nodes.back()};
    return GridFunction(J, std::move(nodes), std::move(values),
                        std::move(derivs));
}

GridFunction lower_g_to_f(const GridFunction& g) {
    const std::size_t n = g.nodes().size();
    std::vector<double> nodes(n), values(n), derivs(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (g.nodes()[i] <= 0.0 || g.values()[i] <= 0.0)
            throw Error("nonpositive_G",
                        "logarithmic transport needs positive data");
        nodes[i] = std::log(g.nodes()[i]);
        values[i] = std::log(g.values()[i]);
        derivs[i] = g.derivs()[i] * g.nodes()[i] / g.values()[i];
    }
    Interval I{nodes.front(), nodes.back()};
    return GridFunction(I, std::move(nodes), std::move(values),
                        std::move(derivs));
}

bool lambda_all_integral(std::span<const double> lambda) {
    for (double l : lambda)
        if (!(std::isfinite(l) && l == std::nearbyint(l))) return false;
    return true;
}

long lambda_integral_sum(std::span<const double> lambda) {
    long s = 0;
    for (double l : lambda) s += static_cast<long>(std::nearbyint(l));
    return s;
}

PiecewiseExpr reduce_negative_axis(const PiecewiseExpr& G,
                                   std::span<const double> lambda) {
    if (!lambda_all_integral(lambda))
        throw Error("lambda_not_integer",
                    "the negative-axis reduction needs integer exponents");
    if (lambda_integral_sum(lambda) % 2 == 0)
        throw Error("lambda_sum_not_odd",
                    "the negative-axis reduction needs an odd exponent sum");
    ExprPtr neg_x = make_unary(ExprNode::Kind::Neg,
                               make_variable(G.variable()));
    std::vector<Piece> mapped;
    mapped.reserve(G.pieces().size());
    for (auto it = G.pieces().rbegin(); it != G.pieces().rend(); ++it) {
        PieceInterval iv;
        iv.lo = -it->interval.hi;
        iv.hi = -it->interval.lo;
        iv.lo_closed = it->interval.hi_closed;
        iv.hi_closed = it->interval.lo_closed;
        ExprPtr body = make_unary(ExprNode::Kind::Neg,
                                  substitute(*it->body, neg_x));
        mapped.push_back({iv, std::move(body)});
    }
    return PiecewiseExpr(std::move(mapped), G.variable());
}

GridFunction reflect_solution(const GridFunction& h) {
    const std::size_t n = h.nodes().size();
    std::vector<double> nodes(n), values(n), derivs(n);
    for (std::size_t i = 0; i < n; ++i) {
        nodes[i] = -h.nodes()[n - 1 - i];
        values[i] = -h.values()[n - 1 - i];
        derivs[i] = h.derivs()[n - 1 - i];
    }
    Interval J{nodes.front(), nodes.back()};
    return GridFunction(J, std::move(nodes), std::move(values),
                        std::move(derivs));
}

} // namespace iterfix
