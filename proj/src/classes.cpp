#include "iterfix/classes.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "iterfix/conjugate.hpp"

namespace iterfix {

namespace {

// Rounding guard for boundary comparisons: fixtures may sit exactly on a
// class bound, and a 1-ulp difference between two algebraically equal
// quantities must not flip a verdict. This is measurement noise, not a
// safety margin.
bool leq(double value, double bound) {
    double scale = std::max({1.0, std::abs(value), std::abs(bound)});
    return value <= bound + 32 * std::numeric_limits<double>::epsilon() * scale;
}

struct Checker {
    ClassVerdict verdict;
    std::vector<double> excesses; // parallel to verdict.violations

    // One violation per condition id, keeping the worst offender.
    void record(const char* cond, double excess, double measured, double bound,
                std::vector<double> where) {
        verdict.member = false;
        for (std::size_t i = 0; i < verdict.violations.size(); ++i) {
            if (verdict.violations[i].condition == cond) {
                if (excess > excesses[i]) {
                    excesses[i] = excess;
                    verdict.violations[i].measured = measured;
                    verdict.violations[i].bound = bound;
                    verdict.violations[i].where = std::move(where);
                }
                return;
            }
        }
        verdict.violations.push_back({cond, std::move(where), measured, bound});
        excesses.push_back(excess);
    }

    void require_leq(const char* cond, double value, double bound,
                     std::vector<double> where) {
        if (leq(value, bound)) return;
        record(cond, value - bound, value, bound, std::move(where));
    }

    void require_geq(const char* cond, double value, double bound,
                     std::vector<double> where) {
        if (leq(bound, value)) return;
        record(cond, bound - value, value, bound, std::move(where));
    }
};

// Nodes plus kSamplesPerCell interior points per cell.
std::vector<double> dense_sample(const std::vector<double>& nodes) {
    std::vector<double> out;
    out.reserve(nodes.size() * (kSamplesPerCell + 1));
    for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
        out.push_back(nodes[i]);
        double h = nodes[i + 1] - nodes[i];
        for (int j = 1; j <= kSamplesPerCell; ++j)
            out.push_back(nodes[i] + h * j / (kSamplesPerCell + 1));
    }
    out.push_back(nodes.back());
    return out;
}

std::vector<double> uniform_nodes(Interval iv, int n) {
    std::vector<double> nodes(static_cast<std::size_t>(n));
    double h = iv.length() / (n - 1);
    for (int i = 0; i < n; ++i)
        nodes[static_cast<std::size_t>(i)] = iv.a + i * h;
    nodes.back() = iv.b;
    return nodes;
}

// Supremum of |g(x)-g(y)| / dist(x,y) over all pairs of a coarse subsample
// plus near-diagonal pairs of the dense sample; the supremum of a difference
// quotient of a C^1 function is attained near the diagonal.
template <typename Dist>
double max_quotient(const std::vector<double>& xs,
                    const std::vector<double>& gs, Dist dist, long& pairs,
                    double* wx, double* wy) {
    double best = 0.0;
    std::size_t n = xs.size();
    std::size_t stride = std::max<std::size_t>(1, n / 512);
    for (std::size_t i = 0; i < n; i += stride) {
        for (std::size_t j = i + stride; j < n; j += stride) {
            double d = dist(xs[i], xs[j]);
            if (d <= 0) continue;
            double q = std::abs(gs[i] - gs[j]) / d;
            ++pairs;
            if (q > best) {
                best = q;
                *wx = xs[i];
                *wy = xs[j];
            }
        }
    }
    std::size_t window = static_cast<std::size_t>(10 * (kSamplesPerCell + 1));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < std::min(n, i + window); ++j) {
            double d = dist(xs[i], xs[j]);
            if (d <= 0) continue;
            double q = std::abs(gs[i] - gs[j]) / d;
            ++pairs;
            if (q > best) {
                best = q;
                *wx = xs[i];
                *wy = xs[j];
            }
        }
    }
    return best;
}

void check_lipschitz(Checker& chk, const char* cond,
                     const std::vector<double>& xs,
                     const std::vector<double>& gs, double bound,
                     bool log_distance) {
    double wx = 0.0, wy = 0.0;
    long pairs = 0;
    double q = log_distance
                   ? max_quotient(
                         xs, gs,
                         [](double x, double y) {
                             return std::abs(std::log(x / y));
                         },
                         pairs, &wx, &wy)
                   : max_quotient(
                         xs, gs,
                         [](double x, double y) { return std::abs(x - y); },
                         pairs, &wx, &wy);
    chk.verdict.pair_samples += pairs;
    chk.require_leq(cond, q, bound, {wx, wy});
}

// Logarithmic slope x g'(x) / g(x) of an expression, derivative taken with
// the sampling convention of the interval.
double log_slope(const PiecewiseExpr& g, double x, Interval J) {
    double v = g.eval(x);
    if (v <= 0.0)
        throw Error("nonpositive_G",
                    "g is not positive at a sampled point");
    return x * derivative_on_interval(g, x, J) / v;
}

std::vector<double> log_spaced(double lo, double hi, int n) {
    std::vector<double> out(static_cast<std::size_t>(n));
    double la = std::log(lo), lb = std::log(hi);
    for (int i = 0; i < n; ++i)
        out[static_cast<std::size_t>(i)] =
            std::exp(la + (lb - la) * i / (n - 1));
    return out;
}

void check_interval_match(const Interval& got, const Interval& want) {
    if (std::abs(got.a - want.a) > kRangeSlack ||
        std::abs(got.b - want.b) > kRangeSlack)
        throw Error("interval_mismatch",
                    "function interval does not match the class parameters");
}

} // namespace

RegimeClass classify_regime(const ClassParams& p) {
    if (p.M < 1.0 || p.delta > 1.0) return RegimeClass::Empty;
    if (p.M == 1.0 || p.delta == 1.0) return RegimeClass::IdentityOnly;
    return RegimeClass::Nontrivial;
}

const char* regime_name(RegimeClass r) {
    switch (r) {
    case RegimeClass::Empty: return "Empty";
    case RegimeClass::IdentityOnly: return "IdentityOnly";
    case RegimeClass::Nontrivial: return "Nontrivial";
    }
    return "?";
}

ClassVerdict check_F_class(const GridFunction& f,
                           const std::optional<PiecewiseExpr>& tails,
                           const ClassParams& p) {
    check_interval_match(f.interval(), p.interval);
    Checker chk;
    chk.verdict.samples_per_cell = kSamplesPerCell;
    const double a = p.interval.a, b = p.interval.b;

    chk.require_leq("endpoints", std::abs(f.values().front() - a),
                    kEndpointTol, {a});
    chk.require_leq("endpoints", std::abs(f.values().back() - b), kEndpointTol,
                    {b});

    std::vector<double> xs = dense_sample(f.nodes());
    std::vector<double> ds(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) ds[i] = f.derivative(xs[i]);
    for (std::size_t i = 0; i < xs.size(); ++i) {
        chk.require_geq("(2)", ds[i], p.delta, {xs[i]});
        chk.require_leq("(2)", ds[i], p.M, {xs[i]});
    }
    check_lipschitz(chk, "(06)", xs, ds, p.Mstar, false);

    if (tails) {
        chk.verdict.tail_decades = kTailDecades;
        double span = kTailDecades * std::log(10.0);
        std::vector<double> mesh;
        int n_tail = 1024;
        for (int i = 0; i < n_tail; ++i) {
            mesh.push_back(a - span + span * i / n_tail);
            mesh.push_back(b + span * (i + 1) / n_tail);
        }
        for (double x : mesh) {
            if (!tails->domain_contains(x)) continue;
            double d;
            try {
                d = tails->derivative(x);
            } catch (const Error& e) {
                if (e.code() != std::string("derivative_at_boundary")) throw;
                d = tails->derivative_side(x, Side::Left);
            }
            chk.require_leq("(4)", std::abs(d), p.M, {x});
            double v = tails->eval(x);
            chk.require_leq("range", std::max(a - v, v - b), kEndpointTol,
                            {x});
        }
    } else {
        chk.verdict.unchecked.push_back("(4) unchecked outside I (no tails)");
        chk.verdict.unchecked.push_back(
            "range unchecked outside I (no tails)");
    }
    return chk.verdict;
}

ClassVerdict check_A_class(const GridFunction& f, const ClassParams& p) {
    check_interval_match(f.interval(), p.interval);
    Checker chk;
    chk.verdict.samples_per_cell = kSamplesPerCell;
    const double a = p.interval.a, b = p.interval.b;

    chk.require_leq("endpoints", std::abs(f.values().front() - a),
                    kEndpointTol, {a});
    chk.require_leq("endpoints", std::abs(f.values().back() - b), kEndpointTol,
                    {b});

    std::vector<double> xs = dense_sample(f.nodes());
    std::vector<double> ds(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) ds[i] = f.derivative(xs[i]);
    for (std::size_t i = 0; i < xs.size(); ++i) {
        chk.require_geq("(05)", ds[i], 0.0, {xs[i]});
        chk.require_leq("(05)", ds[i], p.M, {xs[i]});
    }
    check_lipschitz(chk, "(06)", xs, ds, p.Mstar, false);
    chk.verdict.unchecked.push_back("range unchecked outside I (grid data)");
    return chk.verdict;
}

ClassVerdict check_G_class(const PiecewiseExpr& g, Interval J,
                           const ClassParams& p) {
    if (!(J.a > 0.0))
        throw Error("bad_interval", "J must lie in the positive axis");
    check_interval_match(J, p.interval);
    if (!(g.domain_lo() <= 0.0) || !std::isinf(g.domain_hi()))
        throw Error("tails_required",
                    "g must be defined on all of the positive axis");

    Checker chk;
    chk.verdict.samples_per_cell = kSamplesPerCell;
    chk.verdict.tail_decades = kTailDecades;

    chk.require_leq("endpoints", std::abs(g.eval(J.a) - J.a), kEndpointTol,
                    {J.a});
    chk.require_leq("endpoints", std::abs(g.eval(J.b) - J.b), kEndpointTol,
                    {J.b});

    std::vector<double> xs = dense_sample(uniform_nodes(J, 1025));
    std::vector<double> phis(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i)
        phis[i] = log_slope(g, xs[i], J);
    for (std::size_t i = 0; i < xs.size(); ++i) {
        chk.require_geq("(9)", phis[i], p.delta, {xs[i]});
        chk.require_leq("(9)", phis[i], p.M, {xs[i]});
    }
    check_lipschitz(chk, "(12)", xs, phis, p.Mstar, true);

    double decade = std::pow(10.0, kTailDecades);
    std::vector<double> tail = log_spaced(J.a / decade, J.a, 1025);
    std::vector<double> right = log_spaced(J.b, J.b * decade, 1025);
    tail.pop_back(); // J endpoints belong to the (9) check
    right.erase(right.begin());
    tail.insert(tail.end(), right.begin(), right.end());
    for (double x : tail) {
        if (!g.domain_contains(x)) continue;
        double v = g.eval(x);
        if (v <= 0.0)
            throw Error("nonpositive_G", "g is not positive at a sampled point");
        double d;
        try {
            d = g.derivative(x);
        } catch (const Error& e) {
            if (e.code() != std::string("derivative_at_boundary")) throw;
            d = g.derivative_side(x, Side::Left);
        }
        chk.require_leq("(10)", std::abs(x * d / v), p.M, {x});
        chk.require_leq("range", std::max(J.a - v, v - J.b), kEndpointTol,
                        {x});
    }
    return chk.verdict;
}

ClassVerdict check_B_class(const GridFunction& g,
                           const std::optional<PiecewiseExpr>& tails,
                           Interval J, const ClassParams& p) {
    if (!(J.a > 0.0))
        throw Error("bad_interval", "J must lie in the positive axis");
    check_interval_match(g.interval(), J);
    check_interval_match(J, p.interval);

    Checker chk;
    chk.verdict.samples_per_cell = kSamplesPerCell;

    chk.require_leq("endpoints", std::abs(g.values().front() - J.a),
                    kEndpointTol, {J.a});
    chk.require_leq("endpoints", std::abs(g.values().back() - J.b),
                    kEndpointTol, {J.b});

    std::vector<double> xs = dense_sample(g.nodes());
    std::vector<double> phis(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
        double v = g.evaluate(xs[i]);
        if (v <= 0.0)
            throw Error("nonpositive_G",
                        "g is not positive at a sampled point");
        phis[i] = xs[i] * g.derivative(xs[i]) / v;
    }
    for (std::size_t i = 0; i < xs.size(); ++i) {
        chk.require_geq("(11)", phis[i], 0.0, {xs[i]});
        chk.require_leq("(11)", phis[i], p.M, {xs[i]});
    }
    check_lipschitz(chk, "(12)", xs, phis, p.Mstar, true);

    if (tails) {
        chk.verdict.tail_decades = kTailDecades;
        double decade = std::pow(10.0, kTailDecades);
        std::vector<double> mesh = log_spaced(J.a / decade, J.b * decade, 2049);
        for (double x : mesh) {
            if (x >= J.a && x <= J.b) continue;
            if (!tails->domain_contains(x)) continue;
            double v = tails->eval(x);
            chk.require_leq("range", std::max(J.a - v, v - J.b), kEndpointTol,
                            {x});
        }
    } else {
        chk.verdict.unchecked.push_back(
            "range unchecked outside J (no tails)");
    }
    return chk.verdict;
}

} // namespace iterfix
