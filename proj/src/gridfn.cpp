#include "iterfix/gridfn.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <string>

namespace iterfix {

namespace {

std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

} // namespace

double clamp_into(double x, double lo, double hi, const char* code) {
    if (x < lo) {
        if (lo - x > kRangeSlack)
            throw Error(code, "value " + num(x) + " below " + num(lo));
        return lo;
    }
    if (x > hi) {
        if (x - hi > kRangeSlack)
            throw Error(code, "value " + num(x) + " above " + num(hi));
        return hi;
    }
    return x;
}

GridFunction::GridFunction(Interval interval, std::vector<double> nodes,
                           std::vector<double> values,
                           std::vector<double> derivs)
    : interval_(interval),
      nodes_(std::move(nodes)),
      values_(std::move(values)),
      derivs_(std::move(derivs)) {
    if (!(interval_.a < interval_.b))
        throw Error("bad_interval", "interval requires a < b");
    if (nodes_.size() < 2 || values_.size() != nodes_.size() ||
        derivs_.size() != nodes_.size())
        throw Error("bad_grid", "need N >= 2 nodes with matching value and "
                                "derivative arrays");
    if (nodes_.front() != interval_.a || nodes_.back() != interval_.b)
        throw Error("bad_grid", "nodes must start at a and end at b");
    for (std::size_t i = 0; i + 1 < nodes_.size(); ++i)
        if (!(nodes_[i] < nodes_[i + 1]))
            throw Error("bad_grid", "nodes must be strictly increasing");
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        if (!std::isfinite(values_[i]) || !std::isfinite(derivs_[i]))
            throw Error("bad_grid", "non-finite sample");
        values_[i] =
            clamp_into(values_[i], interval_.a, interval_.b, "range_violation");
    }
}

GridFunction GridFunction::identity(Interval interval, int n_nodes) {
    if (n_nodes < 2) throw Error("bad_grid", "need N >= 2 nodes");
    std::vector<double> nodes(static_cast<std::size_t>(n_nodes));
    double h = interval.length() / (n_nodes - 1);
    for (int i = 0; i < n_nodes; ++i) nodes[static_cast<std::size_t>(i)] = interval.a + i * h;
    nodes.back() = interval.b;
    std::vector<double> values = nodes;
    std::vector<double> derivs(nodes.size(), 1.0);
    return GridFunction(interval, std::move(nodes), std::move(values),
                        std::move(derivs));
}

std::size_t GridFunction::locate(double x) const {
    auto it = std::upper_bound(nodes_.begin(), nodes_.end(), x);
    std::size_t idx = static_cast<std::size_t>(it - nodes_.begin());
    if (idx == 0) return 0;
    if (idx >= nodes_.size()) return nodes_.size() - 2;
    return idx - 1;
}

double GridFunction::evaluate(double x) const {
    x = clamp_into(x, interval_.a, interval_.b, "outside_domain");
    std::size_t i = locate(x);
    double h = nodes_[i + 1] - nodes_[i];
    double t = (x - nodes_[i]) / h;
    double t2 = t * t, t3 = t2 * t;
    double h00 = 2 * t3 - 3 * t2 + 1;
    double h10 = t3 - 2 * t2 + t;
    double h01 = -2 * t3 + 3 * t2;
    double h11 = t3 - t2;
    return h00 * values_[i] + h10 * h * derivs_[i] + h01 * values_[i + 1] +
           h11 * h * derivs_[i + 1];
}

double GridFunction::derivative(double x) const {
    x = clamp_into(x, interval_.a, interval_.b, "outside_domain");
    std::size_t i = locate(x);
    double h = nodes_[i + 1] - nodes_[i];
    double t = (x - nodes_[i]) / h;
    double t2 = t * t;
    // Grouped around the cell secant so no 1/h-amplified cancellation
    // enters; exact at both nodes.
    double secant = (values_[i + 1] - values_[i]) / h;
    double g10 = 3 * t2 - 4 * t + 1;
    double g11 = 3 * t2 - 2 * t;
    return (6 * t - 6 * t2) * secant + g10 * derivs_[i] +
           g11 * derivs_[i + 1];
}

void GridFunction::write_csv(std::ostream& os) const {
    os << "x,value,deriv\n";
    char buf[128];
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g\n", nodes_[i],
                      values_[i], derivs_[i]);
        os << buf;
    }
}

GridFunction compose(const GridFunction& f, const GridFunction& g) {
    const std::size_t n = g.nodes().size();
    std::vector<double> values(n), derivs(n);
    for (std::size_t i = 0; i < n; ++i) {
        double y = clamp_into(g.values()[i], f.interval().a, f.interval().b,
                              "range_violation");
        values[i] = f.evaluate(y);
        derivs[i] = f.derivative(y) * g.derivs()[i];
    }
    return GridFunction(g.interval(), g.nodes(), std::move(values),
                        std::move(derivs));
}

GridFunction iterate(const GridFunction& f, int k) {
    if (k < 0) throw Error("bad_argument", "iterate order must be >= 0");
    GridFunction acc = GridFunction(
        f.interval(), f.nodes(), f.nodes(),
        std::vector<double>(f.nodes().size(), 1.0)); // f^0 = id on f's nodes
    for (int j = 0; j < k; ++j) acc = compose(f, acc);
    return acc;
}

double iterate_value(const GridFunction& f, int k, double x) {
    double v = clamp_into(x, f.interval().a, f.interval().b, "outside_domain");
    for (int j = 0; j < k; ++j)
        v = f.evaluate(
            clamp_into(v, f.interval().a, f.interval().b, "range_violation"));
    return v;
}

double invert_monotone(const GridFunction& f, double y, double tol) {
    if (!(tol > 0)) throw Error("bad_argument", "tolerance must be positive");
    for (double d : f.derivs())
        if (!(d > 0))
            throw Error("non_monotone",
                        "sampled derivative is not strictly positive");
    for (std::size_t i = 0; i + 1 < f.values().size(); ++i)
        if (!(f.values()[i] < f.values()[i + 1]))
            throw Error("non_monotone", "sampled values are not increasing");

    y = clamp_into(y, f.values().front(), f.values().back(), "out_of_range");

    // Bracket by node values, then Newton with bisection safeguard. Newton is
    // run to stagnation so the returned point is as sharp as the arithmetic
    // allows, not merely within tol.
    auto it = std::upper_bound(f.values().begin(), f.values().end(), y);
    std::size_t i = it == f.values().begin()
                        ? 0
                        : static_cast<std::size_t>(it - f.values().begin()) - 1;
    if (i >= f.values().size() - 1) i = f.values().size() - 2;

    double lo = f.nodes()[i], hi = f.nodes()[i + 1];
    double vl = f.values()[i], vr = f.values()[i + 1];
    if (y == vl) return lo;
    if (y == vr) return hi;

    double x = lo + (hi - lo) * (y - vl) / (vr - vl);
    double best_x = x;
    double best_err = std::numeric_limits<double>::infinity();
    for (int iter = 0; iter < 120; ++iter) {
        double fx = f.evaluate(x);
        double err = std::abs(fx - y);
        if (err < best_err) {
            best_err = err;
            best_x = x;
        }
        if (err == 0.0) break;
        if (fx < y)
            lo = x;
        else
            hi = x;
        double d = f.derivative(x);
        double next = d > 0 ? x - (fx - y) / d : x;
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        if (std::abs(next - x) <=
            4 * std::numeric_limits<double>::epsilon() *
                (std::abs(x) + std::abs(next)))
            break;
        x = next;
    }
    if (best_err > tol)
        throw Error("inversion_failed",
                    "could not reach the requested inversion tolerance");
    return best_x;
}

double c1_distance(const GridFunction& f, const GridFunction& g) {
    if (f.size() != g.size())
        throw Error("grid_mismatch", "grids have different node counts");
    double dv = 0.0, dd = 0.0;
    for (std::size_t i = 0; i < f.nodes().size(); ++i) {
        if (std::abs(f.nodes()[i] - g.nodes()[i]) > kRangeSlack)
            throw Error("grid_mismatch", "grids have different nodes");
        dv = std::max(dv, std::abs(f.values()[i] - g.values()[i]));
        dd = std::max(dd, std::abs(f.derivs()[i] - g.derivs()[i]));
    }
    return dv + dd;
}

} // namespace iterfix
