#pragma once

#include <iosfwd>
#include <span>
#include <vector>

#include "iterfix/error.hpp"

namespace iterfix {

struct Interval {
    double a = 0.0;
    double b = 1.0;

    double length() const noexcept { return b - a; }
};

// The triple (delta, M, M*) plus the interval it refers to; parameterizes
// the derivative-band / derivative-Lipschitz function classes.
struct ClassParams {
    double delta = 0.0;
    double M = 0.0;
    double Mstar = 0.0;
    Interval interval;
};

// A C^1 self-map of a compact interval stored as sampled value/derivative
// pairs. Between nodes the function is the cubic Hermite interpolant of the
// stored data, so the represented map is C^1 by construction. Immutable.
class GridFunction {
public:
    GridFunction(Interval interval, std::vector<double> nodes,
                 std::vector<double> values, std::vector<double> derivs);

    static GridFunction identity(Interval interval, int n_nodes);

    double evaluate(double x) const;
    double derivative(double x) const;

    const Interval& interval() const noexcept { return interval_; }
    const std::vector<double>& nodes() const noexcept { return nodes_; }
    const std::vector<double>& values() const noexcept { return values_; }
    const std::vector<double>& derivs() const noexcept { return derivs_; }
    int size() const noexcept { return static_cast<int>(nodes_.size()); }

    // CSV with header x,value,deriv, one row per node, 17 significant digits.
    void write_csv(std::ostream& os) const;

private:
    std::size_t locate(double x) const;

    Interval interval_;
    std::vector<double> nodes_;
    std::vector<double> values_;
    std::vector<double> derivs_;
};

// Endpoint noise up to this size is clamped onto the interval; anything
// larger is a range violation.
constexpr double kRangeSlack = 1e-12;

// Clamps x into [lo, hi] when it is within kRangeSlack of the interval,
// throws Error(code) otherwise.
double clamp_into(double x, double lo, double hi, const char* code);

// f(g(x)) sampled on g's nodes with chain-rule derivatives.
GridFunction compose(const GridFunction& f, const GridFunction& g);

// k-fold self-composition; iterate(f, 0) is the identity on f's nodes.
GridFunction iterate(const GridFunction& f, int k);

// Nested evaluation of f^k(x) (no resampling between levels).
double iterate_value(const GridFunction& f, int k, double x);

// Solves f(x) = y for strictly increasing f by bisection-bracketed Newton;
// the result satisfies |f(x) - y| <= tol. The inverse derivative at the
// returned point is 1 / derivative(f, x).
double invert_monotone(const GridFunction& f, double y, double tol);

// ||f - g||_C1 over shared nodes: max |value diff| + max |deriv diff|.
double c1_distance(const GridFunction& f, const GridFunction& g);

} // namespace iterfix
