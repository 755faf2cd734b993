#pragma once

#include <span>
#include <vector>

#include "iterfix/expr.hpp"
#include "iterfix/gridfn.hpp"

namespace iterfix {

// Realize a piecewise expression as a grid on [interval.a, interval.b] with
// n_nodes uniform nodes. Derivatives at the interval endpoints are taken
// one-sided from inside the interval; at interior breakpoints the left piece
// is used.
GridFunction sample_to_grid(const PiecewiseExpr& e, Interval interval,
                            int n_nodes);

// Derivative of e at x with the sampling convention above.
double derivative_on_interval(const PiecewiseExpr& e, double x,
                              Interval interval);

// F(x) = log G(e^x): piece intervals mapped by log, bodies composed
// symbolically. Requires G > 0 on a log-spaced sample mesh over R+.
PiecewiseExpr reduce_G_to_F(const PiecewiseExpr& G);

// g = exp . f . log on J = e^I, sampled on the image of f's nodes;
// g'(y) = f'(log y) * g(y) / y.
GridFunction lift_f_to_g(const GridFunction& f);

// f = log . g . exp on I = log J; inverse transport of lift_f_to_g.
GridFunction lower_g_to_f(const GridFunction& g);

// H(x) = -G(-x) with pieces reflected, for G defined on R-. Requires every
// lambda_k to be an integer and their sum to be odd.
PiecewiseExpr reduce_negative_axis(const PiecewiseExpr& G,
                                   std::span<const double> lambda);

// Transport of a solved map h on J subset of R+ back to the negative axis:
// g(x) = -h(-x) on -J.
GridFunction reflect_solution(const GridFunction& h);

bool lambda_all_integral(std::span<const double> lambda);
long lambda_integral_sum(std::span<const double> lambda);

} // namespace iterfix
