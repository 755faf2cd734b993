#pragma once

#include <optional>
#include <string>
#include <vector>

#include "iterfix/expr.hpp"
#include "iterfix/gridfn.hpp"

namespace iterfix {

// Plain-text problem description with sections [lambda], [function G] or
// [function F], [interval], [params], [options]. '#' starts a comment.
// Scalar values (lambda entries, interval bounds, params) accept the
// expression grammar, e.g. "20*log2/9".
struct ProblemFile {
    std::vector<double> lambda;
    PiecewiseExpr function;
    bool function_is_G = true;
    Interval interval; // J when G is given, I when F is given
    double delta = 0.0;
    double M = 0.0;
    double Mstar = 0.0;

    std::optional<int> grid;
    std::optional<double> tol;
    std::optional<int> max_iters;
    std::optional<std::string> axis;
};

ProblemFile parse_problem_text(const std::string& text);
ProblemFile load_problem_file(const std::string& path);

} // namespace iterfix
