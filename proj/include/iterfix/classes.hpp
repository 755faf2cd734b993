#pragma once

#include <optional>
#include <string>
#include <vector>

#include "iterfix/expr.hpp"
#include "iterfix/gridfn.hpp"

namespace iterfix {

// Degenerate parameter regimes: Empty when M < 1 or delta > 1, IdentityOnly
// when M = 1 or delta = 1, Nontrivial otherwise.
enum class RegimeClass { Empty, IdentityOnly, Nontrivial };

RegimeClass classify_regime(const ClassParams& p);
const char* regime_name(RegimeClass r);

struct Violation {
    std::string condition; // "(2)", "(4)", "(05)", "(06)", "(9)", "(10)",
                           // "(11)", "(12)", "endpoints", "range"
    std::vector<double> where; // witness point(s)
    double measured = 0.0;
    double bound = 0.0;
};

// Outcome of a sampled membership check. Membership is verified to sampling
// resolution, never proved; the verdict records the densities used so a
// failure is reproducible.
struct ClassVerdict {
    bool member = true;
    std::vector<Violation> violations;
    int samples_per_cell = 0;
    long pair_samples = 0;
    double tail_decades = 0.0;
    std::vector<std::string> unchecked;
};

// Dense-sampling density: interior points added per grid cell.
constexpr int kSamplesPerCell = 8;
// Tails of the real-axis conditions are sampled this many decades out.
constexpr double kTailDecades = 3.0;
// Endpoint-fixing and range conditions are measured against this tolerance.
constexpr double kEndpointTol = 1e-9;

// Membership of f in F_I(delta, M, M*): endpoints fixed, range I,
// delta <= f' <= M on I, |f'| <= M outside I (via tails when supplied),
// |f'(x) - f'(y)| <= M* |x - y| on I.
ClassVerdict check_F_class(const GridFunction& f,
                           const std::optional<PiecewiseExpr>& tails,
                           const ClassParams& p);

// Membership in A_I(delta, M, M*): as above with 0 <= f' <= M in place of
// the two-sided band; delta plays no role in the conditions.
ClassVerdict check_A_class(const GridFunction& f, const ClassParams& p);

// Membership of the expression g in G_J(delta, M, M*), with the logarithmic
// slope phi(x) = x g'(x) / g(x): delta <= phi <= M on J, |phi| <= M on the
// sampled tails, phi Lipschitz M* in log distance on J, endpoints fixed,
// range J. Throws Error("nonpositive_G") when a sample of g is <= 0.
ClassVerdict check_G_class(const PiecewiseExpr& g, Interval J,
                           const ClassParams& p);

// Membership of a grid g in B_J(delta, M, M*): 0 <= phi <= M and the (12)
// Lipschitz condition on J; tails (when supplied) are used for the range
// condition only.
ClassVerdict check_B_class(const GridFunction& g,
                           const std::optional<PiecewiseExpr>& tails,
                           Interval J, const ClassParams& p);

} // namespace iterfix
