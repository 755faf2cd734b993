#pragma once

#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "iterfix/classes.hpp"
#include "iterfix/constants.hpp"
#include "iterfix/conjugate.hpp"
#include "iterfix/expr.hpp"
#include "iterfix/gridfn.hpp"

namespace iterfix {

// A problem in the additive form sum lambda_k f^k = F on I, optionally
// carrying the original multiplicative G it was reduced from.
struct ProblemSpec {
    std::vector<double> lambda;
    PiecewiseExpr F;
    std::optional<PiecewiseExpr> G; // triggers the lifted solution + residual
    Interval I;
    ClassParams params; // delta, M, Mstar on I
    int grid_size = 1025;
    double tol = 1e-10;
    int max_iters = 200;
};

struct SolveReport {
    GridFunction f;
    std::optional<GridFunction> g; // lifted solution on J = e^I
    std::vector<double> lambda;
    int iterations = 0;             // number of operator applications
    std::vector<double> distances;  // d_m = ||f_{m+1} - f_m||_C1
    double apriori_bound = 0.0;     // K^m / (1 - K) * d_0
    double aposteriori_bound = 0.0; // K / (1 - K) * d_last
    double residual_star = 0.0;
    std::optional<double> residual_product;
    ConstantSet constants;
    ClassVerdict input_verdict;    // F against F_I(delta, lambda1 M, M*)
    ClassVerdict solution_verdict; // f against A_I(., M, M')
};

// Thrown by solve() when the contraction hypotheses fail; carries the
// computed constants for reporting.
class HypothesisError : public Error {
public:
    HypothesisError(std::string reason_code, ConstantSet cs)
        : Error("hypothesis_failure",
                "contraction hypotheses fail: " + reason_code),
          reason_(std::move(reason_code)),
          constants_(std::move(cs)) {}

    const std::string& reason() const noexcept { return reason_; }
    const ConstantSet& constants() const noexcept { return constants_; }

private:
    std::string reason_;
    ConstantSet constants_;
};

// Thrown by solve() when the input fails its class membership gate.
class ClassError : public Error {
public:
    explicit ClassError(ClassVerdict verdict)
        : Error("class_not_member",
                "input is not a member of the required function class"),
          verdict_(std::move(verdict)) {}

    const ClassVerdict& verdict() const noexcept { return verdict_; }

private:
    ClassVerdict verdict_;
};

// Reason code for a failed hypothesis set, in gate order; empty when ok.
std::string hypothesis_reason(const ConstantSet& cs);

// L_f = sum_k lambda_k f^{k-1} on f's nodes, derivatives by the chain rule,
// endpoints pinned to a and b.
GridFunction build_L(const GridFunction& f, std::span<const double> lambda);

// One application of the solution operator: (Tf)(x) = L_f^{-1}(F(x)) with
// (Tf)'(x) = F'(x) / L_f'(Tf(x)). inversion_tol bounds |L_f(Tf(x)) - F(x)|.
GridFunction apply_T(const GridFunction& f, const PiecewiseExpr& F,
                     std::span<const double> lambda, double inversion_tol);

// Picard iteration of T from the identity until the C1 step size drops to
// spec.tol. Throws HypothesisError / ClassError on gate failures and
// Error("non_convergence") when max_iters is exhausted (impossible while the
// contraction hypotheses hold; treated as fatal).
SolveReport solve(const ProblemSpec& spec);

// sup over a refine-x refined grid of |sum lambda_k f^k(x) - F(x)|, iterates
// evaluated by nesting.
double residual_star(const GridFunction& f, const PiecewiseExpr& F,
                     std::span<const double> lambda, int refine = 4);

// sup over a refine-x refined grid on J of |prod (g^k(x))^{lambda_k} - G(x)|.
// Non-positive iterate values are allowed only when every lambda_k is an
// integer.
double residual_product(const GridFunction& g, const PiecewiseExpr& G,
                        std::span<const double> lambda, Interval J,
                        int refine = 4);

// The fixed point extends to all of R through f(x) = L_f^{-1}(F(x)); returns
// (f(x), f'(x)). Inside I this is grid interpolation.
std::pair<double, double> evaluate_solution_on_R(const SolveReport& report,
                                                 const PiecewiseExpr& F,
                                                 double x);

} // namespace iterfix
