#pragma once

#include <span>
#include <vector>

#include "iterfix/error.hpp"

namespace iterfix {

// Q(s): 0 for s = 1, 1 for s >= 2.
int q(int s);

// The bound constants of the auxiliary map L_f = sum lambda_k f^{k-1} and of
// the solution operator, plus the hypothesis flags of the existence theorem.
// Primed quantities replace M* with M' = M*/(lambda1 - K0 M^2); they are NaN
// when lambda1 <= K0 M^2.
struct ConstantSet {
    std::vector<double> lambda;
    double delta = 0.0;
    double M = 0.0;
    double Mstar = 0.0;

    double K0 = 0.0;
    double K1 = 0.0;
    double K2 = 0.0;
    double K3 = 0.0;
    double K4 = 0.0;
    double K5 = 0.0;
    double K6 = 0.0;
    double K3p = 0.0;
    double K5p = 0.0;
    double Mp = 0.0;
    double K = 0.0;

    double K0M2 = 0.0;
    double K_sup_branch = 0.0;   // K2/lambda1 + lambda1 M K5'
    double K_deriv_branch = 0.0; // lambda1 M K6

    bool hyp_lambda1_pos = false;
    bool hyp_K0M2 = false;    // lambda1 > K0 M^2 > 0
    bool hyp_K_in_01 = false; // 0 < K < 1
    bool hyp_sum_one = false;

    bool hypotheses_ok() const {
        return hyp_lambda1_pos && hyp_sum_one && hyp_K0M2 && hyp_K_in_01;
    }

    // lambda_k = 0 for all k >= 2: the operator maps everything to F in one
    // step and the equation is solved by f = F directly.
    bool trivial_lambda() const;
};

// Validates lambda1 > 0, lambda_k in [0,1] for k >= 2 and sum lambda = 1
// (within 1e-12), then fills every constant.
ConstantSet compute_constants(std::span<const double> lambda, double delta,
                              double M, double Mstar);

// Closed-form coefficients of the five iteration estimates, stated for the
// k-th iterate of maps with 0 <= f' <= M and |f'(x)-f'(y)| <= M*|x-y|.
struct LemmaBounds {
    // |(f^k)'(x) - (f^k)'(y)| <= iterate_deriv_lipschitz * |x - y|
    double iterate_deriv_lipschitz = 0.0;
    // ||f1^k - f2^k|| <= iterate_sup * ||f1 - f2||
    double iterate_sup = 0.0;
    // ||(f1^k)' - (f2^k)'|| <= iterate_deriv_dprime * ||f1' - f2'||
    //                          + iterate_deriv_dvalue * ||f1 - f2||
    double iterate_deriv_dprime = 0.0;
    double iterate_deriv_dvalue = 0.0;
    // |(f^-1)'(x) - (f^-1)'(y)| <= inverse_deriv_lipschitz * |x - y|
    // (needs delta <= f')
    double inverse_deriv_lipschitz = 0.0;
    // ||f1 - f2|| <= inverse_sup * ||f1^-1 - f2^-1|| for M*-Lipschitz
    // homeomorphisms
    double inverse_sup = 0.0;
};

LemmaBounds lemma_bounds(int k, double M, double Mstar, double delta);

} // namespace iterfix
