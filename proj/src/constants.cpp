#include "iterfix/constants.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace iterfix {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Compensated summation so the reported constants do not depend on the
// order of the lambda terms.
class KahanSum {
public:
    void add(double x) {
        double y = x - comp_;
        double t = sum_ + y;
        comp_ = (t - sum_) - y;
        sum_ = t;
    }
    double value() const { return sum_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

double power_sum(double M, int j_lo, int j_hi) {
    KahanSum s;
    for (int j = j_lo; j <= j_hi; ++j) s.add(std::pow(M, j));
    return s.value();
}

// sum_{j=1}^{k} (k - j + 1) M^{k+j-1}
double weighted_power_sum(double M, int k) {
    KahanSum s;
    for (int j = 1; j <= k; ++j) s.add((k - j + 1) * std::pow(M, k + j - 1));
    return s.value();
}

double k3_like(std::span<const double> lambda, double M, double mod) {
    const int n = static_cast<int>(lambda.size());
    KahanSum s;
    for (int k = 0; k <= n - 2; ++k)
        s.add(lambda[static_cast<std::size_t>(k) + 1] * q(k + 1) * mod *
              weighted_power_sum(M, k));
    return s.value();
}

} // namespace

int q(int s) {
    if (s < 1) throw Error("bad_argument", "q is defined for s >= 1");
    return s == 1 ? 0 : 1;
}

bool ConstantSet::trivial_lambda() const {
    for (std::size_t k = 1; k < lambda.size(); ++k)
        if (lambda[k] != 0.0) return false;
    return true;
}

ConstantSet compute_constants(std::span<const double> lambda, double delta,
                              double M, double Mstar) {
    if (lambda.empty())
        throw Error("lambda_empty", "at least one exponent is required");
    if (!(lambda[0] > 0.0))
        throw Error("lambda1_nonpositive", "lambda_1 must be positive");
    for (std::size_t k = 1; k < lambda.size(); ++k)
        if (!(lambda[k] >= 0.0 && lambda[k] <= 1.0))
            throw Error("lambda_out_of_range",
                        "lambda_k must lie in [0, 1] for k >= 2");
    KahanSum sum;
    for (double l : lambda) sum.add(l);
    if (std::abs(sum.value() - 1.0) > 1e-12)
        throw Error("lambda_sum_not_one",
                    "the exponents must sum to 1 (use the normalization "
                    "transform otherwise)");

    ConstantSet cs;
    cs.lambda.assign(lambda.begin(), lambda.end());
    cs.delta = delta;
    cs.M = M;
    cs.Mstar = Mstar;
    cs.hyp_lambda1_pos = true;
    cs.hyp_sum_one = true;

    const int n = static_cast<int>(lambda.size());
    const double l1 = lambda[0];

    {
        KahanSum k0, k1, k2, k4;
        k1.add(l1); // k = 1 term of K1 (M^0)
        for (int k = 1; k <= n - 1; ++k) {
            double lk1 = lambda[static_cast<std::size_t>(k)];
            k0.add(lk1 * power_sum(M, k - 1, 2 * k - 2));
            k1.add(lk1 * std::pow(M, k));
            k2.add(lk1 * power_sum(M, 0, k - 1));
            k4.add(lk1 * k * std::pow(M, k - 1));
        }
        cs.K0 = k0.value();
        cs.K1 = k1.value();
        cs.K2 = k2.value();
        cs.K4 = k4.value();
    }
    cs.K3 = k3_like(lambda, M, Mstar);
    cs.K5 = cs.K3 / (l1 * l1) + Mstar * cs.K0 * cs.K2 / (l1 * l1 * l1);
    cs.K6 = cs.K4 / (l1 * l1);

    cs.K0M2 = cs.K0 * M * M;
    cs.hyp_K0M2 = l1 > cs.K0M2 && cs.K0M2 > 0.0;

    if (l1 > cs.K0M2) {
        cs.Mp = Mstar / (l1 - cs.K0M2);
        cs.K3p = k3_like(lambda, M, cs.Mp);
        cs.K5p = cs.K3p / (l1 * l1) + cs.Mp * cs.K0 * cs.K2 / (l1 * l1 * l1);
        cs.K_sup_branch = cs.K2 / l1 + l1 * M * cs.K5p;
        cs.K_deriv_branch = l1 * M * cs.K6;
        cs.K = std::max(cs.K_sup_branch, cs.K_deriv_branch);
    } else {
        cs.Mp = kNaN;
        cs.K3p = kNaN;
        cs.K5p = kNaN;
        cs.K_sup_branch = kNaN;
        cs.K_deriv_branch = kNaN;
        cs.K = kNaN;
    }
    cs.hyp_K_in_01 = cs.K > 0.0 && cs.K < 1.0;
    return cs;
}

LemmaBounds lemma_bounds(int k, double M, double Mstar, double delta) {
    if (k < 1) throw Error("bad_argument", "iterate order must be >= 1");
    LemmaBounds lb;
    lb.iterate_deriv_lipschitz = Mstar * power_sum(M, k - 1, 2 * k - 2);
    lb.iterate_sup = power_sum(M, 0, k - 1);
    lb.iterate_deriv_dprime = k * std::pow(M, k - 1);
    lb.iterate_deriv_dvalue = q(k) * Mstar * weighted_power_sum(M, k - 1);
    if (delta <= 0.0) {
        lb.inverse_deriv_lipschitz = kNaN;
    } else {
        lb.inverse_deriv_lipschitz = Mstar / (delta * delta * delta);
    }
    lb.inverse_sup = Mstar;
    return lb;
}

} // namespace iterfix
