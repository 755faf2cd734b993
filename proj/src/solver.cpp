#include "iterfix/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace iterfix {

namespace {

std::vector<double> refined_nodes(const std::vector<double>& nodes,
                                  int refine) {
    std::vector<double> out;
    out.reserve(nodes.size() * static_cast<std::size_t>(refine));
    for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
        double h = nodes[i + 1] - nodes[i];
        for (int j = 0; j < refine; ++j)
            out.push_back(nodes[i] + h * j / refine);
    }
    out.push_back(nodes.back());
    return out;
}

} // namespace

std::string hypothesis_reason(const ConstantSet& cs) {
    if (cs.lambda[0] <= cs.K0M2) return "lambda1_le_K0M2";
    if (!(cs.K0M2 > 0.0)) return "K0M2_not_positive";
    if (!cs.hyp_K_in_01) return "K_not_in_unit_interval";
    return "";
}

GridFunction build_L(const GridFunction& f, std::span<const double> lambda) {
    if (lambda.empty())
        throw Error("lambda_empty", "at least one exponent is required");
    const std::size_t n = f.nodes().size();
    const double a = f.interval().a, b = f.interval().b;

    std::vector<double> values(n), derivs(n);
    for (std::size_t i = 0; i < n; ++i) {
        values[i] = lambda[0] * f.nodes()[i]; // f^0 = id
        derivs[i] = lambda[0];
    }

    std::size_t last = 0;
    for (std::size_t k = 1; k < lambda.size(); ++k)
        if (lambda[k] != 0.0) last = k;

    // f^{k-1} built up by resampled composition; zero terms are skipped and
    // the chain stops at the last exponent actually used.
    GridFunction it = f;
    for (std::size_t k = 1; k <= last; ++k) {
        if (k > 1) it = compose(f, it);
        if (lambda[k] == 0.0) continue;
        for (std::size_t i = 0; i < n; ++i) {
            values[i] += lambda[k] * it.values()[i];
            derivs[i] += lambda[k] * it.derivs()[i];
        }
    }
    values.front() = a;
    values.back() = b;
    return GridFunction(f.interval(), f.nodes(), std::move(values),
                        std::move(derivs));
}

GridFunction apply_T(const GridFunction& f, const PiecewiseExpr& F,
                     std::span<const double> lambda, double inversion_tol) {
    const Interval I = f.interval();
    GridFunction L = build_L(f, lambda);

    const std::size_t n = f.nodes().size();
    std::vector<double> values(n), derivs(n);
    for (std::size_t i = 0; i < n; ++i) {
        double x = f.nodes()[i];
        double y = clamp_into(F.eval(x), I.a, I.b, "out_of_range");
        double v = invert_monotone(L, y, inversion_tol);
        values[i] = v;
        derivs[i] = derivative_on_interval(F, x, I) / L.derivative(v);
    }
    values.front() = I.a;
    values.back() = I.b;
    return GridFunction(I, f.nodes(), std::move(values), std::move(derivs));
}

SolveReport solve(const ProblemSpec& spec) {
    if (!(spec.tol > 0.0))
        throw Error("bad_argument", "tolerance must be positive");
    if (spec.max_iters < 1)
        throw Error("bad_argument", "need at least one iteration");

    ConstantSet cs = compute_constants(spec.lambda, spec.params.delta,
                                       spec.params.M, spec.params.Mstar);
    const bool trivial = cs.trivial_lambda();
    if (!trivial && !cs.hypotheses_ok())
        throw HypothesisError(hypothesis_reason(cs), cs);

    GridFunction F_grid = [&] {
        try {
            return sample_to_grid(spec.F, spec.I, spec.grid_size);
        } catch (const Error& e) {
            if (e.code() != std::string("range_violation")) throw;
            // F escapes I, so the range condition already fails.
            ClassVerdict v;
            v.member = false;
            v.violations.push_back(
                {"range",
                 {},
                 std::numeric_limits<double>::quiet_NaN(),
                 std::numeric_limits<double>::quiet_NaN()});
            throw ClassError(std::move(v));
        }
    }();
    // Tails are available whenever the expression extends beyond I.
    std::optional<PiecewiseExpr> tails;
    if (spec.F.domain_lo() < spec.I.a || spec.F.domain_hi() > spec.I.b)
        tails = spec.F;
    ClassParams gate{spec.params.delta, spec.lambda[0] * spec.params.M,
                     spec.params.Mstar, spec.I};
    ClassVerdict input_verdict = check_F_class(F_grid, tails, gate);
    if (!input_verdict.member) throw ClassError(input_verdict);

    GridFunction f = GridFunction::identity(spec.I, spec.grid_size);
    std::vector<double> distances;
    bool converged = false;
    for (int m = 0; m < spec.max_iters; ++m) {
        GridFunction next = apply_T(f, spec.F, spec.lambda, spec.tol / 10.0);
        double d = c1_distance(next, f);
        distances.push_back(d);
        f = std::move(next);
        if (d <= spec.tol) {
            converged = true;
            break;
        }
    }
    if (!converged)
        throw Error("non_convergence",
                    "Picard iteration did not reach the tolerance; this "
                    "cannot happen under the verified hypotheses");

    const double K = trivial ? 0.0 : cs.K;
    const int iterations = static_cast<int>(distances.size());

    SolveReport report{
        .f = f,
        .g = std::nullopt,
        .lambda = spec.lambda,
        .iterations = iterations,
        .distances = distances,
        .apriori_bound =
            std::pow(K, iterations) / (1.0 - K) * distances.front(),
        .aposteriori_bound = K / (1.0 - K) * distances.back(),
        .residual_star = residual_star(f, spec.F, spec.lambda),
        .residual_product = std::nullopt,
        .constants = cs,
        .input_verdict = input_verdict,
        .solution_verdict = {},
    };

    double Mp = std::isfinite(cs.Mp) ? cs.Mp : cs.Mstar;
    report.solution_verdict = check_A_class(
        f, ClassParams{spec.params.delta, spec.params.M, Mp, spec.I});

    if (spec.G) {
        GridFunction g = lift_f_to_g(f);
        report.residual_product =
            residual_product(g, *spec.G, spec.lambda, g.interval());
        report.g = std::move(g);
    }
    return report;
}

double residual_star(const GridFunction& f, const PiecewiseExpr& F,
                     std::span<const double> lambda, int refine) {
    double worst = 0.0;
    for (double x : refined_nodes(f.nodes(), refine)) {
        double sum = 0.0;
        double v = x;
        for (std::size_t k = 0; k < lambda.size(); ++k) {
            v = f.evaluate(
                clamp_into(v, f.interval().a, f.interval().b,
                           "range_violation"));
            sum += lambda[k] * v;
        }
        worst = std::max(worst, std::abs(sum - F.eval(x)));
    }
    return worst;
}

double residual_product(const GridFunction& g, const PiecewiseExpr& G,
                        std::span<const double> lambda, Interval J,
                        int refine) {
    if (std::abs(g.interval().a - J.a) > 1e-9 ||
        std::abs(g.interval().b - J.b) > 1e-9)
        throw Error("interval_mismatch",
                    "g does not live on the requested interval");
    const bool integral = lambda_all_integral(lambda);
    double worst = 0.0;
    for (double x : refined_nodes(g.nodes(), refine)) {
        double prod = 1.0;
        double v = x;
        for (std::size_t k = 0; k < lambda.size(); ++k) {
            v = g.evaluate(
                clamp_into(v, g.interval().a, g.interval().b,
                           "range_violation"));
            if (lambda[k] == 0.0) continue;
            if (v <= 0.0 && !integral)
                throw Error("nonpositive_iterate",
                            "iterate value is not positive");
            if (v == 0.0 && lambda[k] < 0.0)
                throw Error("nonpositive_iterate",
                            "zero iterate with negative exponent");
            prod *= std::pow(v, lambda[k]);
        }
        worst = std::max(worst, std::abs(prod - G.eval(x)));
    }
    return worst;
}

std::pair<double, double> evaluate_solution_on_R(const SolveReport& report,
                                                 const PiecewiseExpr& F,
                                                 double x) {
    const GridFunction& f = report.f;
    const Interval I = f.interval();
    if (x >= I.a && x <= I.b)
        return {f.evaluate(x), f.derivative(x)};

    GridFunction L = build_L(f, report.lambda);
    double y = clamp_into(F.eval(x), I.a, I.b, "out_of_range");
    double v = invert_monotone(L, y, 1e-12);
    double dF;
    try {
        dF = F.derivative(x);
    } catch (const Error& e) {
        if (e.code() != std::string("derivative_at_boundary")) throw;
        dF = F.derivative_side(x, Side::Left);
    }
    return {v, dF / L.derivative(v)};
}

} // namespace iterfix
