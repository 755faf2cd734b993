#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "iterfix/solver.hpp"
#include "support/fixtures.hpp"
#include "support/paper_fixtures.hpp"

using namespace iterfix;
using namespace testsupport;

namespace {

ProblemSpec example_spec() {
    PiecewiseExpr G = PiecewiseExpr::parse(kExampleG);
    PiecewiseExpr F = reduce_G_to_F(G);
    Interval I{0.0, kLog2};
    return ProblemSpec{
        .lambda = kLambda,
        .F = std::move(F),
        .G = std::move(G),
        .I = I,
        .params = ClassParams{kDelta, kM, kMstar, I},
        .grid_size = 1025,
        .tol = 1e-10,
        .max_iters = 200,
    };
}

} // namespace

TEST_CASE("build_L with a single exponent is the identity") {
    FixtureGen gen({0.0, 1.0}, 0.4, 2.0, seed_from_env());
    GridFunction f = gen.next().to_grid(129);
    std::vector<double> lambda{1.0};
    GridFunction L = build_L(f, lambda);
    GridFunction id = GridFunction::identity({0.0, 1.0}, 129);
    CHECK(c1_distance(L, id) == 0.0);
}

TEST_CASE("build_L of the identity is the identity for any lambda") {
    GridFunction id = GridFunction::identity({0.0, 1.0}, 65);
    std::vector<double> lambda{0.5, 0.3, 0.2};
    GridFunction L = build_L(id, lambda);
    CHECK(c1_distance(L, id) <= 1e-14);
}

TEST_CASE("build_L matches a hand evaluation") {
    // f(x) = (x + x^2)/2: L_f(0.5) = 0.9*0.5 + 0.1*f(0.5) = 0.4875.
    const int n = 513;
    std::vector<double> nodes(n), values(n), derivs(n);
    for (int i = 0; i < n; ++i) {
        double x = static_cast<double>(i) / (n - 1);
        nodes[static_cast<std::size_t>(i)] = x;
        values[static_cast<std::size_t>(i)] = 0.5 * (x + x * x);
        derivs[static_cast<std::size_t>(i)] = 0.5 * (1 + 2 * x);
    }
    nodes.back() = 1.0;
    GridFunction f({0.0, 1.0}, std::move(nodes), std::move(values),
                   std::move(derivs));
    GridFunction L = build_L(f, kLambda);
    CHECK(L.evaluate(0.5) == doctest::Approx(0.4875).epsilon(1e-12));
    // Endpoints are pinned exactly.
    CHECK(L.values().front() == 0.0);
    CHECK(L.values().back() == 1.0);
}

TEST_CASE("L_f slope band and Lipschitz estimates hold on random members") {
    std::mt19937_64 rng(seed_from_env(41));
    Interval I{0.0, 1.0};
    const double rho = 0.35, lip = 1.8;
    FixtureGen gen(I, rho, lip, rng());
    std::vector<double> lambda{0.6, 0.3, 0.1};
    const double M = 1.0 + rho;
    ConstantSet cs = compute_constants(lambda, 1.0 - rho, M, lip);

    for (int trial = 0; trial < 25; ++trial) {
        GridFunction f = gen.next().to_grid(513);
        GridFunction L = build_L(f, lambda);
        auto xs = uniform_points(I, 300);
        for (double x : xs) {
            double d = L.derivative(x);
            REQUIRE(d >= lambda[0] - 1e-9);
            REQUIRE(d <= cs.K1 + 1e-9);
        }
        // Slope Lipschitz estimate: |L'(x) - L'(y)| <= M* K0 |x - y|.
        for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
            double lhs =
                std::abs(L.derivative(xs[i]) - L.derivative(xs[i + 1]));
            REQUIRE(lhs <=
                    lip * cs.K0 * std::abs(xs[i] - xs[i + 1]) + 1e-7);
        }
        // Inverse value and inverse slope estimates.
        for (std::size_t i = 0; i + 9 < xs.size(); i += 9) {
            double x = xs[i], y = xs[i + 9];
            double ix = invert_monotone(L, x, 1e-12);
            double iy = invert_monotone(L, y, 1e-12);
            REQUIRE(std::abs(ix - iy) <=
                    std::abs(x - y) / lambda[0] + 1e-9);
            double lhs = std::abs(1 / L.derivative(ix) - 1 / L.derivative(iy));
            REQUIRE(lhs <= lip * cs.K0 /
                                   (lambda[0] * lambda[0] * lambda[0]) *
                                   std::abs(x - y) +
                               1e-7);
        }
    }
}

TEST_CASE("apply_T with a single exponent returns the sampled F") {
    PiecewiseExpr F = PiecewiseExpr::parse(kExampleF);
    Interval I{0.0, kLog2};
    GridFunction f0 = GridFunction::identity(I, 257);
    std::vector<double> lambda{1.0};
    GridFunction Tf = apply_T(f0, F, lambda, 1e-12);
    for (std::size_t i = 0; i < Tf.nodes().size(); ++i)
        REQUIRE(std::abs(Tf.values()[i] - F.eval(Tf.nodes()[i])) <= 1e-11);
}

TEST_CASE("identity is the fixed point of the trivial problem") {
    PiecewiseExpr F = PiecewiseExpr::parse("piece (-inf,inf): x");
    Interval I{0.0, 1.0};
    GridFunction f0 = GridFunction::identity(I, 129);
    GridFunction Tf = apply_T(f0, F, kLambda, 1e-12);
    CHECK(c1_distance(Tf, f0) <= 1e-11);
}

TEST_CASE("first Picard steps on the worked example contract") {
    ProblemSpec spec = example_spec();
    GridFunction f0 = GridFunction::identity(spec.I, 1025);
    GridFunction f1 = apply_T(f0, spec.F, spec.lambda, 1e-12);
    GridFunction f2 = apply_T(f1, spec.F, spec.lambda, 1e-12);
    double d0 = c1_distance(f1, f0);
    double d1 = c1_distance(f2, f1);
    CHECK(d0 > 0.1); // the identity is visibly not the solution
    CHECK(d1 / d0 <= 0.17115);
}

TEST_CASE("solve reproduces the worked example end to end") {
    ProblemSpec spec = example_spec();
    SolveReport rep = solve(spec);

    // Geometric iteration bound from the contraction constant.
    double d0 = rep.distances.front();
    int bound = static_cast<int>(std::ceil(
                    std::log(spec.tol * (1 - rep.constants.K) / d0) /
                    std::log(rep.constants.K))) +
                2;
    CHECK(rep.iterations <= bound);
    CHECK(rep.distances.back() <= spec.tol);
    CHECK(rep.residual_star <= 1e-8);
    REQUIRE(rep.residual_product.has_value());
    CHECK(*rep.residual_product <= 1e-6);
    CHECK(rep.solution_verdict.member);
    CHECK(rep.aposteriori_bound >= 0.0);
    CHECK(rep.apriori_bound >= 0.0);

    // Contraction realized numerically: d_{m+1} <= K d_m + 1e-9.
    for (std::size_t m = 0; m + 1 < rep.distances.size(); ++m)
        CHECK(rep.distances[m + 1] <=
              rep.constants.K * rep.distances[m] + 1e-9);

    // Fixed-point characterization: || L_f(f) - F || <= 2 tol on a refined
    // grid.
    GridFunction L = build_L(rep.f, spec.lambda);
    double worst = 0.0;
    for (double x : uniform_points(spec.I, 4097)) {
        double lf = L.evaluate(rep.f.evaluate(x));
        worst = std::max(worst, std::abs(lf - spec.F.eval(x)));
    }
    CHECK(worst <= 2 * spec.tol);

    // Derivative band of the fixed point.
    for (double x : uniform_points(spec.I, 1000)) {
        double d = rep.f.derivative(x);
        CHECK(d >= kDelta / rep.constants.K1 - 1e-9);
        CHECK(d <= spec.params.M + 1e-9);
    }
}

TEST_CASE("inverting L at F values recovers the solution") {
    ProblemSpec spec = example_spec();
    SolveReport rep = solve(spec);
    GridFunction L = build_L(rep.f, spec.lambda);
    double y = spec.F.eval(0.2);
    double x = invert_monotone(L, y, 1e-11);
    CHECK(std::abs(x - rep.f.evaluate(0.2)) <= 1e-9);
}

TEST_CASE("trivial lambda solves in one productive step") {
    PiecewiseExpr F = PiecewiseExpr::parse(kExampleF);
    Interval I{0.0, kLog2};
    ProblemSpec spec{
        .lambda = {1.0, 0.0},
        .F = F,
        .G = std::nullopt,
        .I = I,
        .params = ClassParams{kDelta, kM, kMstar, I},
        .grid_size = 1025,
        .tol = 1e-10,
        .max_iters = 200,
    };
    SolveReport rep = solve(spec);
    CHECK(rep.iterations <= 2);
    for (std::size_t i = 0; i < rep.f.nodes().size(); ++i)
        REQUIRE(std::abs(rep.f.values()[i] - F.eval(rep.f.nodes()[i])) <=
                1e-9);
    CHECK(rep.apriori_bound == 0.0);
    CHECK(rep.aposteriori_bound == 0.0);
}

TEST_CASE("identity right-hand side converges instantly") {
    PiecewiseExpr F = PiecewiseExpr::parse(
        "piece (-inf,0]: 0; piece [0,1]: x; piece [1,inf): 1");
    Interval I{0.0, 1.0};
    ProblemSpec spec{
        .lambda = kLambda,
        .F = F,
        .G = std::nullopt,
        .I = I,
        .params = ClassParams{1.0, 2.0, 1.0, I}, // IdentityOnly regime
        .grid_size = 257,
        .tol = 1e-10,
        .max_iters = 50,
    };
    SolveReport rep = solve(spec);
    CHECK(rep.distances.front() <= 1e-12);
    GridFunction id = GridFunction::identity(I, 257);
    CHECK(c1_distance(rep.f, id) <= 1e-11);
}

TEST_CASE("hypothesis failure carries the constants") {
    ProblemSpec spec = example_spec();
    spec.params.M = 3.0; // 0.1 * 9 = 0.9 = lambda_1
    try {
        solve(spec);
        FAIL("expected hypothesis failure");
    } catch (const HypothesisError& e) {
        CHECK(e.reason() == "lambda1_le_K0M2");
        CHECK_FALSE(e.constants().hyp_K0M2);
        CHECK(std::isnan(e.constants().Mp));
    }
}

TEST_CASE("class gate failure carries the verdict") {
    ProblemSpec spec = example_spec();
    spec.params.delta = 1.0; // F' dips to log 2 < 1 on I
    try {
        solve(spec);
        FAIL("expected class failure");
    } catch (const ClassError& e) {
        CHECK_FALSE(e.verdict().member);
        REQUIRE(!e.verdict().violations.empty());
        CHECK(e.verdict().violations[0].condition == "(2)");
    }
}

TEST_CASE("non-convergence inside the iteration cap is fatal") {
    ProblemSpec spec = example_spec();
    spec.max_iters = 2;
    spec.tol = 1e-14;
    CHECK_THROWS_AS(solve(spec), Error);
}

TEST_CASE("solution evaluation extends to the whole line") {
    ProblemSpec spec = example_spec();
    SolveReport rep = solve(spec);

    // F vanishes left of 0, so f(-5) = L^{-1}(0) = 0.
    auto [v_neg, d_neg] = evaluate_solution_on_R(rep, spec.F, -5.0);
    CHECK(v_neg == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(d_neg == 0.0);

    // At the left endpoint the solution is pinned.
    auto [v_a, d_a] = evaluate_solution_on_R(rep, spec.F, 0.0);
    CHECK(v_a == 0.0);
    CHECK(d_a > 0.0);

    // Far to the right F decays like (log 2)^2 / x.
    auto [v_far, d_far] = evaluate_solution_on_R(rep, spec.F, 10.0);
    CHECK(v_far > 0.0);
    CHECK(v_far < kLog2);
    GridFunction L = build_L(rep.f, spec.lambda);
    CHECK(v_far == doctest::Approx(invert_monotone(L, spec.F.eval(10.0),
                                                   1e-12))
                       .epsilon(1e-10));
    CHECK(d_far < 0.0); // decaying branch

    // Inside I this is plain interpolation.
    auto [v_in, d_in] = evaluate_solution_on_R(rep, spec.F, 0.3);
    CHECK(v_in == rep.f.evaluate(0.3));
    CHECK(d_in == rep.f.derivative(0.3));
}

TEST_CASE("product residual measures solution quality") {
    ProblemSpec spec = example_spec();
    SolveReport rep = solve(spec);
    REQUIRE(rep.g.has_value());
    const GridFunction& g = *rep.g;

    // The trivial identity pair has zero residual.
    PiecewiseExpr Gid = PiecewiseExpr::parse(
        "piece (0,1]: 1; piece [1,2]: x; piece [2,inf): 2");
    GridFunction idJ = GridFunction::identity({1.0, 2.0}, 257);
    CHECK(residual_product(idJ, Gid, kLambda, {1.0, 2.0}) <= 1e-12);

    // Perturbing the solution away from the fixed point blows the residual
    // up by orders of magnitude.
    std::vector<double> values = g.values();
    std::vector<double> derivs = g.derivs();
    for (std::size_t i = 0; i < values.size(); ++i) {
        double y = g.nodes()[i];
        double bump = (values[i] - 1.0) * (2.0 - values[i]);
        values[i] += 0.01 * bump;
        derivs[i] += 0.01 * (3.0 - 2 * values[i]) * g.derivs()[i];
        (void)y;
    }
    GridFunction perturbed(g.interval(), g.nodes(), values, derivs);
    double res = residual_product(perturbed, *spec.G, kLambda,
                                  perturbed.interval());
    CHECK(res > 1e-3);
}

TEST_CASE("operator is a self-map of the target class") {
    ProblemSpec spec = example_spec();
    ConstantSet cs = compute_constants(spec.lambda, kDelta, kM, kMstar);
    // Members of A_I(delta, M, M') stay members under T.
    FixtureGen gen(spec.I, 0.25, 1.2, seed_from_env(43));
    for (int trial = 0; trial < 20; ++trial) {
        GridFunction f = gen.next().to_grid(513);
        GridFunction Tf = apply_T(f, spec.F, spec.lambda, 1e-12);
        ClassVerdict v =
            check_A_class(Tf, ClassParams{kDelta, kM, cs.Mp, spec.I});
        if (!v.violations.empty()) {
            CAPTURE(v.violations[0].condition);
            CAPTURE(v.violations[0].measured);
            CAPTURE(v.violations[0].bound);
        }
        REQUIRE(v.member);
        // Derivative band from the operator bounds.
        for (double x : uniform_points(spec.I, 200)) {
            double d = Tf.derivative(x);
            REQUIRE(d >= kDelta / cs.K1 - 1e-9);
            REQUIRE(d <= kM + 1e-9);
        }
    }
}

TEST_CASE("operator contracts random member pairs in the C1 norm") {
    ProblemSpec spec = example_spec();
    FixtureGen gen(spec.I, 0.25, 1.2, seed_from_env(47));
    for (int trial = 0; trial < 20; ++trial) {
        GridFunction f1 = gen.next().to_grid(513);
        GridFunction f2 = gen.next().to_grid(513);
        GridFunction Tf1 = apply_T(f1, spec.F, spec.lambda, 1e-12);
        GridFunction Tf2 = apply_T(f2, spec.F, spec.lambda, 1e-12);
        double lhs = c1_distance(Tf1, Tf2);
        double rhs = 0.17115 * c1_distance(f1, f2) + 1e-8;
        REQUIRE(lhs <= rhs);
    }
}
