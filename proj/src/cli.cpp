#include "iterfix/cli.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <limits>
#include <fstream>
#include <set>
#include <vector>

#include "iterfix/classes.hpp"
#include "iterfix/conjugate.hpp"
#include "iterfix/problem.hpp"
#include "iterfix/report.hpp"
#include "iterfix/solver.hpp"

namespace iterfix {

namespace {

const std::set<std::string> kInternalCodes = {
    "internal", "non_convergence", "inversion_failed", "grid_mismatch"};

const char* command_name(Command c) {
    switch (c) {
    case Command::Check: return "check";
    case Command::Constants: return "constants";
    case Command::Solve: return "solve";
    case Command::Reduce: return "reduce";
    }
    return "?";
}

const char* axis_name(Axis a) {
    switch (a) {
    case Axis::Positive: return "positive";
    case Axis::Negative: return "negative";
    case Axis::RealLine: return "real-line";
    }
    return "?";
}

std::string utc_timestamp() {
    auto now = std::chrono::system_clock::now();
    std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[80];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:%02d:%02dZ",
                  tm.tm_year + 1900, tm.tm_mon + 1, tm.tm_mday, tm.tm_hour,
                  tm.tm_min, tm.tm_sec);
    return buf;
}

Json constants_json(const ConstantSet& cs) {
    Json lambda = Json::array();
    for (double l : cs.lambda) lambda.push(Json::number(l));
    Json j = Json::object();
    j.set("lambda", std::move(lambda))
        .set("delta", Json::number(cs.delta))
        .set("M", Json::number(cs.M))
        .set("Mstar", Json::number(cs.Mstar))
        .set("K0", Json::number(cs.K0))
        .set("K1", Json::number(cs.K1))
        .set("K2", Json::number(cs.K2))
        .set("K3", Json::number(cs.K3))
        .set("K4", Json::number(cs.K4))
        .set("K5", Json::number(cs.K5))
        .set("K6", Json::number(cs.K6))
        .set("K3p", Json::number(cs.K3p))
        .set("K5p", Json::number(cs.K5p))
        .set("Mp", Json::number(cs.Mp))
        .set("K", Json::number(cs.K))
        .set("K0M2", Json::number(cs.K0M2))
        .set("K_sup_branch", Json::number(cs.K_sup_branch))
        .set("K_deriv_branch", Json::number(cs.K_deriv_branch))
        .set("trivial_lambda", Json::boolean(cs.trivial_lambda()))
        .set("hyp_lambda1_pos", Json::boolean(cs.hyp_lambda1_pos))
        .set("hyp_K0M2", Json::boolean(cs.hyp_K0M2))
        .set("hyp_K_in_01", Json::boolean(cs.hyp_K_in_01))
        .set("hyp_sum_one", Json::boolean(cs.hyp_sum_one));
    return j;
}

Json verdict_json(const ClassVerdict& v) {
    Json violations = Json::array();
    for (const Violation& viol : v.violations) {
        Json where = Json::array();
        for (double x : viol.where) where.push(Json::number(x));
        Json item = Json::object();
        item.set("condition", Json::string(viol.condition))
            .set("where", std::move(where))
            .set("measured", Json::number(viol.measured))
            .set("bound", Json::number(viol.bound));
        violations.push(std::move(item));
    }
    Json unchecked = Json::array();
    for (const std::string& s : v.unchecked) unchecked.push(Json::string(s));
    Json j = Json::object();
    j.set("member", Json::boolean(v.member))
        .set("violations", std::move(violations))
        .set("samples_per_cell", Json::integer(v.samples_per_cell))
        .set("pair_samples", Json::integer(v.pair_samples))
        .set("tail_decades", Json::number(v.tail_decades))
        .set("unchecked", std::move(unchecked));
    return j;
}

// The report always carries the same six top-level keys; sections not
// produced by a command stay null.
struct ReportBuilder {
    std::optional<Json> constants;
    std::optional<Json> verdicts;
    std::optional<Json> convergence;
    std::optional<Json> residuals;
    std::optional<Json> solution_files;
    std::string status = "ok";
    std::string reason;
    std::string message;

    Json finish(const RunConfig& config, Axis axis, int grid, double tol,
                int max_iters, bool normalized) const {
        Json meta = Json::object();
        meta.set("tool", Json::string("iterfix"))
            .set("command", Json::string(command_name(config.command)))
            .set("problem", Json::string(config.problem_path))
            .set("axis", Json::string(axis_name(axis)))
            .set("grid", Json::integer(grid))
            .set("tol", Json::number(tol))
            .set("max_iters", Json::integer(max_iters))
            .set("normalized", Json::boolean(normalized))
            .set("status", Json::string(status))
            .set("reason", Json::string(reason))
            .set("message", Json::string(message))
            .set("timestamp", Json::string(utc_timestamp()));
        Json root = Json::object();
        root.set("constants", constants ? *constants : Json::null())
            .set("verdicts", verdicts ? *verdicts : Json::null())
            .set("convergence", convergence ? *convergence : Json::null())
            .set("residuals", residuals ? *residuals : Json::null())
            .set("solution_files",
                 solution_files ? *solution_files : Json::null())
            .set("meta", std::move(meta));
        return root;
    }
};

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("io_error", "cannot write " + path.string());
    out << text;
}

void write_grid_csv(const std::filesystem::path& path,
                    const GridFunction& g) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("io_error", "cannot write " + path.string());
    g.write_csv(out);
}

std::string format_scalar(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string problem_text(const std::vector<double>& lambda,
                         const PiecewiseExpr& fn, bool is_G, Interval iv,
                         double delta, double M, double Mstar) {
    std::string out = "[lambda]\n";
    for (std::size_t i = 0; i < lambda.size(); ++i) {
        out += format_scalar(lambda[i]);
        out += i + 1 < lambda.size() ? " " : "\n";
    }
    out += std::string("\n[function ") + (is_G ? "G" : "F") + "]\n";
    out += fn.pretty();
    out += "\n\n[interval]\n";
    out += format_scalar(iv.a);
    out += " ";
    out += format_scalar(iv.b);
    out += "\n\n[params]\ndelta = ";
    out += format_scalar(delta);
    out += "\nM = ";
    out += format_scalar(M);
    out += "\nMstar = ";
    out += format_scalar(Mstar);
    out += "\n";
    return out;
}

struct Normalized {
    std::vector<double> lambda;
    PiecewiseExpr function;
};

// Divides every exponent by the sum S and replaces the right-hand side with
// G^{1/S} (product form) or F/S (additive form).
Normalized normalize_problem(const std::vector<double>& lambda,
                             const PiecewiseExpr& fn, bool is_G) {
    double s = 0.0;
    for (double l : lambda) s += l;
    if (!(s > 0.0))
        throw Error("lambda_sum_not_one", "exponent sum must be positive");
    std::vector<double> scaled;
    scaled.reserve(lambda.size());
    for (double l : lambda) scaled.push_back(l / s);
    std::vector<Piece> pieces;
    pieces.reserve(fn.pieces().size());
    for (const Piece& p : fn.pieces()) {
        ExprPtr body =
            is_G ? make_binary(ExprNode::Kind::Pow, p.body,
                               make_constant(1.0 / s))
                 : make_binary(ExprNode::Kind::Div, p.body, make_constant(s));
        pieces.push_back({p.interval, std::move(body)});
    }
    return {std::move(scaled),
            PiecewiseExpr(std::move(pieces), fn.variable())};
}

} // namespace

int run(const RunConfig& config) {
    ReportBuilder rb;
    Axis axis = Axis::Positive;
    int grid = 1025;
    double tol = 1e-10;
    int max_iters = 200;
    bool normalized = false;
    int exit_code = 0;

    std::filesystem::path out_dir(config.output_dir);

    auto finalize = [&]() {
        Json root = rb.finish(config, axis, grid, tol, max_iters, normalized);
        write_text(out_dir / "report.json", root.dump());
    };

    try {
        std::error_code ec;
        std::filesystem::create_directories(out_dir, ec);

        ProblemFile pf = load_problem_file(config.problem_path);

        grid = config.grid.value_or(pf.grid.value_or(1025));
        tol = config.tol.value_or(pf.tol.value_or(1e-10));
        max_iters = config.max_iters.value_or(pf.max_iters.value_or(200));

        if (config.axis) {
            axis = *config.axis;
        } else if (pf.axis) {
            if (*pf.axis == "positive")
                axis = Axis::Positive;
            else if (*pf.axis == "negative")
                axis = Axis::Negative;
            else if (*pf.axis == "real-line")
                axis = Axis::RealLine;
            else
                throw Error("bad_problem_file",
                            "unknown axis '" + *pf.axis + "'");
        } else {
            axis = pf.function_is_G ? Axis::Positive : Axis::RealLine;
        }
        if (grid < 2) throw Error("bad_argument", "grid must be >= 2");
        if (!(tol > 0.0))
            throw Error("bad_argument", "tol must be positive");
        if (pf.function_is_G && axis == Axis::RealLine)
            throw Error("bad_axis",
                        "a product-form problem needs axis positive or "
                        "negative");
        if (!pf.function_is_G && axis != Axis::RealLine)
            throw Error("bad_axis",
                        "an additive-form problem is solved on the real "
                        "line");
        // Negative-axis preconditions are checked before any other work.
        if (axis == Axis::Negative) {
            if (!lambda_all_integral(pf.lambda))
                throw Error("lambda_not_integer",
                            "the negative axis needs integer exponents");
            if (lambda_integral_sum(pf.lambda) % 2 == 0)
                throw Error("lambda_sum_not_odd",
                            "the negative axis needs an odd exponent sum");
        }

        std::vector<double> lambda = pf.lambda;
        PiecewiseExpr fn = pf.function;
        if (axis == Axis::Negative) {
            // Reflect first so the normalized equation lives on R+.
            fn = reduce_negative_axis(fn, lambda);
        }
        {
            double s = 0.0;
            for (double l : lambda) s += l;
            if (std::abs(s - 1.0) > 1e-12 && config.normalize) {
                Normalized n = normalize_problem(lambda, fn,
                                                 pf.function_is_G);
                lambda = std::move(n.lambda);
                fn = std::move(n.function);
                normalized = true;
            }
        }
        Interval J = pf.interval; // problem-file interval (J or I)
        if (axis == Axis::Negative) {
            if (!(J.b < 0.0))
                throw Error("bad_interval",
                            "a negative-axis problem needs an interval in "
                            "the negative axis");
            J = Interval{-pf.interval.b, -pf.interval.a};
        }

        switch (config.command) {
        case Command::Constants: {
            ConstantSet cs =
                compute_constants(lambda, pf.delta, pf.M, pf.Mstar);
            rb.constants = constants_json(cs);
            if (!cs.hypotheses_ok()) {
                rb.status = "hypothesis_failure";
                rb.reason = hypothesis_reason(cs);
                exit_code = 2;
            }
            break;
        }
        case Command::Check: {
            ClassParams p{pf.delta, pf.M, pf.Mstar, J};
            ClassVerdict v;
            if (pf.function_is_G) {
                v = check_G_class(fn, J, p);
            } else {
                try {
                    GridFunction fg = sample_to_grid(fn, J, grid);
                    std::optional<PiecewiseExpr> tails;
                    if (fn.domain_lo() < J.a || fn.domain_hi() > J.b)
                        tails = fn;
                    v = check_F_class(fg, tails, p);
                } catch (const Error& e) {
                    if (e.code() != std::string("range_violation")) throw;
                    v.member = false;
                    v.violations.push_back(
                        {"range",
                         {},
                         std::numeric_limits<double>::quiet_NaN(),
                         std::numeric_limits<double>::quiet_NaN()});
                }
            }
            Json verdicts = Json::object();
            verdicts.set("regime",
                         Json::string(regime_name(classify_regime(p))));
            verdicts.set("input_class", verdict_json(v));
            rb.verdicts = std::move(verdicts);
            if (!v.member) {
                rb.status = "class_failure";
                rb.reason = "class_not_member";
                exit_code = 3;
            }
            break;
        }
        case Command::Reduce: {
            if (!pf.function_is_G)
                throw Error("nothing_to_reduce",
                            "an additive-form problem is already reduced");
            std::string reduced_text;
            if (axis == Axis::Negative) {
                reduced_text = problem_text(lambda, fn, true, J, pf.delta,
                                            pf.M, pf.Mstar);
            } else {
                PiecewiseExpr F = reduce_G_to_F(fn);
                Interval I{std::log(J.a), std::log(J.b)};
                reduced_text = problem_text(lambda, F, false, I, pf.delta,
                                            pf.M, pf.Mstar);
            }
            write_text(out_dir / "reduced.problem", reduced_text);
            Json files = Json::object();
            files.set("reduced_problem", Json::string("reduced.problem"));
            rb.solution_files = std::move(files);
            break;
        }
        case Command::Solve: {
            PiecewiseExpr F = pf.function_is_G ? reduce_G_to_F(fn) : fn;
            Interval I = pf.function_is_G
                             ? Interval{std::log(J.a), std::log(J.b)}
                             : J;
            ProblemSpec spec{
                .lambda = lambda,
                .F = std::move(F),
                .G = pf.function_is_G ? std::optional<PiecewiseExpr>(fn)
                                      : std::nullopt,
                .I = I,
                .params = ClassParams{pf.delta, pf.M, pf.Mstar, I},
                .grid_size = grid,
                .tol = tol,
                .max_iters = max_iters,
            };
            SolveReport report = solve(spec);

            rb.constants = constants_json(report.constants);
            Json verdicts = Json::object();
            verdicts.set("input_class", verdict_json(report.input_verdict));
            verdicts.set("solution_class",
                         verdict_json(report.solution_verdict));
            rb.verdicts = std::move(verdicts);

            Json distances = Json::array();
            for (double d : report.distances) distances.push(Json::number(d));
            Json convergence = Json::object();
            convergence.set("converged", Json::boolean(true))
                .set("iterations", Json::integer(report.iterations))
                .set("distances", std::move(distances))
                .set("apriori_bound", Json::number(report.apriori_bound))
                .set("aposteriori_bound",
                     Json::number(report.aposteriori_bound));
            rb.convergence = std::move(convergence);

            Json residuals = Json::object();
            residuals.set("residual_star", Json::number(report.residual_star));

            Json files = Json::object();
            write_grid_csv(out_dir / "f.csv", report.f);
            files.set("f_csv", Json::string("f.csv"));

            if (axis == Axis::Negative && report.g) {
                GridFunction g_neg = reflect_solution(*report.g);
                double res = residual_product(g_neg, pf.function, pf.lambda,
                                              g_neg.interval());
                residuals.set("residual_product", Json::number(res));
                residuals.set("residual_product_positive_axis",
                              report.residual_product
                                  ? Json::number(*report.residual_product)
                                  : Json::null());
                write_grid_csv(out_dir / "g.csv", g_neg);
                files.set("g_csv", Json::string("g.csv"));
            } else if (report.g) {
                residuals.set("residual_product",
                              report.residual_product
                                  ? Json::number(*report.residual_product)
                                  : Json::null());
                if (normalized) {
                    // Defect of the user's un-normalized equation.
                    double res = residual_product(*report.g, pf.function,
                                                  pf.lambda,
                                                  report.g->interval());
                    residuals.set("residual_product_original",
                                  Json::number(res));
                }
                write_grid_csv(out_dir / "g.csv", *report.g);
                files.set("g_csv", Json::string("g.csv"));
            } else {
                residuals.set("residual_product", Json::null());
            }
            rb.residuals = std::move(residuals);
            rb.solution_files = std::move(files);
            break;
        }
        }
    } catch (const HypothesisError& e) {
        rb.constants = constants_json(e.constants());
        rb.status = "hypothesis_failure";
        rb.reason = e.reason();
        rb.message = e.what();
        exit_code = 2;
    } catch (const ClassError& e) {
        Json verdicts = Json::object();
        verdicts.set("input_class", verdict_json(e.verdict()));
        rb.verdicts = std::move(verdicts);
        rb.status = "class_failure";
        rb.reason = e.code();
        rb.message = e.what();
        exit_code = 3;
    } catch (const Error& e) {
        rb.status = kInternalCodes.count(e.code()) ? "internal_error"
                                                   : "input_error";
        rb.reason = e.code();
        rb.message = e.what();
        exit_code = kInternalCodes.count(e.code()) ? 1 : 3;
    } catch (const std::exception& e) {
        rb.status = "internal_error";
        rb.reason = "internal";
        rb.message = e.what();
        exit_code = 1;
    }

    try {
        finalize();
    } catch (const std::exception& e) {
        std::fprintf(stderr, "iterfix: cannot write report: %s\n", e.what());
        return 1;
    }
    return exit_code;
}

} // namespace iterfix
