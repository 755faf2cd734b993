#include <CLI11.hpp>

#include "iterfix/cli.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Solver for product-of-iterates functional equations"};
    app.require_subcommand(1);

    iterfix::RunConfig config;
    std::string axis;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("problem", config.problem_path,
                        "problem description file")
            ->required();
        cmd->add_option("--out", config.output_dir,
                        "output directory (default: current)");
        cmd->add_option("--grid", "number of grid nodes (default 1025)")
            ->check(CLI::PositiveNumber)
            ->each([&](const std::string& v) { config.grid = std::stoi(v); });
        cmd->add_option("--tol", "Picard stopping tolerance (default 1e-10)")
            ->each([&](const std::string& v) { config.tol = std::stod(v); });
        cmd->add_option("--max-iters", "iteration cap (default 200)")
            ->check(CLI::PositiveNumber)
            ->each([&](const std::string& v) {
                config.max_iters = std::stoi(v);
            });
        cmd->add_option("--axis", axis, "positive | negative | real-line")
            ->check(CLI::IsMember({"positive", "negative", "real-line"}));
        cmd->add_flag("--normalize", config.normalize,
                      "divide the exponents by their sum first");
        return cmd;
    };

    CLI::App* check = add_common(
        app.add_subcommand("check", "verify class membership of the input"));
    CLI::App* constants = add_common(app.add_subcommand(
        "constants", "compute the contraction constants and hypotheses"));
    CLI::App* solve = add_common(
        app.add_subcommand("solve", "solve the equation end to end"));
    CLI::App* reduce = add_common(app.add_subcommand(
        "reduce", "emit the conjugated additive-form problem"));

    CLI11_PARSE(app, argc, argv);

    if (check->parsed()) config.command = iterfix::Command::Check;
    if (constants->parsed()) config.command = iterfix::Command::Constants;
    if (solve->parsed()) config.command = iterfix::Command::Solve;
    if (reduce->parsed()) config.command = iterfix::Command::Reduce;
    if (!axis.empty()) {
        if (axis == "positive") config.axis = iterfix::Axis::Positive;
        if (axis == "negative") config.axis = iterfix::Axis::Negative;
        if (axis == "real-line") config.axis = iterfix::Axis::RealLine;
    }
    return iterfix::run(config);
}
