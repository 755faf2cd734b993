#pragma once

#include <optional>
#include <string>

namespace iterfix {

enum class Command { Check, Constants, Solve, Reduce };
enum class Axis { Positive, Negative, RealLine };

// Exit statuses of run(): 0 success, 1 internal error, 2 hypothesis failure
// (report still written), 3 input or class-membership failure.
struct RunConfig {
    Command command = Command::Solve;
    std::string problem_path;
    std::string output_dir = ".";
    std::optional<int> grid;       // default 1025
    std::optional<double> tol;     // default 1e-10
    std::optional<int> max_iters;  // default 200
    std::optional<Axis> axis;      // default from the problem file
    bool normalize = false;        // divide lambda by its sum first
};

int run(const RunConfig& config);

} // namespace iterfix
