#pragma once

// One small invocation per subcommand, shared by the CLI tests and the
// acceptance binary.

#include <sstream>
#include <string>
#include <vector>

#include "penh/cli.hpp"

namespace cli_cases {

struct Case {
    std::string subcommand;
    std::vector<std::string> args;
};

inline std::vector<Case> all() {
    return {
        {"simulate", {"simulate", "--test", "chi2", "--n", "100", "--d", "10", "--theta", "spike", "--reps", "3000", "--seed", "1"}},
        {"power-curve", {"power-curve", "--test", "supnorm", "--d-rule", "linear", "--n-grid", "16,64", "--reps", "2000", "--seed", "2"}},
        {"blind-spot", {"blind-spot", "--test", "chi2", "--n", "64", "--d", "64", "--reps", "2000", "--seed", "3"}},
        {"bounds", {"bounds", "--n", "100", "--d", "16"}},
        {"lan-check", {"lan-check", "--model", "regression", "--d", "3", "--n-grid", "10,100", "--reps", "500", "--seed", "4"}},
        {"embed-check", {"embed-check", "--n", "50", "--d", "4", "--theta", "0.5,0", "--reps", "2000", "--seed", "5"}},
        {"nontestability", {"nontestability", "--n-grid", "100,1000,10000"}},
        {"demo", {"demo", "--test", "chi2", "--d-rule", "linear", "--n-grid", "32,64", "--reps", "2000", "--seed", "6"}},
    };
}

struct Outcome {
    int code = 0;
    std::string out;
    std::string err;
};

inline Outcome run(std::vector<std::string> args) {
    std::ostringstream out;
    std::ostringstream err;
    const int code = penh::cli::run_cli(args, out, err);
    return {code, out.str(), err.str()};
}

inline Outcome run_with_workers(std::vector<std::string> args, int workers) {
    args.push_back("--workers");
    args.push_back(std::to_string(workers));
    return run(std::move(args));
}

} // namespace cli_cases
