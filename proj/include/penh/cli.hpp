#pragma once

// Command-line front end. parse_args turns argv into a CliCommand, dispatch
// runs it and writes the output; run_cli wraps both and maps errors to exit
// codes (0 ok, 1 runtime, 2 usage, 3 semantic).

#include <charconv>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "penh/demo.hpp"
#include "penh/diagnostics.hpp"
#include "penh/errors.hpp"
#include "penh/mixture.hpp"
#include "penh/regime.hpp"
#include "penh/serialize.hpp"
#include "penh/simulate.hpp"
#include "penh/test_spec.hpp"

namespace penh::cli {

inline constexpr const char* kVersion = "1.0.0";

struct CliCommand {
    std::string subcommand;
    std::map<std::string, std::string> options; // flag name without dashes -> raw value
    std::optional<std::string> out;
    std::string format; // "csv" or "json"
};

/// Requested help or version text; not an error.
struct InfoRequest {
    std::string text;
};

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct OutputError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace detail {

struct SubcommandInfo {
    const char* name;
    const char* description;
    std::vector<const char*> flags;
    bool table; // default output is CSV
};

inline const std::vector<SubcommandInfo>& subcommands() {
    static const std::vector<SubcommandInfo> table = {
        {"simulate", "Monte Carlo rejection probability of a test at one parameter point",
         {"test", "model", "n", "d", "alpha", "theta"}, false},
        {"power-curve", "size, power and enhanced power along a dimension regime",
         {"test", "d-rule", "n-grid", "alpha", "theta"}, true},
        {"blind-spot", "spike coordinate where a test has the least power", {"test", "n", "d", "alpha"}, false},
        {"bounds", "mixture second moment and the size/power gap bound", {"n", "d"}, false},
        {"lan-check", "remainder of the quadratic log-likelihood expansion", {"model", "d", "n-grid", "theta"}, true},
        {"embed-check", "law of the embedded experiment against the smaller one", {"n", "d", "theta"}, false},
        {"nontestability", "total-variation bound for d = n along an n grid", {"n-grid"}, true},
        {"demo", "end-to-end enhancement of a test along a regime", {"test", "d-rule", "n-grid", "alpha"}, false},
    };
    return table;
}

inline const std::map<std::string, std::string>& flag_help() {
    static const std::map<std::string, std::string> help = {
        {"test", "test spec, e.g. chi2:alpha=0.05 or enhance(chi2,spike:i=3)"},
        {"model", "gaussian | scaled | regression"},
        {"n", "sample size"},
        {"d", "dimension"},
        {"d-rule", "linear | fixed:D | ceil_log:C | power:G"},
        {"n-grid", "comma-separated sample sizes, non-decreasing"},
        {"alpha", "nominal level in (0,1)"},
        {"theta", "zero | spike[:i=K] | local[:c=C][:rate=R][:i=K] | comma-separated vector"},
        {"reps", "Monte Carlo replications (default 10000)"},
        {"seed", "master seed (default 0)"},
        {"workers", "worker threads (default 1)"},
        {"format", "csv | json"},
        {"out", "output file (default stdout)"},
    };
    return help;
}

inline std::string footer() {
    std::string text = "Flags:\n";
    for (const char* f : {"test", "model", "n", "d", "d-rule", "n-grid", "alpha", "theta", "reps", "seed", "workers",
                          "format", "out"}) {
        text += "  --" + std::string(f) + "  " + flag_help().at(f) + "\n";
    }
    text += "Exit codes: 0 success, 1 runtime error, 2 usage error, 3 invalid parameter.";
    return text;
}

inline const SubcommandInfo& info(const std::string& name) {
    for (const auto& s : subcommands()) {
        if (name == s.name) return s;
    }
    throw UsageError("unknown subcommand '" + name + "'");
}

} // namespace detail

/// Throws InfoRequest for --help / --version and UsageError for anything CLI11 rejects.
inline CliCommand parse_args(const std::vector<std::string>& args) {
    CLI::App app{"Power enhancement experiments for high-dimensional Gaussian testing", "penh"};
    app.set_version_flag("--version", kVersion);
    app.footer(detail::footer());
    app.require_subcommand(1);

    CliCommand cmd;
    std::map<std::string, std::map<std::string, std::string>> values;
    std::map<std::string, std::string> out_path;
    std::map<std::string, std::string> format;
    std::vector<std::pair<CLI::App*, std::string>> subs;
    for (const auto& s : detail::subcommands()) {
        CLI::App* sub = app.add_subcommand(s.name, s.description);
        auto& slot = values[s.name];
        std::vector<const char*> flags = s.flags;
        for (const char* common : {"reps", "seed", "workers"}) flags.push_back(common);
        for (const char* f : flags) {
            sub->add_option("--" + std::string(f), slot[f], detail::flag_help().at(f));
        }
        sub->add_option("--format", format[s.name], detail::flag_help().at("format"))
            ->check(CLI::IsMember({"csv", "json"}));
        sub->add_option("--out", out_path[s.name], detail::flag_help().at("out"));
        sub->footer(detail::footer());
        subs.emplace_back(sub, s.name);
    }

    // CLI11 takes the arguments without the program name, in reverse order.
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        throw InfoRequest{app.help()};
    } catch (const CLI::CallForAllHelp&) {
        throw InfoRequest{app.help("", CLI::AppFormatMode::All)};
    } catch (const CLI::CallForVersion&) {
        throw InfoRequest{std::string(kVersion) + "\n"};
    } catch (const CLI::ParseError& e) {
        throw UsageError(e.what());
    }

    for (const auto& [sub, name] : subs) {
        if (!sub->parsed()) continue;
        cmd.subcommand = name;
        for (const auto& [flag, value] : values[name]) {
            if (sub->get_option("--" + flag)->count() > 0) cmd.options[flag] = value;
        }
        if (sub->get_option("--out")->count() > 0) cmd.out = out_path[name];
        cmd.format = format[name].empty() ? (detail::info(name).table ? "csv" : "json") : format[name];
    }
    return cmd;
}

namespace detail {

inline std::optional<std::string> opt(const CliCommand& cmd, const std::string& key) {
    const auto it = cmd.options.find(key);
    if (it == cmd.options.end()) return std::nullopt;
    return it->second;
}

inline std::string require(const CliCommand& cmd, const std::string& key) {
    auto v = opt(cmd, key);
    if (!v) throw UsageError(cmd.subcommand + " needs --" + key);
    return *v;
}

inline long integer(const CliCommand& cmd, const std::string& key, long fallback) {
    const auto v = opt(cmd, key);
    if (!v) return fallback;
    return penh::detail::parse_integer(*v, "--" + key);
}

inline double real(const CliCommand& cmd, const std::string& key, double fallback) {
    const auto v = opt(cmd, key);
    if (!v) return fallback;
    return penh::detail::parse_real(*v, "--" + key);
}

inline McConfig mc_config(const CliCommand& cmd) {
    McConfig mc;
    mc.reps = integer(cmd, "reps", mc.reps);
    mc.workers = static_cast<int>(integer(cmd, "workers", mc.workers));
    if (const auto seed = opt(cmd, "seed")) {
        const std::string t = penh::detail::trim(*seed);
        const auto res = std::from_chars(t.data(), t.data() + t.size(), mc.master_seed);
        if (res.ec != std::errc() || res.ptr != t.data() + t.size()) {
            throw UsageError("--seed: expected an unsigned 64-bit integer, got '" + t + "'");
        }
    }
    mc.validate();
    return mc;
}

inline double alpha(const CliCommand& cmd) {
    const double a = real(cmd, "alpha", 0.05);
    penh::detail::require_alpha(a);
    return a;
}

inline Vector parse_vector(const std::string& text) {
    Vector v;
    std::size_t pos = 0;
    while (true) {
        const auto comma = text.find(',', pos);
        v.push_back(penh::detail::parse_real(text.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos),
                                             "--theta"));
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    return v;
}

inline bool is_rule(const std::string& text) {
    const std::string t = penh::detail::trim(text);
    return !t.empty() && std::isalpha(static_cast<unsigned char>(t.front()));
}

inline Model model_for(const std::string& name, long n, long d) {
    if (name == "gaussian") return GaussianLocationModel(n, d);
    if (name == "scaled") return ScaledGaussianModel(n, d);
    if (name == "regression") return FixedDesignRegression::with_default_design(n, d);
    throw UsageError("unknown model '" + name + "' (expected gaussian, scaled or regression)");
}

inline RegimeSpec regime(const CliCommand& cmd) {
    RegimeSpec r;
    r.d_rule = parse_dimension_rule(opt(cmd, "d-rule").value_or("linear"));
    r.n_grid = parse_n_grid(require(cmd, "n-grid"));
    r.alpha = alpha(cmd);
    r.validate();
    return r;
}

/// Table output: JSON array or CSV with a fixed header.
template <class Row>
std::string table(const CliCommand& cmd, const std::vector<Row>& rows) {
    const Json j = to_json_array(rows);
    if (cmd.format == "json") return j.dump(2) + "\n";
    return to_csv(j, csv_columns(to_json(Row{})));
}

inline std::string report(const CliCommand& cmd, const Json& j) {
    if (cmd.format == "json") return j.dump(2) + "\n";
    return to_csv(j);
}

inline std::string run_simulate(const CliCommand& cmd) {
    const McConfig mc = mc_config(cmd);
    const long n = integer(cmd, "n", 100);
    const long d = integer(cmd, "d", 10);
    const double a = alpha(cmd);
    const TestSpec spec = parse_test_spec(require(cmd, "test"));
    const std::string model_name = opt(cmd, "model").value_or(required_model(spec));
    const Model model = model_for(model_name, n, d);
    const std::string theta_text = opt(cmd, "theta").value_or("zero");
    ParameterPoint theta;
    if (is_rule(theta_text)) {
        theta = parse_theta_rule(theta_text).at(n, d);
    } else {
        theta = ParameterPoint(parse_vector(theta_text));
        if (theta.dim() != static_cast<std::size_t>(d)) {
            throw DomainError("--theta has " + std::to_string(theta.dim()) + " entries, expected d = " +
                              std::to_string(d));
        }
    }
    require_membership(model, theta);
    const TestFunction test = build_test(spec, TestContext{n, d, a, &model, default_calibration()});
    const PowerEstimate est = estimate_rejection_prob(test, model, theta, mc);
    Json theta_json = Json::array();
    for (double v : theta.theta) theta_json.push_back(v);
    return report(cmd, Json{{"test", test.name()},
                            {"model", model_name},
                            {"n", n},
                            {"d", d},
                            {"theta", theta_json},
                            {"rejection", to_json(est)}});
}

inline std::string run_power_curve(const CliCommand& cmd, std::ostream& err) {
    const McConfig mc = mc_config(cmd);
    const RegimeSpec r = regime(cmd);
    const auto theta_text = opt(cmd, "theta");
    const auto test = opt(cmd, "test");
    if (!test) {
        if (!theta_text) throw UsageError("power-curve needs --test, --theta or both");
        return table(cmd, consistency_diagnostic(parse_theta_rule(*theta_text), r));
    }
    std::optional<ThetaRule> rule;
    if (theta_text) rule = parse_theta_rule(*theta_text);
    const auto rows = run_regime(r, *test, mc, rule);
    for (const auto& row : rows) err << "n=" << row.n << " d=" << row.d << " wall_time_s=" << row.wall_time_s << "\n";
    return table(cmd, rows);
}

inline std::string run_blind_spot(const CliCommand& cmd) {
    const McConfig mc = mc_config(cmd);
    const long n = integer(cmd, "n", 100);
    const long d = integer(cmd, "d", 10);
    const double a = alpha(cmd);
    const GaussianLocationModel gauss(n, d);
    const Model model(gauss);
    const TestFunction test = build_test(require(cmd, "test"), TestContext{n, d, a, &model, default_calibration()});
    return report(cmd, to_json(find_blind_spot(test, gauss, mc)));
}

inline std::string run_bounds(const CliCommand& cmd) {
    mc_config(cmd);
    return report(cmd, to_json(mixture_diagnostics(integer(cmd, "n", 100), integer(cmd, "d", 10))));
}

inline std::string run_lan_check(const CliCommand& cmd) {
    const McConfig mc = mc_config(cmd);
    const std::vector<long> grid = parse_n_grid(require(cmd, "n-grid"));
    Vector h;
    if (const auto t = opt(cmd, "theta")) {
        h = parse_vector(*t);
        if (opt(cmd, "d") && integer(cmd, "d", 0) != static_cast<long>(h.size())) {
            throw DomainError("--d disagrees with the length of --theta");
        }
    } else {
        const long d = integer(cmd, "d", 3);
        penh::detail::require_positive(d, "dimension d");
        h.assign(static_cast<std::size_t>(d), 0.0);
        h[0] = 1.0;
    }
    if (grid.empty()) return table(cmd, std::vector<RemainderSummary>{});
    const long d = static_cast<long>(h.size());
    const Model prototype = model_for(opt(cmd, "model").value_or("gaussian"), std::max(grid.front(), d), d);
    return table(cmd, lan_remainder_check(prototype, h, grid, mc));
}

inline std::string run_embed_check(const CliCommand& cmd) {
    const McConfig mc = mc_config(cmd);
    const long n = integer(cmd, "n", 100);
    const ParameterPoint theta(parse_vector(opt(cmd, "theta").value_or("0")));
    const long d1 = static_cast<long>(theta.dim());
    const long d2 = integer(cmd, "d", d1 + 1);
    return report(cmd, to_json(embedding_equivalence_check(d1, d2, theta, n, mc)));
}

inline std::string run_nontestability(const CliCommand& cmd) {
    mc_config(cmd);
    return table(cmd, nontestability_curve(parse_n_grid(require(cmd, "n-grid"))));
}

inline std::string run_demo(const CliCommand& cmd) {
    const McConfig mc = mc_config(cmd);
    return report(cmd, to_json(enhanceability_demo(opt(cmd, "test").value_or("chi2"), regime(cmd), mc)));
}

} // namespace detail

/// Runs a parsed command and writes its output to `out` or to the --out file.
inline int dispatch(const CliCommand& cmd, std::ostream& out, std::ostream& err) {
    std::string text;
    const std::string& s = cmd.subcommand;
    if (s == "simulate") text = detail::run_simulate(cmd);
    else if (s == "power-curve") text = detail::run_power_curve(cmd, err);
    else if (s == "blind-spot") text = detail::run_blind_spot(cmd);
    else if (s == "bounds") text = detail::run_bounds(cmd);
    else if (s == "lan-check") text = detail::run_lan_check(cmd);
    else if (s == "embed-check") text = detail::run_embed_check(cmd);
    else if (s == "nontestability") text = detail::run_nontestability(cmd);
    else if (s == "demo") text = detail::run_demo(cmd);
    else throw UsageError("unknown subcommand '" + s + "'");

    if (!cmd.out) {
        out << text;
        out.flush();
        return 0;
    }
    std::ofstream file(*cmd.out, std::ios::binary | std::ios::trunc);
    if (!file) throw OutputError("cannot open '" + *cmd.out + "' for writing");
    file << text;
    file.close();
    if (!file) throw OutputError("failed writing '" + *cmd.out + "'");
    return 0;
}

/// args excludes the program name.
inline int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    try {
        return dispatch(parse_args(args), out, err);
    } catch (const InfoRequest& info) {
        out << info.text;
        return 0;
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << "\nRun with --help for usage.\n";
        return 2;
    } catch (const SpecError& e) {
        err << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const ParameterError& e) {
        err << "invalid parameter: " << e.what() << "\n";
        return 3;
    } catch (const DomainError& e) {
        err << "invalid parameter: " << e.what() << "\n";
        return 3;
    } catch (const LinalgError& e) {
        err << "invalid parameter: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
}

} // namespace penh::cli
