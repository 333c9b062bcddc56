#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "cavlab/runner.hpp"
#include "cavlab/scenario.hpp"

int main(int argc, char** argv) {
    CLI::App app{"cavlab: cavity identification experiments for parabolic problems"};
    app.set_help_flag("--help", "Print this help message and exit");
    cavlab::RunOptions opts;
    std::string scenario, case_name, out = "cavlab-out";
    bool list_cases = false;

    std::string command_help = "Command:";
    for (const auto& c : cavlab::commands()) command_help += " " + c;
    app.add_option("command", opts.command, command_help);
    auto* scen = app.add_option("--scenario", scenario, "Scenario file (JSON)");
    auto* cs = app.add_option("--case", case_name, "Built-in scenario");
    scen->excludes(cs);
    app.add_option("--out", out, "Output directory")->capture_default_str();
    app.add_option("--seed", opts.seed, "Seed overriding the scenario seed");
    app.add_option("--h", opts.h, "Grid spacing overriding the scenario grid")->check(CLI::PositiveNumber);
    app.add_flag("--validate-only", opts.validate_only, "Run every hypothesis check and stop before solving");
    app.add_option("--axis", opts.axis, "Sweep axis: dotted path of a numeric setting, e.g. source.breakpoints.1");
    app.add_option("--range", opts.range, "Sweep values: from:to:count or v1,v2,...");
    app.add_flag("--list-cases", list_cases, "Print the built-in scenarios and exit");
    CLI11_PARSE(app, argc, argv);

    if (list_cases) {
        for (const auto& c : cavlab::preset_cases()) std::cout << c << '\n';
        return cavlab::kExitOk;
    }
    if (opts.command.empty()) {
        std::cerr << app.help();
        return cavlab::kExitError;
    }
    if (!scenario.empty()) opts.scenario = scenario;
    if (!case_name.empty()) opts.case_name = case_name;
    opts.out = out;

    const auto res = cavlab::run(opts, std::cerr);
    if (!res.error.empty()) std::cerr << res.error << '\n';
    std::cout << res.summary.text();
    return res.exit_code;
}
