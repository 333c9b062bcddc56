#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "cavlab/io.hpp"

namespace cavlab {

inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitHypothesis = 2;
inline constexpr int kExitVerdict = 3;

struct RunOptions {
    std::string command;
    /// Exactly one of scenario, case_name and config selects the scenario.
    std::optional<std::filesystem::path> scenario;
    std::optional<std::string> case_name;
    std::optional<nlohmann::json> config;
    std::filesystem::path out = "cavlab-out";
    std::optional<std::uint64_t> seed;
    std::optional<double> h;
    bool validate_only = false;
    /// Sweep axis and range ("from:to:count" or "v1,v2,...").
    std::optional<std::string> axis;
    std::optional<std::string> range;
};

struct RunResult {
    int exit_code = kExitOk;
    Summary summary;
    std::string error;
};

std::vector<std::string> commands();

/// Runs one command and writes summary.txt, hypotheses.txt and the command's
/// CSV/PGM artifacts into opts.out. Errors are caught and reported through the
/// exit code (1 for configuration and numerical errors, 2 for hypothesis
/// violations of commands that require compliance, 3 for a FAIL verdict).
RunResult run(const RunOptions& opts, std::ostream& log);

/// "from:to:count" (inclusive, evenly spaced) or a comma-separated list; an
/// empty string or count 0 gives no values. Throws BAD_AXIS on malformed text.
std::vector<double> parse_range(const std::string& text);

/// Spearman rank correlation with average ranks for ties; nan for fewer than
/// two points or a constant series.
double spearman(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace cavlab
