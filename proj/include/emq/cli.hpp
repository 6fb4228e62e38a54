// cli.hpp - scenario configs and the runner behind the `emq` tool
//
// A scenario config is a key=value file (same grammar as parameter files)
// holding `scenario`, an optional `seed`, `truncation.<label>` entries,
// physical parameters and the scenario's own options. The accepted keys
// for each scenario are listed in docs/formats.md.

#pragma once

#include "emq/params_io.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace emq::cli {

enum class Scenario { cool, superpose, teleport_motional, esr_scan, teleport_spin, verify_all, params };

std::optional<Scenario> scenario_from_name(std::string_view name);
std::string_view scenario_name(Scenario scenario);

struct ScenarioConfig {
    Scenario scenario = Scenario::params;
    PhysicalParams physical;
    std::map<std::string, Index> truncations;
    std::uint64_t seed = 0;
    std::map<std::string, KeyValue> options;
};

/// Parses and validates a config; throws ConfigError with line and key.
/// `scenario_override` replaces (or supplies) the `scenario` entry.
ScenarioConfig parse_config(std::string_view text, std::optional<std::string> scenario_override = std::nullopt);

enum class Format { json, csv, both };

struct RunOptions {
    std::filesystem::path out = ".";
    Format format = Format::both;
    int jobs = 1;
    std::optional<std::uint64_t> seed;
    std::vector<std::pair<std::string, Index>> truncations;
    std::optional<std::string> scenario;
};

enum ExitCode : int {
    kSuccess = 0,
    kRuntimeError = 1,
    kConfigError = 2,
    kPreconditionError = 3,
    kVerificationFailure = 4,
};

struct Artifact {
    std::string file_name;
    std::string content;
};

struct Outcome {
    int exit_code = kSuccess;
    std::vector<Artifact> artifacts;
    std::string summary;  // human-readable text for stdout
};

/// Runs a parsed scenario without touching the filesystem.
Outcome execute(const ScenarioConfig& config, const RunOptions& options);

/// Parses, runs and writes artifacts into options.out only when the run
/// succeeded (or, for verify-all, completed). Returns the process exit code.
int run(std::string_view config_text, const RunOptions& options, std::ostream& out, std::ostream& err);

/// Derived-parameter table rows: (symbol, value, unit, note).
struct TableRow {
    std::string symbol;
    double value = 0.0;
    std::string unit;
    std::string note;
};
std::vector<TableRow> parameter_table(const PhysicalParams& physical);

}  // namespace emq::cli
