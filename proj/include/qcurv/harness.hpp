#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace qcurv {

/// Process exit status of a run.
enum class ExitCode : int { ok = 0, validation = 2, numerical = 3, hypothesis_failed = 4 };

/// CSV-ready table; cells are preformatted (numbers with 17 significant digits).
struct Table {
    std::string name;
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;
};

struct RunReport {
    std::string command;
    /// Echo of the validated configuration with defaults filled in (JSON text).
    std::string config;
    /// Results payload (JSON text); deterministic for a fixed config and seed.
    std::string payload;
    std::string payload_hash;
    std::string config_hash;
    std::string timestamp;
    /// "module.operation: message" entries raised by the modules.
    std::vector<std::string> warnings;
    std::vector<Table> tables;
    ExitCode exit_code = ExitCode::ok;
    std::string error;

    /// The schema-versioned report.json document.
    std::string to_json() const;
};

/// Runs a single configuration given as a JSON document
/// {"command": ..., "parameters": {...}, "seed": int, "output_dir": path}.
/// Never throws for bad input: validation problems and numerical failures are
/// reported through exit_code and error.
RunReport run(const std::string& config_json);

/// Applies a cartesian parameter grid (JSON object name -> array of values) to a
/// template config and runs every point on up to `workers` threads. Reports come
/// back in grid order regardless of scheduling; failed points are kept.
std::vector<RunReport> sweep(const std::string& template_json, const std::string& axis_json, int workers);

/// Aggregate of a sweep: one status table plus every table of every run
/// prefixed by the axis values of its grid point.
RunReport aggregate(const std::vector<RunReport>& reports, const std::string& axis_json);

/// Writes report.json and <table>.csv into `dir` (created if needed).
void write_report(const RunReport& report, const std::string& dir);

/// CSV text of a table with a header row.
std::string to_csv(const Table& table);

/// FNV-1a 64-bit hash as 16 hex digits.
std::string fnv1a_hex(const std::string& text);

/// Library version string.
const char* version();

/// Parameter names accepted by a command, or empty when the command is unknown.
std::vector<std::string> command_parameters(const std::string& command);

} // namespace qcurv
