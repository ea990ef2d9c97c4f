#pragma once

// Configuration-driven study runner behind the command line tool.

#include "hlab/io.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace hlab {

struct GridConfig {
    int n = 1;
    int N = 64;
};

struct OperatorConfig {
    int m = 1;
    std::string kind = "polyharmonic";
    double delta = 0.5;
    std::uint64_t seed = 1;
    int band = 4;
};

/// Unset bounds fall back to t_min = h, t_max = 1/4.
struct TimeGridConfig {
    std::optional<double> t_min;
    std::optional<double> t_max;
    int levels = 16;
};

struct OutputConfig {
    std::string directory = "hlab_out";
    std::vector<std::string> formats = {"json", "csv"};
};

struct ExperimentConfig {
    GridConfig grid;
    OperatorConfig op;
    TimeGridConfig time_grid;
    std::string study;
    /// Study parameters with every default filled in.
    io::Json parameters = io::Json::object();
    OutputConfig output;

    /// Normalised tree, echoed into reports.
    io::Json to_json() const;
};

/// Study names accepted by run_study (report-merge is handled by merge_reports).
const std::vector<std::string>& study_names();

/// Validates the whole tree before any computation; throws ConfigError naming
/// the dotted path of the first offending field.
ExperimentConfig parse_config(const io::Json& tree);
ExperimentConfig parse_config_text(const std::string& text);

struct StudyResult {
    /// {"schema": 1, "study", "config", "result", "pass"}
    io::Json report;
    /// Extra output files by name (CSV tables, plot manifest, archives).
    std::map<std::string, std::string> files;
    /// Human-readable summary table.
    std::string summary;
    bool pass = false;
};

StudyResult run_study(const ExperimentConfig& config);

/// {"schema": 1, "study": "report-merge", "reports": [...], "pass"} in input order.
io::Json merge_reports(const std::vector<io::Json>& reports);

}  // namespace hlab
