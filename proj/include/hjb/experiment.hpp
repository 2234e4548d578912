#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "hjb/analysis.hpp"
#include "hjb/catalog.hpp"
#include "hjb/solvers.hpp"

namespace hjb {

enum class Algorithm { VI, PI, API };

const char* algorithm_name(Algorithm a);

/// Node-per-axis limit applied unless `allow_large` is set.
int desk_node_limit(int dim);

struct RunSettings {
    Algorithm algorithm = Algorithm::API;
    int fine_nodes = 0;
    int coarse_nodes = 0;  ///< 0 = (fine_nodes + 1) / 2
    double stop_constant = 0.2;
    double coarse_constant = 5.0;
    int max_iterations = 20000;
    EvalBackend backend = EvalBackend::FixedPoint;
    bool record_residuals = true;
};

/// Catalog entry sized for a fine grid of `fine_nodes` per axis (the reduced
/// heat model ties its default target radius to the fine spacing).
CatalogEntry make_entry(const std::string& problem, ProblemOverrides overrides, int fine_nodes);

/// Runs one algorithm with dt = ratio * dx on each grid. PI starts from the
/// default initial field and control index 0 everywhere.
Solution solve(const CatalogEntry& entry, const RunSettings& settings,
               std::size_t node_cap = kDefaultNodeCap);

struct SliceRequest {
    int axis = 0;
    double coordinate = 0.0;
};

/// Parses "axis=value" (axis counted from 1, as in x1..x4).
SliceRequest parse_slice(const std::string& text);

/// One solver run. Text form is flat `key = value` lines with dotted keys;
/// `#` starts a comment.
///
///   problem.name            catalog entry (required)
///   problem.domain.lower    problem.domain.upper
///   problem.controls        comma-separated per-axis counts
///   problem.dt_ratio        problem.exterior_value
///   problem.target_radius   problem.discount
///   algorithm               VI | PI | API (default API)
///   grid.fine.nodes         nodes per axis (required)
///   grid.coarse.nodes       API only; default (fine + 1) / 2
///   solver.stop_constant    default 0.2
///   solver.max_iterations   default 20000
///   solver.backend          fixed_point | direct
///   api.coarse_constant     default 5
///   output.dir              default "."
///   output.field            true | false (default true)
///   output.slice            axis=value
///   limits.allow_large      true | false
struct ExperimentConfig {
    std::string problem;
    ProblemOverrides overrides;
    Algorithm algorithm = Algorithm::API;
    int fine_nodes = 0;
    int coarse_nodes = 0;  ///< 0 = derived from fine_nodes
    double stop_constant = 0.2;
    double coarse_constant = 5.0;
    int max_iterations = 20000;
    EvalBackend backend = EvalBackend::FixedPoint;
    std::filesystem::path output_dir = ".";
    bool export_field = true;
    std::optional<SliceRequest> slice;
    bool allow_large = false;
    /// Parsed entries in file order, echoed into the results.
    std::vector<std::pair<std::string, std::string>> entries;

    /// Throws ConfigError naming the offending key.
    void validate() const;
};

ExperimentConfig parse_config(std::istream& in);
ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);

struct ExperimentResult {
    ExperimentConfig config;
    RunReport report;
    std::optional<ErrorRecord> error;
    std::vector<std::filesystem::path> files;
    /// Kept in memory for callers; not serialized.
    std::optional<ValueField> values;
};

/// Builds the problem, runs the configured algorithm and writes
/// config.txt, report.json, optionally field.txt / slice.txt and errors.csv
/// into the output directory. Each file is written to a temporary name and
/// renamed into place. Invalid configs throw before anything is written.
ExperimentResult run_experiment(const ExperimentConfig& config);

/// Process exit status: 0 converged, 3 not converged.
int exit_status(const ExperimentResult& result);

namespace exit_code {
inline constexpr int ok = 0;
inline constexpr int config_error = 2;
inline constexpr int not_converged = 3;
inline constexpr int io_error = 4;
}  // namespace exit_code

/// Writes `contents` to `path` via a temporary file and rename.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);

struct SuiteOptions {
    std::filesystem::path output_dir = ".";
    bool allow_large = false;
    /// Upper bound on nodes per axis for every row (0 = suite defaults).
    int max_nodes = 0;
};

/// Runs a named suite: paper_tables, invariants or rates. Tables go to
/// `out` and to files under the output directory. Returns an exit status.
int run_suite(const std::string& name, const SuiteOptions& options, std::ostream& out);

const std::vector<std::string>& suite_names();

/// Re-exports the field saved in a result directory as a full table or a slice.
std::filesystem::path export_field(const std::filesystem::path& result_dir, const std::filesystem::path& out_dir,
                                   const std::string& format, const std::optional<SliceRequest>& slice);

}  // namespace hjb
