// On-disk formats: experiment manifests, raw and aggregate per-cell CSVs,
// per-cell metadata and per-scenario summary tables.
//
// Manifest format (INI-style, '#' comments, unknown keys are errors):
//
//   [experiment]
//   horizon = 1000000
//   runs = 100
//   base_seed = 20250101
//   checkpoints = default            # or: 2, 3, 100, ...
//   alpha_levels = 0.01, 0.05, 0.1
//   output_dir = results
//   permutation_mode = split         # or: duplicate
//
//   [scenario]                       # repeatable
//   preset = A                       # or: label = X and arm_probs = 0.8, 0.9
//
//   [algorithm]                      # repeatable
//   name = etc
//   m = 10, 100, 1000                # comma lists expand to a grid
#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "bandit/analytics.hpp"
#include "bandit/engine.hpp"

namespace bandit {

class ManifestError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DatastoreError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct ExperimentManifest {
    std::vector<ScenarioSpec> scenarios;
    std::vector<PolicyParams> algorithms;
    std::uint64_t horizon = 1'000'000;
    std::uint64_t runs = 100;
    std::uint64_t base_seed = 0;
    /// Empty means default_checkpoints(horizon).
    std::vector<std::uint64_t> checkpoints;
    std::vector<double> alpha_levels = default_alpha_levels();
    std::string output_dir = "results";
    PermutationMode permutation_mode = PermutationMode::Split;

    friend bool operator==(const ExperimentManifest&, const ExperimentManifest&) = default;
};

/// Parses manifest text; `source` prefixes error messages ("source:line: ...").
ExperimentManifest parse_manifest(std::string_view text, std::string_view source = "<manifest>");
ExperimentManifest read_manifest(const std::filesystem::path& path);
std::string serialize_manifest(const ExperimentManifest& m);
void write_manifest(const ExperimentManifest& m, const std::filesystem::path& path);

/// Semantic checks; throws ManifestError naming the offending field.
void validate(const ExperimentManifest& m);

/// Scenarios A, B, C crossed with the full hyperparameter grid (16 cells per
/// scenario), 100 runs, horizon 1e6.
ExperimentManifest paper_grid_manifest();

/// Resolves "paper_grid" to the built-in manifest, anything else as a path.
ExperimentManifest load_manifest(const std::string& name_or_path);

/// One RunConfig per (scenario, algorithm cell), scenario-major.
std::vector<RunConfig> run_configs(const ExperimentManifest& m);

/// Replaces the horizon, keeping explicit checkpoints that still fit and
/// appending the new horizon.
void set_horizon(ExperimentManifest& m, std::uint64_t horizon);

/// Parses "k=v;k=v" as produced by PolicyParams::canonical().
PolicyParams params_from_canonical(Algorithm algorithm, std::string_view canonical);

/// Stable file stem, e.g. "A__etc__m-1000" or "C__ucb".
std::string cell_slug(const ScenarioSpec& scenario, const PolicyParams& params);
inline std::string cell_slug(const RunConfig& c) { return cell_slug(c.scenario, c.params); }

void write_raw_csv(const RunBatchResult& batch, const std::filesystem::path& path);
void write_aggregate_csv(const RunBatchResult& batch, const std::filesystem::path& path);
void write_cell_meta(const RunBatchResult& batch, const std::filesystem::path& path);

/// Writes <slug>.raw.csv, <slug>.agg.csv and <slug>.meta.json into dir and
/// returns the slug.
std::string write_cell(const RunBatchResult& batch, const std::filesystem::path& dir);

/// Rebuilds a batch from <slug>.meta.json and <slug>.raw.csv. Regret values
/// carry the two-decimal rounding of the raw file.
RunBatchResult load_cell(const std::filesystem::path& dir, std::string_view slug);

/// Cell ids (paths of the slug relative to root, '/'-separated) found below root.
std::vector<std::string> list_cells(const std::filesystem::path& root);

/// Summary rows formatted at table precision (2 decimals, ratio 5 decimals).
void write_summary_csv(const std::vector<SummaryRow>& rows, const std::filesystem::path& path);
std::vector<SummaryRow> read_summary_csv(const std::filesystem::path& path);
std::filesystem::path summary_path(const std::filesystem::path& dir, std::string_view scenario);

/// Fixed-width table with the columns Algorithm, Average Regret, Reward
/// Variance, Subopt. Ratio, p-value.
std::string format_summary_table(const std::vector<SummaryRow>& rows, std::string_view title);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view text);

}  // namespace bandit
