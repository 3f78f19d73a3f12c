// Reproducible simulation batches: seed derivation, the arm-permutation
// protocol, checkpoint recording and parallel execution of runs.
#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string_view>
#include <vector>

#include "bandit/environment.hpp"
#include "bandit/policies.hpp"

namespace bandit {

/// How `runs` is distributed over the arm orderings.
enum class PermutationMode {
    Split,      // runs / |permutations| trials per ordering
    Duplicate,  // `runs` trials per ordering
};

struct RunConfig {
    ScenarioSpec scenario;
    PolicyParams params;
    std::uint64_t horizon = 1'000'000;
    std::uint64_t runs = 100;
    std::uint64_t base_seed = 0;
    std::vector<std::uint64_t> checkpoints;
    /// permutations[i][a] is the true arm behind policy arm a.
    std::vector<std::vector<std::size_t>> permutations;
    PermutationMode mode = PermutationMode::Split;
};

/// Metrics of one run frozen at time step t, attributed in canonical arm space.
struct CheckpointRecord {
    std::uint64_t t = 0;
    std::uint64_t cum_reward = 0;
    double cum_regret = 0.0;
    std::uint64_t subopt_pulls = 0;
    std::uint64_t zeros = 0;
    std::uint64_t ones = 0;

    friend bool operator==(const CheckpointRecord&, const CheckpointRecord&) = default;
};

/// Cross-run means at one checkpoint.
struct MeanRecord {
    std::uint64_t t = 0;
    double cum_reward = 0.0;
    double cum_regret = 0.0;
    double subopt_pulls = 0.0;
    double zeros = 0.0;
    double ones = 0.0;
};

struct RunResult {
    std::size_t permutation = 0;
    std::uint64_t run_id = 0;
    std::uint64_t seed = 0;
    std::vector<CheckpointRecord> records;
};

struct RunBatchResult {
    RunConfig config;
    /// Ordered by (permutation, run_id).
    std::vector<RunResult> runs;
    std::vector<MeanRecord> mean;
};

struct BatchOptions {
    /// 0 selects std::thread::hardware_concurrency().
    unsigned threads = 1;
    /// Invoked after each finished run with (finished, total); may be called
    /// from worker threads.
    std::function<void(std::uint64_t, std::uint64_t)> progress;
};

/// {2, 3, 100, 200, 2000, 1e4, 2e4, 1e5, 2e5, 1e6} within [2, horizon], plus horizon.
std::vector<std::uint64_t> default_checkpoints(std::uint64_t horizon);

/// Every ordering of 0..arms-1 in lexicographic order, identity first.
std::vector<std::vector<std::size_t>> all_permutations(std::size_t arms);

/// Folds bytes into a 64-bit value, 8 little-endian bytes at a time (zero
/// padded): h = splitmix64_mix(h ^ word).
std::uint64_t fold_bytes(std::string_view bytes) noexcept;

/// Canonical encoding: base_seed | len-prefixed algorithm id | fold(params) |
/// len-prefixed scenario label | permutation index | run index, every integer
/// as 8 little-endian bytes, strings zero padded to 8-byte words.
std::uint64_t derive_seed(std::uint64_t base_seed, std::string_view algorithm_id, std::string_view params,
                          std::string_view scenario_id, std::uint64_t permutation_index,
                          std::uint64_t run_index) noexcept;

/// Checks scenario and params, checkpoints strictly increasing and ending at
/// the horizon, permutations valid, runs divisible by the number of
/// orderings in split mode. Throws std::invalid_argument.
void validate(const RunConfig& config);

/// Fills defaults: all permutations, default checkpoints.
RunConfig make_run_config(ScenarioSpec scenario, PolicyParams params, std::uint64_t horizon,
                          std::uint64_t runs, std::uint64_t base_seed);

std::uint64_t runs_per_permutation(const RunConfig& config);
std::uint64_t total_runs(const RunConfig& config);
std::uint64_t run_seed(const RunConfig& config, std::size_t permutation, std::uint64_t run_id);

/// Simulates one run under the given arm ordering with an explicit seed.
std::vector<CheckpointRecord> simulate(const RunConfig& config, const std::vector<std::size_t>& permutation,
                                       std::uint64_t seed);

/// One run of the batch; run_id is the global run index (ordering-major).
std::vector<CheckpointRecord> run_single(const RunConfig& config, std::size_t permutation, std::uint64_t run_id);

RunBatchResult run_batch(const RunConfig& config, const BatchOptions& options = {});

/// Means over runs in (permutation, run_id) order.
std::vector<MeanRecord> aggregate(const std::vector<RunResult>& runs);

}  // namespace bandit
