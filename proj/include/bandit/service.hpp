// Command implementations shared by the CLI and the HTTP API, plus the API
// server itself.
#pragma once

#include <atomic>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include <json.hpp>

#include "bandit/analytics.hpp"
#include "bandit/datastore.hpp"

namespace httplib {
class Server;
}

namespace bandit {

/// Results directory: explicit value, else $BANDIT_PLAYGROUND_DATA, else fallback.
std::filesystem::path resolve_data_dir(const std::optional<std::string>& explicit_dir, const std::string& fallback);

struct RunOptions {
    std::string manifest = "paper_grid";
    std::vector<std::string> scenarios;  // filter by label; empty keeps all
    std::optional<std::uint64_t> horizon;
    std::optional<std::uint64_t> runs;
    std::optional<std::uint64_t> base_seed;
    std::optional<std::string> out;
    std::vector<double> alpha;
    unsigned threads = 1;
};

/// Applies the CLI overrides to a manifest.
ExperimentManifest apply_overrides(ExperimentManifest m, const RunOptions& opt);

struct RunOutcome {
    std::filesystem::path dir;
    std::vector<std::string> cells;
    std::map<std::string, std::vector<SummaryRow>> summaries;  // by scenario label
};

/// Runs every cell, writes raw/aggregate CSVs, metadata, per-scenario
/// summaries and the resolved manifest. `progress` receives (done, total) runs.
RunOutcome execute_manifest(const ExperimentManifest& m, const std::filesystem::path& dir, unsigned threads,
                            const std::function<void(std::uint64_t, std::uint64_t)>& progress = {});

int cmd_run(const RunOptions& opt, std::ostream& out, std::ostream& err);

/// Writes analysis/<cell>.json (risk report + the six view series) for every
/// cell below dir.
int cmd_analyze(const std::filesystem::path& dir, const std::vector<double>& alpha, std::ostream& out,
                std::ostream& err);

/// The six evaluation views.
const std::vector<std::string>& view_names();

nlohmann::json risk_json(const RiskReport& report);
/// Throws std::invalid_argument for an unknown view.
nlohmann::json view_series(const RunBatchResult& batch, std::string_view view, const std::vector<double>& alpha);
nlohmann::json summary_json(const SummaryRow& row);

enum class JobState { Queued, Running, Done, Failed };
std::string_view job_state_name(JobState s);

struct ApiJob {
    std::string id;
    ExperimentManifest manifest;
    std::atomic<JobState> state{JobState::Queued};
    std::atomic<double> progress{0.0};
    std::vector<std::string> cells;  // set before state becomes Done
    std::string error;
};

struct ServiceOptions {
    unsigned job_workers = 1;
    unsigned sim_threads = 1;
    std::uint64_t default_horizon = 10'000;
    std::uint64_t default_runs = 20;
};

/// HTTP JSON API over a results directory.
///
///   GET  /api/cells
///   GET  /api/series?cell=&view=
///   GET  /api/summary?scenario=[&job=]
///   GET  /api/risk?cell=[&alpha=][&mode=regret|reward]
///   POST /api/jobs                body {id?, label?, arm_probs, algorithms, alpha?, horizon?, runs?, base_seed?}
///   GET  /api/jobs/{id}
class ApiService {
public:
    ApiService(std::filesystem::path data_dir, ServiceOptions options = {});
    ~ApiService();
    ApiService(const ApiService&) = delete;
    ApiService& operator=(const ApiService&) = delete;

    /// Binds and serves until stop(); returns false when binding fails.
    bool listen(const std::string& host, int port);
    /// Binds to a free port; call serve_bound() afterwards.
    int bind_any_port(const std::string& host);
    void serve_bound();
    void stop();
    bool wait_until_ready() const;

    const std::filesystem::path& data_dir() const noexcept { return data_dir_; }

private:
    void install_routes();
    void worker_loop(std::stop_token stop);
    std::shared_ptr<ApiJob> find_job(const std::string& id) const;

    std::filesystem::path data_dir_;
    ServiceOptions options_;
    std::unique_ptr<httplib::Server> server_;

    mutable std::mutex mutex_;
    std::condition_variable_any cv_;
    std::map<std::string, std::shared_ptr<ApiJob>> jobs_;
    std::deque<std::shared_ptr<ApiJob>> queue_;
    std::uint64_t next_job_ = 1;
    std::vector<std::jthread> workers_;
};

}  // namespace bandit
