#include "bandit/service.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>

#include <httplib.h>

#include "bandit/format.hpp"

namespace bandit {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

bool safe_id(std::string_view id) {
    if (id.empty() || id.size() > 64) return false;
    return std::all_of(id.begin(), id.end(), [](char c) {
        return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_' || c == '-';
    });
}

/// Cell ids are '/'-separated paths below the data dir without '..' parts.
std::optional<std::pair<fs::path, std::string>> resolve_cell(const fs::path& root, const std::string& id) {
    if (id.empty() || id.front() == '/') return std::nullopt;
    const fs::path rel(id);
    for (const auto& part : rel)
        if (part == ".." || part == ".") return std::nullopt;
    const fs::path full = root / rel;
    const std::string slug = full.filename().string();
    if (!fs::exists(full.parent_path() / (slug + ".meta.json"))) return std::nullopt;
    return std::make_pair(full.parent_path(), slug);
}

std::vector<double> parse_alpha_list(const std::string& s) {
    std::vector<double> out;
    std::size_t start = 0;
    while (start <= s.size()) {
        const auto comma = s.find(',', start);
        const auto item = s.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
        const double a = parse_double(item, "alpha");
        if (!(a > 0.0 && a < 1.0)) throw std::invalid_argument("alpha " + item + " is outside (0,1)");
        out.push_back(a);
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return out;
}

void send_json(httplib::Response& res, int status, const json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, std::string_view error, std::string_view detail) {
    send_json(res, status, json{{"error", error}, {"detail", detail}});
}

std::vector<std::uint64_t> checkpoint_times(const RunBatchResult& b) {
    std::vector<std::uint64_t> t;
    for (const auto& m : b.mean) t.push_back(m.t);
    return t;
}

PolicyParams params_from_json(const json& j) {
    if (j.is_string()) {
        PolicyParams p;
        p.algorithm = parse_algorithm(j.get<std::string>());
        return p;
    }
    if (!j.is_object() || !j.contains("name")) throw std::invalid_argument("algorithm entries are names or {name, ...}");
    std::string canonical;
    for (const auto& [key, value] : j.items()) {
        if (key == "name") continue;
        if (!canonical.empty()) canonical += ';';
        if (value.is_boolean()) canonical += key + "=" + (value.get<bool>() ? "1" : "0");
        else if (value.is_number_unsigned() || value.is_number_integer()) canonical += key + "=" + std::to_string(value.get<std::int64_t>());
        else if (value.is_number()) canonical += key + "=" + shortest(value.get<double>());
        else throw std::invalid_argument("parameter '" + key + "' must be a number");
    }
    try {
        return params_from_canonical(parse_algorithm(j.at("name").get<std::string>()), canonical);
    } catch (const DatastoreError& ex) {
        throw std::invalid_argument(ex.what());
    }
}

}  // namespace

fs::path resolve_data_dir(const std::optional<std::string>& explicit_dir, const std::string& fallback) {
    if (explicit_dir) return *explicit_dir;
    if (const char* env = std::getenv("BANDIT_PLAYGROUND_DATA"); env && *env) return env;
    return fallback;
}

ExperimentManifest apply_overrides(ExperimentManifest m, const RunOptions& opt) {
    if (!opt.scenarios.empty()) {
        std::vector<ScenarioSpec> kept;
        for (const auto& label : opt.scenarios) {
            auto it = std::find_if(m.scenarios.begin(), m.scenarios.end(), [&](const auto& s) { return s.label == label; });
            if (it == m.scenarios.end()) throw ManifestError("scenario '" + label + "' is not defined in the manifest");
            kept.push_back(*it);
        }
        m.scenarios = std::move(kept);
    }
    if (opt.horizon) set_horizon(m, *opt.horizon);
    if (opt.runs) m.runs = *opt.runs;
    if (opt.base_seed) m.base_seed = *opt.base_seed;
    if (!opt.alpha.empty()) m.alpha_levels = opt.alpha;
    if (opt.out) m.output_dir = *opt.out;
    validate(m);
    return m;
}

RunOutcome execute_manifest(const ExperimentManifest& m, const fs::path& dir, unsigned threads,
                            const std::function<void(std::uint64_t, std::uint64_t)>& progress) {
    const auto configs = run_configs(m);
    std::uint64_t total = 0;
    for (const auto& c : configs) total += total_runs(c);

    RunOutcome outcome;
    outcome.dir = dir;
    std::uint64_t done_before = 0;
    for (const auto& c : configs) {
        BatchOptions opts;
        opts.threads = threads;
        if (progress) {
            opts.progress = [&, base = done_before](std::uint64_t done, std::uint64_t) { progress(base + done, total); };
        }
        const auto batch = run_batch(c, opts);
        done_before += total_runs(c);
        outcome.cells.push_back(write_cell(batch, dir));
        outcome.summaries[c.scenario.label].push_back(summarize(batch));
    }
    for (const auto& [label, rows] : outcome.summaries) write_summary_csv(rows, summary_path(dir, label));
    write_manifest(m, dir / "manifest.ini");
    return outcome;
}

int cmd_run(const RunOptions& opt, std::ostream& out, std::ostream& err) {
    try {
        auto m = apply_overrides(load_manifest(opt.manifest), opt);
        const fs::path dir = resolve_data_dir(opt.out, m.output_dir);
        m.output_dir = dir.string();
        const auto outcome = execute_manifest(m, dir, opt.threads);
        for (const auto& s : m.scenarios) {
            const auto rows = read_summary_csv(summary_path(dir, s.label));
            out << format_summary_table(rows, "Scenario " + s.label + " - summary statistics across " +
                                                  std::to_string(m.runs) + " runs (T=" + std::to_string(m.horizon) + ")")
                << "\n";
        }
        out << "wrote " << outcome.cells.size() << " cells to " << dir.string() << "\n";
        return 0;
    } catch (const std::exception& ex) {
        err << "error: " << ex.what() << "\n";
        return 1;
    }
}

const std::vector<std::string>& view_names() {
    static const std::vector<std::string> names{"reward_over_time",           "regret_over_time",
                                                "reward_outcome_distribution", "final_regret_distribution",
                                                "var_by_alpha",                "subopt_ratio_over_time"};
    return names;
}

json risk_json(const RiskReport& r) {
    json var = json::array();
    for (const auto& [alpha, value] : r.var_alpha) var.push_back({{"alpha", alpha}, {"value", value}});
    return {{"final_regrets", r.final_regrets},
            {"final_rewards", r.final_rewards},
            {"sample_variance", r.sample_variance},
            {"alpha_levels", r.alpha_levels},
            {"var_alpha", var},
            {"mode", r.mode == VarMode::Regret ? "regret" : "reward"},
            {"chi2_stat", r.chi2_stat},
            {"chi2_p", r.chi2_p}};
}

json view_series(const RunBatchResult& b, std::string_view view, const std::vector<double>& alpha) {
    json j{{"view", view}};
    const auto t = checkpoint_times(b);
    if (view == "reward_over_time" || view == "regret_over_time" || view == "subopt_ratio_over_time") {
        std::vector<double> values;
        for (const auto& m : b.mean) {
            if (view == "reward_over_time") values.push_back(m.cum_reward);
            else if (view == "regret_over_time") values.push_back(m.cum_regret);
            else values.push_back(suboptimal_ratio(m.subopt_pulls, m.t));
        }
        j["t"] = t;
        j["values"] = values;
    } else if (view == "reward_outcome_distribution") {
        std::vector<double> zeros, ones;
        for (const auto& o : reward_outcome_distribution(b)) {
            zeros.push_back(o.zeros);
            ones.push_back(o.ones);
        }
        j["t"] = t;
        j["zeros"] = zeros;
        j["ones"] = ones;
    } else if (view == "final_regret_distribution") {
        const auto regrets = final_regrets(b);
        const auto bins = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(regrets.size()))));
        const auto h = histogram(regrets, std::max<std::size_t>(bins, 1));
        j["edges"] = h.edges;
        j["counts"] = h.counts;
        j["values"] = regrets;
    } else if (view == "var_by_alpha") {
        const auto regrets = final_regrets(b);
        std::vector<double> values;
        for (double a : alpha) values.push_back(var_at_risk(regrets, a));
        j["alpha"] = alpha;
        j["values"] = values;
    } else {
        std::string valid;
        for (const auto& v : view_names()) valid += (valid.empty() ? "" : ", ") + v;
        throw std::invalid_argument("unknown view '" + std::string(view) + "' (valid: " + valid + ")");
    }
    return j;
}

json summary_json(const SummaryRow& r) {
    return {{"algorithm", r.algorithm},     {"algorithm_id", r.algorithm_id},
            {"params", r.params},           {"scenario", r.scenario},
            {"horizon", r.horizon},         {"runs", r.runs},
            {"avg_regret", r.avg_regret},   {"regret_se", r.regret_se},
            {"reward_variance", r.reward_variance}, {"subopt_ratio", r.subopt_ratio},
            {"p_value", r.p_value}};
}

int cmd_analyze(const fs::path& dir, const std::vector<double>& alpha_in, std::ostream& out, std::ostream& err) {
    try {
        const auto cells = list_cells(dir);
        if (cells.empty()) throw DatastoreError(dir.string() + ": no result cells found");
        std::vector<double> alpha = alpha_in;
        if (alpha.empty()) {
            alpha = default_alpha_levels();
            if (fs::exists(dir / "manifest.ini")) alpha = read_manifest(dir / "manifest.ini").alpha_levels;
        }
        for (const auto& id : cells) {
            const auto loc = resolve_cell(dir, id);
            if (!loc) continue;
            const auto batch = load_cell(loc->first, loc->second);
            json doc{{"cell", id}, {"risk", risk_json(risk_report(batch, alpha))}};
            for (const auto& v : view_names()) doc["series"][v] = view_series(batch, v, alpha);
            write_text_file(dir / "analysis" / (id + ".json"), doc.dump(2) + "\n");
        }
        out << "analyzed " << cells.size() << " cells into " << (dir / "analysis").string() << "\n";
        return 0;
    } catch (const std::exception& ex) {
        err << "error: " << ex.what() << "\n";
        return 1;
    }
}

std::string_view job_state_name(JobState s) {
    switch (s) {
        case JobState::Queued: return "queued";
        case JobState::Running: return "running";
        case JobState::Done: return "done";
        case JobState::Failed: return "failed";
    }
    return "unknown";
}

// ApiService

ApiService::ApiService(fs::path data_dir, ServiceOptions options)
    : data_dir_(std::move(data_dir)), options_(options), server_(std::make_unique<httplib::Server>()) {
    install_routes();
    for (unsigned i = 0; i < std::max(1u, options_.job_workers); ++i)
        workers_.emplace_back([this](std::stop_token st) { worker_loop(st); });
}

ApiService::~ApiService() {
    stop();
    for (auto& w : workers_) w.request_stop();
    cv_.notify_all();
    workers_.clear();
}

bool ApiService::listen(const std::string& host, int port) { return server_->listen(host, port); }

int ApiService::bind_any_port(const std::string& host) { return server_->bind_to_any_port(host); }

void ApiService::serve_bound() { server_->listen_after_bind(); }

void ApiService::stop() { server_->stop(); }

bool ApiService::wait_until_ready() const {
    for (int i = 0; i < 500 && !server_->is_running(); ++i) std::this_thread::sleep_for(std::chrono::milliseconds(10));
    return server_->is_running();
}

std::shared_ptr<ApiJob> ApiService::find_job(const std::string& id) const {
    std::lock_guard lock(mutex_);
    auto it = jobs_.find(id);
    return it == jobs_.end() ? nullptr : it->second;
}

void ApiService::worker_loop(std::stop_token stop) {
    while (!stop.stop_requested()) {
        std::shared_ptr<ApiJob> job;
        {
            std::unique_lock lock(mutex_);
            cv_.wait(lock, stop, [&] { return !queue_.empty(); });
            if (stop.stop_requested()) return;
            job = queue_.front();
            queue_.pop_front();
        }
        job->state = JobState::Running;
        try {
            const fs::path dir = data_dir_ / "jobs" / job->id;
            const auto outcome = execute_manifest(job->manifest, dir, options_.sim_threads,
                                                  [&](std::uint64_t done, std::uint64_t total) {
                                                      job->progress = static_cast<double>(done) / static_cast<double>(total);
                                                  });
            for (const auto& slug : outcome.cells) job->cells.push_back("jobs/" + job->id + "/" + slug);
            job->progress = 1.0;
            job->state = JobState::Done;
        } catch (const std::exception& ex) {
            job->error = ex.what();
            job->state = JobState::Failed;
        }
    }
}

void ApiService::install_routes() {
    auto& s = *server_;

    s.Get("/api/cells", [this](const httplib::Request&, httplib::Response& res) {
        json cells = json::array();
        for (const auto& id : list_cells(data_dir_)) {
            const auto loc = resolve_cell(data_dir_, id);
            if (!loc) continue;
            try {
                const json meta = json::parse(read_text_file(loc->first / (loc->second + ".meta.json")));
                cells.push_back({{"cell", id},
                                 {"algorithm", meta.at("algorithm")},
                                 {"display_name", meta.at("display_name")},
                                 {"params", meta.at("params")},
                                 {"scenario", meta.at("scenario")},
                                 {"horizon", meta.at("horizon")},
                                 {"runs", meta.at("runs")}});
            } catch (const std::exception&) {
                continue;
            }
        }
        send_json(res, 200, json{{"cells", cells}});
    });

    s.Get("/api/series", [this](const httplib::Request& req, httplib::Response& res) {
        const auto cell = req.get_param_value("cell");
        const auto view = req.get_param_value("view");
        const auto& views = view_names();
        if (std::find(views.begin(), views.end(), view) == views.end()) {
            send_json(res, 400, json{{"error", "invalid view"},
                                     {"detail", "unknown view '" + view + "'"},
                                     {"valid_views", views}});
            return;
        }
        const auto loc = resolve_cell(data_dir_, cell);
        if (!loc) return send_error(res, 404, "unknown cell", cell);
        try {
            std::vector<double> alpha = default_alpha_levels();
            if (req.has_param("alpha")) alpha = parse_alpha_list(req.get_param_value("alpha"));
            auto body = view_series(load_cell(loc->first, loc->second), view, alpha);
            body["cell"] = cell;
            send_json(res, 200, body);
        } catch (const std::invalid_argument& ex) {
            send_error(res, 400, "invalid request", ex.what());
        } catch (const std::exception& ex) {
            send_error(res, 500, "read failure", ex.what());
        }
    });

    s.Get("/api/summary", [this](const httplib::Request& req, httplib::Response& res) {
        const auto scenario = req.get_param_value("scenario");
        if (!safe_id(scenario)) return send_error(res, 400, "invalid scenario", "scenario must match [A-Za-z0-9_-]+");
        fs::path dir = data_dir_;
        if (req.has_param("job")) {
            const auto job = req.get_param_value("job");
            if (!safe_id(job)) return send_error(res, 400, "invalid job id", job);
            dir = data_dir_ / "jobs" / job;
        }
        const auto path = summary_path(dir, scenario);
        if (!fs::exists(path)) return send_error(res, 404, "unknown scenario", "no summary for scenario '" + scenario + "'");
        try {
            json rows = json::array();
            for (const auto& r : read_summary_csv(path)) rows.push_back(summary_json(r));
            send_json(res, 200, json{{"scenario", scenario}, {"rows", rows}});
        } catch (const std::exception& ex) {
            send_error(res, 500, "read failure", ex.what());
        }
    });

    s.Get("/api/risk", [this](const httplib::Request& req, httplib::Response& res) {
        const auto cell = req.get_param_value("cell");
        const auto loc = resolve_cell(data_dir_, cell);
        if (!loc) return send_error(res, 404, "unknown cell", cell);
        try {
            std::vector<double> alpha = default_alpha_levels();
            if (req.has_param("alpha")) alpha = parse_alpha_list(req.get_param_value("alpha"));
            VarMode mode = VarMode::Regret;
            if (req.has_param("mode")) {
                const auto m = req.get_param_value("mode");
                if (m == "reward") mode = VarMode::Reward;
                else if (m != "regret") throw std::invalid_argument("mode must be 'regret' or 'reward'");
            }
            auto body = risk_json(risk_report(load_cell(loc->first, loc->second), alpha, mode));
            body["cell"] = cell;
            send_json(res, 200, body);
        } catch (const std::invalid_argument& ex) {
            send_error(res, 400, "invalid request", ex.what());
        } catch (const std::exception& ex) {
            send_error(res, 500, "read failure", ex.what());
        }
    });

    s.Post("/api/jobs", [this](const httplib::Request& req, httplib::Response& res) {
        json body;
        try {
            body = json::parse(req.body);
            if (!body.is_object()) throw std::invalid_argument("request body must be a JSON object");
        } catch (const std::exception& ex) {
            return send_error(res, 400, "invalid manifest", ex.what());
        }

        auto job = std::make_shared<ApiJob>();
        try {
            static const std::vector<std::string> allowed{"id", "label", "arm_probs", "algorithms", "alpha",
                                                          "horizon", "runs", "base_seed"};
            for (const auto& [key, _] : body.items())
                if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
                    throw std::invalid_argument("unknown field '" + key + "'");

            ExperimentManifest m;
            m.scenarios = {ScenarioSpec{body.value("label", std::string("custom")),
                                        body.at("arm_probs").get<std::vector<double>>()}};
            m.algorithms.clear();
            for (const auto& a : body.at("algorithms")) m.algorithms.push_back(params_from_json(a));
            m.horizon = body.value("horizon", options_.default_horizon);
            m.runs = body.value("runs", options_.default_runs);
            m.base_seed = body.value("base_seed", std::uint64_t{0});
            if (body.contains("alpha")) {
                const auto& a = body.at("alpha");
                m.alpha_levels = a.is_array() ? a.get<std::vector<double>>() : std::vector<double>{a.get<double>()};
            }
            validate(m);
            job->manifest = m;
        } catch (const std::exception& ex) {
            return send_error(res, 400, "invalid manifest", ex.what());
        }

        {
            std::lock_guard lock(mutex_);
            if (body.contains("id")) {
                job->id = body.at("id").is_string() ? body.at("id").get<std::string>() : "";
                if (!safe_id(job->id)) return send_error(res, 400, "invalid manifest", "id must match [A-Za-z0-9_-]{1,64}");
                if (jobs_.count(job->id) || fs::exists(data_dir_ / "jobs" / job->id))
                    return send_error(res, 409, "duplicate job id", job->id);
            } else {
                do {
                    job->id = "job-" + std::to_string(next_job_++);
                } while (jobs_.count(job->id) || fs::exists(data_dir_ / "jobs" / job->id));
            }
            job->manifest.output_dir = (data_dir_ / "jobs" / job->id).string();
            jobs_[job->id] = job;
            queue_.push_back(job);
        }
        cv_.notify_one();
        send_json(res, 202, json{{"id", job->id}, {"state", "queued"}});
    });

    s.Get(R"(/api/jobs/([A-Za-z0-9_-]+))", [this](const httplib::Request& req, httplib::Response& res) {
        const auto job = find_job(req.matches[1]);
        if (!job) return send_error(res, 404, "unknown job", std::string(req.matches[1]));
        const JobState state = job->state.load();
        json body{{"id", job->id}, {"state", job_state_name(state)}, {"progress", job->progress.load()}};
        if (state == JobState::Done) body["cells"] = job->cells;
        if (state == JobState::Failed) body["error"] = job->error;
        send_json(res, 200, body);
    });
}

}  // namespace bandit
