// bandit_playground: run experiment grids, analyze results, serve the API.
#include <csignal>
#include <iostream>

#include <CLI11.hpp>

#include "bandit/service.hpp"

namespace {

bandit::ApiService* g_service = nullptr;

void handle_signal(int) {
    if (g_service) g_service->stop();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Reproducible multi-armed bandit experiments"};
    app.require_subcommand(1);

    bandit::RunOptions run;
    std::uint64_t horizon = 0, runs = 0, base_seed = 0;
    auto* run_cmd = app.add_subcommand("run", "Run every cell of a manifest and write CSV results");
    run_cmd->add_option("--manifest", run.manifest, "Manifest file, or 'paper_grid' for the built-in grid")
        ->capture_default_str();
    run_cmd->add_option("--scenario", run.scenarios, "Only run these scenario labels");
    auto* horizon_opt = run_cmd->add_option("--horizon", horizon, "Override the horizon");
    auto* runs_opt = run_cmd->add_option("--runs", runs, "Override the number of runs per cell");
    auto* seed_opt = run_cmd->add_option("--base-seed", base_seed, "Override the base seed");
    run_cmd->add_option("--threads", run.threads, "Worker threads (0 = all cores)")->capture_default_str();
    run_cmd->add_option("--alpha", run.alpha, "VaR confidence levels")->delimiter(',');
    std::string run_out;
    auto* run_out_opt = run_cmd->add_option("--out", run_out, "Results directory");

    std::string analyze_out;
    std::vector<double> analyze_alpha;
    auto* analyze_cmd = app.add_subcommand("analyze", "Write risk reports and view series for every result cell");
    auto* analyze_out_opt = analyze_cmd->add_option("--out", analyze_out, "Results directory");
    analyze_cmd->add_option("--alpha", analyze_alpha, "VaR confidence levels")->delimiter(',');

    std::string serve_out;
    int port = 8080;
    unsigned serve_threads = 1;
    auto* serve_cmd = app.add_subcommand("serve", "Serve the HTTP JSON API over a results directory");
    auto* serve_out_opt = serve_cmd->add_option("--out", serve_out, "Results directory");
    serve_cmd->add_option("--port", port, "Port")->capture_default_str();
    serve_cmd->add_option("--threads", serve_threads, "Simulation threads per job")->capture_default_str();

    CLI11_PARSE(app, argc, argv);

    auto optional_str = [](CLI::Option* opt, const std::string& v) {
        return opt->count() ? std::optional<std::string>(v) : std::nullopt;
    };

    if (run_cmd->parsed()) {
        if (horizon_opt->count()) run.horizon = horizon;
        if (runs_opt->count()) run.runs = runs;
        if (seed_opt->count()) run.base_seed = base_seed;
        run.out = optional_str(run_out_opt, run_out);
        return bandit::cmd_run(run, std::cout, std::cerr);
    }
    if (analyze_cmd->parsed()) {
        const auto dir = bandit::resolve_data_dir(optional_str(analyze_out_opt, analyze_out), "results");
        return bandit::cmd_analyze(dir, analyze_alpha, std::cout, std::cerr);
    }
    if (serve_cmd->parsed()) {
        const auto dir = bandit::resolve_data_dir(optional_str(serve_out_opt, serve_out), "results");
        bandit::ServiceOptions opts;
        opts.sim_threads = serve_threads;
        bandit::ApiService service(dir, opts);
        g_service = &service;
        std::signal(SIGINT, handle_signal);
        std::signal(SIGTERM, handle_signal);
        std::cout << "serving " << dir.string() << " on http://127.0.0.1:" << port << std::endl;
        if (!service.listen("0.0.0.0", port)) {
            std::cerr << "error: cannot bind port " << port << "\n";
            return 1;
        }
        return 0;
    }
    return 0;
}
