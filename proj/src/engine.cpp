#include "bandit/engine.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <numeric>
#include <stdexcept>
#include <string>
#include <thread>

namespace bandit {

namespace {

void append_u64(std::string& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void append_str(std::string& out, std::string_view s) {
    append_u64(out, s.size());
    out.append(s);
    out.append((8 - s.size() % 8) % 8, '\0');
}

struct Accumulator {
    std::vector<double> gaps;
    std::vector<std::uint64_t> pulls;
    std::uint64_t ones = 0;

    CheckpointRecord snapshot(std::uint64_t t) const {
        CheckpointRecord r;
        r.t = t;
        r.cum_reward = ones;
        r.ones = ones;
        r.zeros = t - ones;
        for (std::size_t k = 0; k < pulls.size(); ++k) {
            r.cum_regret += gaps[k] * static_cast<double>(pulls[k]);
            if (gaps[k] > 0.0) r.subopt_pulls += pulls[k];
        }
        return r;
    }
};

template <class Impl>
void run_steps(Impl& policy, const RunConfig& config, const std::vector<std::size_t>& permutation,
               RewardStream& stream, Accumulator& acc, std::vector<CheckpointRecord>& out) {
    const auto& probs = config.scenario.arm_probs;
    auto next_cp = config.checkpoints.begin();
    for (std::uint64_t t = 1; t <= config.horizon; ++t) {
        const std::size_t arm = policy.select(stream);
        const std::size_t true_arm = permutation[arm];
        const int reward = sample_bernoulli(probs[true_arm], stream);
        policy.observe(arm, reward);
        ++acc.pulls[true_arm];
        acc.ones += static_cast<std::uint64_t>(reward);
        if (next_cp != config.checkpoints.end() && *next_cp == t) {
            out.push_back(acc.snapshot(t));
            ++next_cp;
        }
    }
}

}  // namespace

std::vector<std::uint64_t> default_checkpoints(std::uint64_t horizon) {
    static constexpr std::uint64_t kGrid[] = {2, 3, 100, 200, 2000, 10'000, 20'000, 100'000, 200'000, 1'000'000};
    std::vector<std::uint64_t> out;
    for (std::uint64_t c : kGrid)
        if (c >= 2 && c <= horizon) out.push_back(c);
    if (out.empty() || out.back() != horizon) out.push_back(horizon);
    return out;
}

std::vector<std::vector<std::size_t>> all_permutations(std::size_t arms) {
    std::vector<std::size_t> p(arms);
    std::iota(p.begin(), p.end(), std::size_t{0});
    std::vector<std::vector<std::size_t>> out;
    do {
        out.push_back(p);
    } while (std::next_permutation(p.begin(), p.end()));
    return out;
}

std::uint64_t fold_bytes(std::string_view bytes) noexcept {
    std::uint64_t h = 0;
    for (std::size_t i = 0; i < bytes.size(); i += 8) {
        std::uint64_t w = 0;
        for (std::size_t j = 0; j < 8 && i + j < bytes.size(); ++j)
            w |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes[i + j])) << (8 * j);
        h = splitmix64_mix(h ^ w);
    }
    return h;
}

std::uint64_t derive_seed(std::uint64_t base_seed, std::string_view algorithm_id, std::string_view params,
                          std::string_view scenario_id, std::uint64_t permutation_index,
                          std::uint64_t run_index) noexcept {
    std::string enc;
    enc.reserve(64 + algorithm_id.size() + scenario_id.size());
    append_u64(enc, base_seed);
    append_str(enc, algorithm_id);
    append_u64(enc, fold_bytes(params));
    append_str(enc, scenario_id);
    append_u64(enc, permutation_index);
    append_u64(enc, run_index);
    return fold_bytes(enc);
}

void validate(const RunConfig& c) {
    validate(c.scenario);
    validate(c.params);
    const std::size_t k = c.scenario.arms();
    if (c.horizon <= k) throw std::invalid_argument("horizon must exceed the number of arms");
    if (c.runs == 0) throw std::invalid_argument("runs must be >= 1");
    if (c.checkpoints.empty()) throw std::invalid_argument("checkpoints must not be empty");
    for (std::size_t i = 0; i < c.checkpoints.size(); ++i) {
        if (c.checkpoints[i] == 0) throw std::invalid_argument("checkpoints must be >= 1");
        if (i > 0 && c.checkpoints[i] <= c.checkpoints[i - 1])
            throw std::invalid_argument("checkpoints must be strictly increasing");
    }
    if (c.checkpoints.back() != c.horizon) throw std::invalid_argument("last checkpoint must equal the horizon");
    if (c.permutations.empty()) throw std::invalid_argument("at least one arm permutation is required");
    for (const auto& p : c.permutations) {
        auto sorted = p;
        std::sort(sorted.begin(), sorted.end());
        bool ok = sorted.size() == k;
        for (std::size_t i = 0; ok && i < k; ++i) ok = sorted[i] == i;
        if (!ok) throw std::invalid_argument("permutation is not an ordering of the scenario's arms");
    }
    if (c.mode == PermutationMode::Split && c.runs % c.permutations.size() != 0) {
        throw std::invalid_argument("runs (" + std::to_string(c.runs) + ") must be divisible by the number of arm orderings (" +
                                    std::to_string(c.permutations.size()) + ")");
    }
}

RunConfig make_run_config(ScenarioSpec scenario, PolicyParams params, std::uint64_t horizon, std::uint64_t runs,
                          std::uint64_t base_seed) {
    RunConfig c;
    c.permutations = all_permutations(scenario.arms());
    c.scenario = std::move(scenario);
    c.params = params;
    c.horizon = horizon;
    c.runs = runs;
    c.base_seed = base_seed;
    c.checkpoints = default_checkpoints(horizon);
    return c;
}

std::uint64_t runs_per_permutation(const RunConfig& c) {
    return c.mode == PermutationMode::Split ? c.runs / c.permutations.size() : c.runs;
}

std::uint64_t total_runs(const RunConfig& c) { return runs_per_permutation(c) * c.permutations.size(); }

std::uint64_t run_seed(const RunConfig& c, std::size_t permutation, std::uint64_t run_id) {
    return derive_seed(c.base_seed, algorithm_id(c.params.algorithm), c.params.canonical(), c.scenario.label,
                       permutation, run_id);
}

std::vector<CheckpointRecord> simulate(const RunConfig& config, const std::vector<std::size_t>& permutation,
                                       std::uint64_t seed) {
    Policy policy = make_policy(config.scenario.arms(), config.horizon, config.params);
    RewardStream stream(seed);
    Accumulator acc{config.scenario.gaps(), std::vector<std::uint64_t>(config.scenario.arms(), 0), 0};
    std::vector<CheckpointRecord> out;
    out.reserve(config.checkpoints.size());
    std::visit([&](auto& impl) { run_steps(impl, config, permutation, stream, acc, out); }, policy);
    return out;
}

std::vector<CheckpointRecord> run_single(const RunConfig& config, std::size_t permutation, std::uint64_t run_id) {
    if (permutation >= config.permutations.size()) throw std::out_of_range("permutation index out of range");
    return simulate(config, config.permutations[permutation], run_seed(config, permutation, run_id));
}

std::vector<MeanRecord> aggregate(const std::vector<RunResult>& runs) {
    if (runs.empty()) return {};
    const std::size_t n_cp = runs.front().records.size();
    std::vector<MeanRecord> mean(n_cp);
    for (std::size_t i = 0; i < n_cp; ++i) {
        MeanRecord& m = mean[i];
        m.t = runs.front().records[i].t;
        for (const auto& run : runs) {
            const auto& r = run.records.at(i);
            m.cum_reward += static_cast<double>(r.cum_reward);
            m.cum_regret += r.cum_regret;
            m.subopt_pulls += static_cast<double>(r.subopt_pulls);
            m.zeros += static_cast<double>(r.zeros);
            m.ones += static_cast<double>(r.ones);
        }
        const double n = static_cast<double>(runs.size());
        m.cum_reward /= n;
        m.cum_regret /= n;
        m.subopt_pulls /= n;
        m.zeros /= n;
        m.ones /= n;
    }
    return mean;
}

RunBatchResult run_batch(const RunConfig& config, const BatchOptions& options) {
    validate(config);
    RunBatchResult result;
    result.config = config;

    const std::uint64_t per_perm = runs_per_permutation(config);
    const std::uint64_t total = total_runs(config);
    result.runs.resize(total);
    for (std::uint64_t i = 0; i < total; ++i) {
        auto& r = result.runs[i];
        r.permutation = static_cast<std::size_t>(i / per_perm);
        r.run_id = i;
        r.seed = run_seed(config, r.permutation, r.run_id);
    }

    unsigned threads = options.threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : options.threads;
    threads = static_cast<unsigned>(std::min<std::uint64_t>(threads, total));

    std::atomic<std::uint64_t> next{0};
    std::atomic<std::uint64_t> finished{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        for (std::uint64_t i = next++; i < total; i = next++) {
            try {
                auto& r = result.runs[i];
                r.records = simulate(config, config.permutations[r.permutation], r.seed);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
            }
            const auto done = ++finished;
            if (options.progress) options.progress(done, total);
        }
    };
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(threads);
        for (unsigned i = 0; i < threads; ++i) pool.emplace_back(worker);
    }
    if (failure) std::rethrow_exception(failure);

    result.mean = aggregate(result.runs);
    return result;
}

}  // namespace bandit
