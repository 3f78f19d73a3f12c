// Randomized invariants over the simulation core. Built as its own binary so
// the suite runs standalone: ./property_tests
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "bandit/analytics.hpp"
#include "bandit/engine.hpp"

using namespace bandit;

namespace {

ScenarioSpec random_scenario(RewardStream& rng, std::size_t arms) {
    ScenarioSpec s{"r", {}};
    for (std::size_t a = 0; a < arms; ++a) s.arm_probs.push_back(std::round(rng.next_uniform() * 1000.0) / 1000.0);
    return s;
}

PolicyParams random_params(RewardStream& rng) {
    const auto& algs = all_algorithms();
    PolicyParams p;
    p.algorithm = algs[rng.next_word() % algs.size()];
    p.m = 1 + rng.next_word() % 200;
    p.epsilon = rng.next_uniform();
    return p;
}

}  // namespace

TEST_CASE("conservation: pulls and reward counts add up to t") {
    RewardStream rng(101);
    for (int trial = 0; trial < 300; ++trial) {
        const auto scenario = random_scenario(rng, 2 + rng.next_word() % 3);
        const auto params = random_params(rng);
        const std::uint64_t horizon = scenario.arms() + 1 + rng.next_word() % 3000;
        CAPTURE(algorithm_id(params.algorithm));
        auto policy = make_policy(scenario.arms(), horizon, params);
        RewardStream stream(rng.next_word());
        std::uint64_t ones = 0;
        for (std::uint64_t t = 1; t <= horizon; ++t) {
            const auto arm = select_arm(policy, stream);
            REQUIRE(arm < scenario.arms());
            const int r = sample_reward(scenario, arm, stream);
            ones += static_cast<std::uint64_t>(r);
            observe(policy, arm, r);
            const auto& st = arm_stats(policy);
            std::uint64_t pulls = 0, rewards = 0;
            for (const auto& s : st) {
                pulls += s.count;
                rewards += s.reward_sum;
            }
            REQUIRE(pulls == t);
            REQUIRE(rewards == ones);
        }
    }
}

TEST_CASE("checkpoint records are monotone and satisfy the regret identity") {
    RewardStream rng(202);
    for (int trial = 0; trial < 200; ++trial) {
        const auto scenario = random_scenario(rng, 2 + rng.next_word() % 2);
        const auto params = random_params(rng);
        const std::uint64_t horizon = 10 + rng.next_word() % 5000;
        auto cfg = make_run_config(scenario, params, horizon, scenario.arms() == 2 ? 2 : 6, rng.next_word());
        const auto gaps = scenario.gaps();
        double min_gap = 1.0;
        for (double g : gaps)
            if (g > 0.0) min_gap = std::min(min_gap, g);
        for (std::size_t perm = 0; perm < cfg.permutations.size(); ++perm) {
            const auto recs = run_single(cfg, perm, perm);
            for (std::size_t i = 0; i < recs.size(); ++i) {
                const auto& r = recs[i];
                REQUIRE(r.zeros + r.ones == r.t);
                REQUIRE(r.cum_reward == r.ones);
                REQUIRE(r.subopt_pulls <= r.t);
                REQUIRE(r.cum_regret >= min_gap * static_cast<double>(r.subopt_pulls) - 1e-9);
                if (scenario.arms() == 2)
                    REQUIRE(r.cum_regret == doctest::Approx(scenario.max_gap() * static_cast<double>(r.subopt_pulls)));
                if (i == 0) continue;
                const auto& q = recs[i - 1];
                REQUIRE(r.t > q.t);
                REQUIRE(r.cum_reward >= q.cum_reward);
                REQUIRE(r.cum_regret >= q.cum_regret);
                REQUIRE(r.subopt_pulls >= q.subopt_pulls);
                REQUIRE(r.zeros >= q.zeros);
                REQUIRE(r.ones >= q.ones);
            }
        }
    }
}

TEST_CASE("elimination: active sets only shrink and eliminated arms are never played") {
    RewardStream rng(303);
    for (int trial = 0; trial < 120; ++trial) {
        const auto scenario = random_scenario(rng, 2 + rng.next_word() % 3);
        PolicyParams params;
        params.algorithm = trial % 2 ? Algorithm::Eucbv : Algorithm::UcbImproved;
        const std::uint64_t horizon = 1000 + rng.next_word() % 50'000;
        auto policy = make_policy(scenario.arms(), horizon, params);
        RewardStream stream(rng.next_word());
        auto active = active_arms(policy);
        REQUIRE(active.size() == scenario.arms());
        for (std::uint64_t t = 1; t <= horizon; ++t) {
            const auto arm = select_arm(policy, stream);
            if (t > scenario.arms()) REQUIRE(std::find(active.begin(), active.end(), arm) != active.end());
            observe(policy, arm, sample_reward(scenario, arm, stream));
            const auto next = active_arms(policy);
            REQUIRE(!next.empty());
            REQUIRE(std::includes(active.begin(), active.end(), next.begin(), next.end()));
            active = next;
        }
    }
}

TEST_CASE("VaR is monotone in alpha") {
    RewardStream rng(404);
    for (int trial = 0; trial < 500; ++trial) {
        std::vector<double> v(1 + rng.next_word() % 200);
        for (auto& x : v) x = 1000.0 * rng.next_uniform();
        std::vector<double> alphas(8);
        for (auto& a : alphas) a = 0.001 + 0.998 * rng.next_uniform();
        std::sort(alphas.begin(), alphas.end());
        for (std::size_t i = 1; i < alphas.size(); ++i) REQUIRE(var_at_risk(v, alphas[i - 1]) >= var_at_risk(v, alphas[i]));
        REQUIRE(var_at_risk(v, 1e-9) <= *std::max_element(v.begin(), v.end()));
        REQUIRE(var_at_risk(v, 1e-9) == doctest::Approx(*std::max_element(v.begin(), v.end())).epsilon(1e-6));
    }
}

TEST_CASE("one-pass and two-pass variance agree on 1e6 rewards") {
    for (double p : {0.5, 0.9, 0.995}) {
        RewardStream stream(505);
        ArmStats one_pass;
        std::vector<double> xs;
        xs.reserve(1'000'000);
        for (int i = 0; i < 1'000'000; ++i) {
            const int r = sample_bernoulli(p, stream);
            one_pass.push(r);
            xs.push_back(r);
        }
        const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
        double ss = 0.0;
        for (double x : xs) ss += (x - mean) * (x - mean);
        const double two_pass = ss / static_cast<double>(xs.size());
        CHECK(std::fabs(one_pass.variance() - two_pass) / two_pass <= 1e-10);
    }
}

TEST_CASE("quantile rule goldens") {
    std::vector<double> v(100);
    std::iota(v.begin(), v.end(), 1.0);
    CHECK(var_at_risk(v, 0.05) == doctest::Approx(95.05).epsilon(1e-12));
    CHECK(var_at_risk(v, 0.01) == doctest::Approx(99.01).epsilon(1e-12));
    CHECK(var_at_risk(v, 0.10) == doctest::Approx(90.10).epsilon(1e-12));
    CHECK(quantile(std::vector<double>{10, 20}, 0.25) == 12.5);
    CHECK(quantile(std::vector<double>{7}, 0.9) == 7.0);
    for (double a : {0.01, 0.05, 0.1}) CHECK(var_at_risk(std::vector<double>(40, 12.0), a) == 12.0);
}

TEST_CASE("permutation symmetry on equal-p scenarios") {
    // With identical arms every ordering sees the same reward stream, so the
    // runs must coincide exactly and nothing counts as suboptimal.
    RewardStream rng(606);
    for (std::size_t arms : {2u, 3u}) {
        const ScenarioSpec flat{"flat", std::vector<double>(arms, 0.9)};
        for (auto alg : all_algorithms()) {
            PolicyParams params;
            params.algorithm = alg;
            params.m = 20;
            auto cfg = make_run_config(flat, params, 5000, arms == 2 ? 2 : 6, 0);
            const auto seed = rng.next_word();
            const auto reference = simulate(cfg, cfg.permutations[0], seed);
            for (const auto& perm : cfg.permutations) REQUIRE(simulate(cfg, perm, seed) == reference);
            const auto batch = run_batch(cfg);
            const auto row = summarize(batch);
            CHECK(row.avg_regret == 0.0);
            CHECK(row.subopt_ratio == 0.0);
        }
    }
}

TEST_CASE("permutation equivariance") {
    // Playing scenario s under ordering pi is the same experiment as playing
    // the relabelled scenario under the identity.
    RewardStream rng(707);
    for (int trial = 0; trial < 100; ++trial) {
        const auto scenario = random_scenario(rng, 3);
        const auto params = random_params(rng);
        auto cfg = make_run_config(scenario, params, 3000, 6, 0);
        const auto& perm = cfg.permutations[rng.next_word() % cfg.permutations.size()];
        ScenarioSpec relabelled{"r", {}};
        for (auto a : perm) relabelled.arm_probs.push_back(scenario.arm_probs[a]);
        auto cfg2 = make_run_config(relabelled, params, 3000, 6, 0);
        const auto seed = rng.next_word();
        const auto a = simulate(cfg, perm, seed);
        const auto b = simulate(cfg2, cfg2.permutations[0], seed);
        REQUIRE(a.size() == b.size());
        for (std::size_t i = 0; i < a.size(); ++i) {
            REQUIRE(a[i].ones == b[i].ones);
            REQUIRE(a[i].subopt_pulls == b[i].subopt_pulls);
            REQUIRE(a[i].cum_regret == doctest::Approx(b[i].cum_regret).epsilon(1e-12));
        }
    }
}

TEST_CASE("schedule independence") {
    PolicyParams params;
    params.algorithm = Algorithm::EpsilonGreedy;
    auto cfg = make_run_config(make_scenario("B"), params, 20'000, 24, 9);
    const auto serial = run_batch(cfg, {1, {}});
    const auto parallel = run_batch(cfg, {8, {}});
    for (std::size_t i = 0; i < serial.runs.size(); ++i) REQUIRE(serial.runs[i].records == parallel.runs[i].records);
    for (std::size_t c = 0; c < serial.mean.size(); ++c) {
        REQUIRE(serial.mean[c].cum_regret == parallel.mean[c].cum_regret);
        REQUIRE(serial.mean[c].cum_reward == parallel.mean[c].cum_reward);
    }
}

TEST_CASE("exact and normal chi-square p-values agree for df = 1e6") {
    const double base = 93'975.0, df = 1e6;
    double worst = 0.0;
    for (int i = 0; i <= 1000; ++i) {
        const double ratio = 0.5 + i / 1000.0;
        worst = std::max(worst, std::fabs(chi_square_p(ratio * base, base, df) -
                                          chi_square_p_normal(ratio * base, base, df)));
    }
    CHECK(worst <= 0.005);
}

TEST_CASE("chi-square p is decreasing in the sample variance") {
    const double base = 93'975.0, df = 1e6;
    double prev = 2.0;
    for (int i = 0; i <= 400; ++i) {
        const double s2 = base * (0.99 + i * 0.0001);
        const double p = chi_square_p(s2, base, df);
        REQUIRE(p >= 0.0);
        REQUIRE(p <= 1.0);
        REQUIRE(p < prev);
        prev = p;
    }
}
