#include <doctest.h>

#include <atomic>
#include <numeric>
#include <stdexcept>

#include "bandit/engine.hpp"

using namespace bandit;

namespace {

PolicyParams params_for(Algorithm a) {
    PolicyParams p;
    p.algorithm = a;
    return p;
}

}  // namespace

TEST_CASE("default checkpoints") {
    CHECK(default_checkpoints(1'000'000) ==
          std::vector<std::uint64_t>{2, 3, 100, 200, 2000, 10'000, 20'000, 100'000, 200'000, 1'000'000});
    CHECK(default_checkpoints(1000) == std::vector<std::uint64_t>{2, 3, 100, 200, 1000});
    CHECK(default_checkpoints(2) == std::vector<std::uint64_t>{2});
    CHECK(default_checkpoints(2000) == std::vector<std::uint64_t>{2, 3, 100, 200, 2000});
}

TEST_CASE("permutations are lexicographic with the identity first") {
    CHECK(all_permutations(2) == std::vector<std::vector<std::size_t>>{{0, 1}, {1, 0}});
    const auto p3 = all_permutations(3);
    CHECK(p3.size() == 6);
    CHECK(p3.front() == std::vector<std::size_t>{0, 1, 2});
    CHECK(p3.back() == std::vector<std::size_t>{2, 1, 0});
}

TEST_CASE("derive_seed goldens") {
    // reference vectors from tests/oracles/oracles.py
    CHECK(derive_seed(0, "ucb", "", "A", 0, 0) == 0x949d66f76799a414ULL);
    CHECK(derive_seed(0, "ucb", "", "A", 0, 1) == 0xc9811cb3806847ccULL);
    CHECK(derive_seed(0, "ucb", "", "A", 1, 0) == 0xcab0d1331905c765ULL);
    CHECK(derive_seed(20250101, "etc", "m=1000", "C", 1, 49) == 0xa7c66e80f9b9b021ULL);
    CHECK(derive_seed(1, "ucb", "", "A", 0, 0) != derive_seed(0, "ucb", "", "A", 0, 0));
    CHECK(derive_seed(0, "ucb", "", "B", 0, 0) != derive_seed(0, "ucb", "", "A", 0, 0));
    // length prefixes keep field boundaries apart
    CHECK(derive_seed(0, "ab", "", "c", 0, 0) != derive_seed(0, "a", "", "bc", 0, 0));
}

TEST_CASE("a horizon-3 run records t = 2 and 3") {
    for (auto alg : all_algorithms()) {
        CAPTURE(algorithm_id(alg));
        auto cfg = make_run_config(make_scenario("A"), params_for(alg), 3, 2, 0);
        const auto recs = run_single(cfg, 0, 0);
        REQUIRE(recs.size() == 2);
        for (std::size_t i = 0; i < 2; ++i) {
            CHECK(recs[i].t == i + 2);
            CHECK(recs[i].zeros + recs[i].ones == recs[i].t);
            CHECK(recs[i].cum_reward == recs[i].ones);
        }
    }
}

TEST_CASE("identical inputs replay bit-identically") {
    auto cfg = make_run_config(make_scenario("C"), params_for(Algorithm::EpsilonGreedy), 20'000, 4, 9);
    CHECK(run_single(cfg, 1, 3) == run_single(cfg, 1, 3));
    CHECK(run_single(cfg, 0, 0) != run_single(cfg, 0, 1));
}

TEST_CASE("split mode divides runs across orderings") {
    auto cfg = make_run_config(make_scenario("A"), params_for(Algorithm::Ucb), 2000, 100, 1);
    CHECK(runs_per_permutation(cfg) == 50);
    CHECK(total_runs(cfg) == 100);
    const auto batch = run_batch(cfg);
    REQUIRE(batch.runs.size() == 100);
    for (std::size_t i = 0; i < 100; ++i) {
        CHECK(batch.runs[i].permutation == i / 50);
        CHECK(batch.runs[i].run_id == i);
        CHECK(batch.runs[i].seed == run_seed(cfg, i / 50, i));
    }
    // aggregate is the plain mean over runs
    for (std::size_t c = 0; c < batch.mean.size(); ++c) {
        double sum = 0.0;
        for (const auto& r : batch.runs) sum += r.records[c].cum_regret;
        CHECK(batch.mean[c].cum_regret == doctest::Approx(sum / 100.0).epsilon(1e-12));
    }
}

TEST_CASE("duplicate mode runs the full count per ordering") {
    auto cfg = make_run_config(make_scenario("A"), params_for(Algorithm::Ucb), 500, 3, 1);
    cfg.mode = PermutationMode::Duplicate;
    CHECK_NOTHROW(validate(cfg));
    CHECK(total_runs(cfg) == 6);
    const auto batch = run_batch(cfg);
    CHECK(batch.runs.size() == 6);
    CHECK(batch.runs[3].permutation == 1);
}

TEST_CASE("thread count never changes results") {
    auto cfg = make_run_config(make_scenario("B"), params_for(Algorithm::Eucbv), 5000, 16, 3);
    const auto one = run_batch(cfg, {1, {}});
    const auto four = run_batch(cfg, {4, {}});
    REQUIRE(one.runs.size() == four.runs.size());
    for (std::size_t i = 0; i < one.runs.size(); ++i) CHECK(one.runs[i].records == four.runs[i].records);
    for (std::size_t c = 0; c < one.mean.size(); ++c) CHECK(one.mean[c].cum_regret == four.mean[c].cum_regret);
}

TEST_CASE("progress is reported once per run") {
    auto cfg = make_run_config(make_scenario("A"), params_for(Algorithm::Ucb), 100, 10, 0);
    std::atomic<std::uint64_t> calls{0};
    run_batch(cfg, {2, [&](std::uint64_t, std::uint64_t total) {
                        CHECK(total == 10);
                        ++calls;
                    }});
    CHECK(calls == 10);
}

TEST_CASE("config validation") {
    auto base = make_run_config(make_scenario("A"), params_for(Algorithm::Ucb), 1000, 10, 0);
    auto cfg = base;
    cfg.runs = 7;
    CHECK_THROWS_AS(validate(cfg), std::invalid_argument);
    cfg = base;
    cfg.checkpoints = {2, 2, 1000};
    CHECK_THROWS_AS(validate(cfg), std::invalid_argument);
    cfg = base;
    cfg.checkpoints = {2, 500};
    CHECK_THROWS_AS(validate(cfg), std::invalid_argument);
    cfg = base;
    cfg.permutations = {{0, 0}};
    CHECK_THROWS_AS(validate(cfg), std::invalid_argument);
    cfg = base;
    cfg.scenario.arm_probs[0] = 1.2;
    CHECK_THROWS_WITH_AS(validate(cfg), doctest::Contains("arm_probs[0]"), std::invalid_argument);
    CHECK_THROWS_AS(run_batch(cfg), std::invalid_argument);
}

TEST_CASE("ETC regret in canonical space does not depend on the ordering") {
    PolicyParams p = params_for(Algorithm::Etc);
    p.m = 50;
    auto cfg = make_run_config(make_scenario("A"), p, 1000, 2, 0);
    // exploration alone costs m * gap whichever position the worse arm has
    for (std::size_t perm = 0; perm < 2; ++perm) {
        const auto recs = simulate(cfg, cfg.permutations[perm], 77);
        CHECK(recs[3].t == 200);
        CHECK(recs[2].subopt_pulls == 50);
        CHECK(recs[2].cum_regret == doctest::Approx(5.0));
    }
}
