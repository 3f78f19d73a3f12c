#include <doctest.h>

#include <cmath>
#include <numeric>
#include <stdexcept>

#include "bandit/analytics.hpp"

using namespace bandit;

TEST_CASE("suboptimal ratio") {
    CHECK(suboptimal_ratio(2381.7, 1'000'000) == doctest::Approx(0.0023817));
    CHECK(suboptimal_ratio(0, 50) == 0.0);
    CHECK(suboptimal_ratio(50, 50) == 1.0);
    CHECK_THROWS_AS(suboptimal_ratio(0, 0), std::invalid_argument);
}

TEST_CASE("VaR uses linear interpolation between order statistics") {
    std::vector<double> v(100);
    std::iota(v.begin(), v.end(), 1.0);
    CHECK(var_at_risk(v, 0.05) == doctest::Approx(95.05).epsilon(1e-12));
    CHECK(var_at_risk(v, 0.01) == doctest::Approx(99.01).epsilon(1e-12));
    CHECK(var_at_risk(v, 0.1) == doctest::Approx(90.1).epsilon(1e-12));
    CHECK(var_at_risk(v, 1e-12) == doctest::Approx(100.0));

    const std::vector<double> flat(17, 3.25);
    for (double a : {0.01, 0.05, 0.1, 0.5}) CHECK(var_at_risk(flat, a) == 3.25);

    const std::vector<double> unsorted{5, 1, 4, 2, 3};
    CHECK(quantile(unsorted, 0.5) == 3.0);
    CHECK(quantile(unsorted, 0.0) == 1.0);
    CHECK(quantile(unsorted, 1.0) == 5.0);
    CHECK(quantile(unsorted, 0.3) == doctest::Approx(2.2));

    CHECK_THROWS_AS(var_at_risk(std::vector<double>{}, 0.05), std::invalid_argument);
    CHECK_THROWS_AS(var_at_risk(v, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(var_at_risk(v, 1.0), std::invalid_argument);
}

TEST_CASE("baseline variance") {
    CHECK(baseline_variance(1'000'000, 0.895) == doctest::Approx(93'975.0).epsilon(1e-12));
    CHECK(baseline_variance(1'000'000, 0.9) == doctest::Approx(90'000.0).epsilon(1e-12));
    CHECK(baseline_variance(1234, 1.0) == 0.0);
}

TEST_CASE("chi-square p-values") {
    const double base = 93'975.0, df = 1e6;
    // printed table values
    CHECK(std::fabs(chi_square_p(93'873.80, base, df) - 0.78) <= 0.01);
    CHECK(std::fabs(chi_square_p(93'935.53, base, df) - 0.62) <= 0.01);
    CHECK(std::fabs(chi_square_p(base, base, df) - 0.50) <= 0.001);
    CHECK(chi_square_p(82'824.39, base, df) == doctest::Approx(1.0));
    // scipy.stats.chi2.sf goldens from tests/oracles/oracles.py
    CHECK(chi_square_p(93'873.80, base, df) == doctest::Approx(0.7767529).epsilon(1e-5));
    CHECK(chi_square_p(93'935.53, base, df) == doctest::Approx(0.6165983).epsilon(1e-5));
    CHECK(chi_square_p(96'233.97, base, df) == doctest::Approx(4.17e-64).epsilon(0.01));
    CHECK(chi_square_p(base, base, df) == doctest::Approx(0.49981).epsilon(1e-4));

    CHECK(chi_square_statistic(93'975.0, base, df) == doctest::Approx(1e6));
    CHECK_THROWS_AS(chi_square_p(1.0, 0.0, df), std::invalid_argument);
    CHECK(chi_square_p(0.0, base, df) == 1.0);
}

TEST_CASE("sample moments") {
    const std::vector<double> v{2, 4, 4, 4, 5, 5, 7, 9};
    CHECK(mean_of(v) == 5.0);
    CHECK(sample_variance(v) == doctest::Approx(32.0 / 7.0));
    CHECK(standard_error(v) == doctest::Approx(std::sqrt(32.0 / 7.0 / 8.0)));
    CHECK(sample_variance(std::vector<double>{3.0}) == 0.0);
}

TEST_CASE("histogram") {
    const std::vector<double> v{0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
    const auto h = histogram(v, 4);
    CHECK(h.edges.size() == 5);
    CHECK(h.edges.front() == 0.0);
    CHECK(h.edges.back() == 10.0);
    CHECK(std::accumulate(h.counts.begin(), h.counts.end(), std::uint64_t{0}) == v.size());
    CHECK(h.counts.back() >= 1);  // closed last bin holds the maximum

    const auto flat = histogram(std::vector<double>(9, 4.0), 5);
    CHECK(flat.counts == std::vector<std::uint64_t>{9});
}

TEST_CASE("summary of a degenerate scenario") {
    PolicyParams p;
    p.algorithm = Algorithm::Ucb;
    auto cfg = make_run_config(ScenarioSpec{"flat", {0.9, 0.9}}, p, 2000, 10, 5);
    const auto batch = run_batch(cfg);
    const auto row = summarize(batch);
    CHECK(row.avg_regret == 0.0);
    CHECK(row.subopt_ratio == 0.0);
    CHECK(row.runs == 10);
    CHECK(row.horizon == 2000);
    CHECK(row.p_value >= 0.0);
    CHECK(row.p_value <= 1.0);
    CHECK(row.algorithm == "UCB");
}

TEST_CASE("summary row fields follow their definitions") {
    PolicyParams p;
    p.algorithm = Algorithm::EpsilonGreedy;
    p.epsilon = 0.5;
    auto cfg = make_run_config(make_scenario("A"), p, 5000, 20, 11);
    const auto batch = run_batch(cfg);
    const auto row = summarize(batch);
    const auto regrets = final_regrets(batch);
    const auto rewards = final_rewards(batch);
    CHECK(row.avg_regret == doctest::Approx(mean_of(regrets)));
    CHECK(row.regret_se == doctest::Approx(standard_error(regrets)));
    CHECK(row.reward_variance == doctest::Approx(sample_variance(rewards)));
    CHECK(row.p_value == doctest::Approx(chi_square_p(row.reward_variance, baseline_variance(5000, 0.9), 5000)));
    // regret/pull identity for two arms
    CHECK(row.avg_regret / (5000 * 0.1) == doctest::Approx(row.subopt_ratio).epsilon(1e-9));

    const auto report = risk_report(batch, default_alpha_levels());
    CHECK(report.var_alpha.at(0.01) >= report.var_alpha.at(0.05));
    CHECK(report.var_alpha.at(0.05) >= report.var_alpha.at(0.1));
    CHECK(report.chi2_p == doctest::Approx(row.p_value));

    const auto reward_mode = risk_report(batch, default_alpha_levels(), VarMode::Reward);
    CHECK(reward_mode.var_alpha.at(0.01) <= reward_mode.var_alpha.at(0.1));

    for (const auto& o : reward_outcome_distribution(batch))
        CHECK(o.zeros + o.ones == doctest::Approx(static_cast<double>(o.t)));
}

TEST_CASE("outcome counts when every arm always pays") {
    PolicyParams p;
    p.algorithm = Algorithm::UcbTuned;
    auto cfg = make_run_config(ScenarioSpec{"sure", {1.0, 1.0}}, p, 1000, 4, 0);
    for (const auto& o : reward_outcome_distribution(run_batch(cfg))) {
        CHECK(o.zeros == 0.0);
        CHECK(o.ones == static_cast<double>(o.t));
    }
}

TEST_CASE("oracle play at p = 0.9 yields about 9e5 ones") {
    PolicyParams p;
    p.algorithm = Algorithm::EpsilonGreedy;
    p.epsilon = 0.0;
    // equal arms make greedy play always optimal
    auto cfg = make_run_config(ScenarioSpec{"opt", {0.9, 0.9}}, p, 1'000'000, 2, 42);
    const auto outcomes = reward_outcome_distribution(run_batch(cfg));
    CHECK(std::fabs(outcomes.back().ones - 9e5) <= 1500.0);
}
