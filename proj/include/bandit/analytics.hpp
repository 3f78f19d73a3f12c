// Cross-run summary statistics: average regret, suboptimal ratio, reward
// variance with its chi-square test, Value-at-Risk and reward outcomes.
#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "bandit/engine.hpp"

namespace bandit {

inline const std::vector<double>& default_alpha_levels() {
    static const std::vector<double> levels{0.01, 0.05, 0.1};
    return levels;
}

/// Which tail VaR is read from.
enum class VarMode {
    Regret,  // (1-alpha)-quantile of final regret (loss convention)
    Reward,  // alpha-quantile of final cumulative reward
};

double suboptimal_ratio(double subopt_pulls, std::uint64_t t);

/// Linear interpolation between order statistics: h = (n-1) q,
/// value = v[floor h] + (h - floor h)(v[floor h + 1] - v[floor h]).
double quantile(std::span<const double> values, double q);

/// Empirical (1-alpha)-quantile of the regret sample.
double var_at_risk(std::span<const double> values, double alpha);

/// horizon * p* (1 - p*)
double baseline_variance(std::uint64_t horizon, double p_star);

/// Right-tail chi-square variance test: X = df * s^2 / sigma0^2,
/// p = P(chi2_df >= X) = Q(df/2, X/2).
double chi_square_statistic(double sample_variance, double baseline, double df);
double chi_square_p(double sample_variance, double baseline, double df);
/// Normal approximation Phi(sqrt(df/2) (1 - s^2/sigma0^2)).
double chi_square_p_normal(double sample_variance, double baseline, double df);

double mean_of(std::span<const double> values);
/// Unbiased (n-1) sample variance; 0 for fewer than two values.
double sample_variance(std::span<const double> values);
/// Standard error of the mean.
double standard_error(std::span<const double> values);

struct SummaryRow {
    std::string algorithm;  // display name
    std::string algorithm_id;
    std::string params;
    std::string scenario;
    std::uint64_t horizon = 0;
    std::uint64_t runs = 0;
    double avg_regret = 0.0;
    double regret_se = 0.0;
    double reward_variance = 0.0;
    double subopt_ratio = 0.0;
    double p_value = 0.0;
};

SummaryRow summarize(const RunBatchResult& batch);

struct RiskReport {
    std::vector<double> final_regrets;
    std::vector<double> final_rewards;
    double sample_variance = 0.0;
    std::vector<double> alpha_levels;
    std::map<double, double> var_alpha;
    VarMode mode = VarMode::Regret;
    double chi2_stat = 0.0;
    double chi2_p = 0.0;
};

RiskReport risk_report(const RunBatchResult& batch, const std::vector<double>& alpha_levels,
                       VarMode mode = VarMode::Regret);

struct OutcomeCounts {
    std::uint64_t t = 0;
    double zeros = 0.0;
    double ones = 0.0;
};

/// Cross-run mean counts of 0- and 1-rewards per checkpoint.
std::vector<OutcomeCounts> reward_outcome_distribution(const RunBatchResult& batch);

struct Histogram {
    std::vector<double> edges;  // bins + 1 edges
    std::vector<std::uint64_t> counts;
};

/// Equal-width bins over [min, max]; the last bin is closed. A constant
/// sample yields a single bin holding every value.
Histogram histogram(std::span<const double> values, std::size_t bins);

std::vector<double> final_regrets(const RunBatchResult& batch);
std::vector<double> final_rewards(const RunBatchResult& batch);

}  // namespace bandit
