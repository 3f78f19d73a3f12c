#include "bandit/analytics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <boost/math/special_functions/gamma.hpp>

namespace bandit {

double suboptimal_ratio(double subopt_pulls, std::uint64_t t) {
    if (t == 0) throw std::invalid_argument("suboptimal_ratio: t must be >= 1");
    return subopt_pulls / static_cast<double>(t);
}

double quantile(std::span<const double> values, double q) {
    if (values.empty()) throw std::invalid_argument("quantile of an empty sample");
    std::vector<double> v(values.begin(), values.end());
    std::sort(v.begin(), v.end());
    const double h = static_cast<double>(v.size() - 1) * q;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    if (lo + 1 >= v.size()) return v.back();
    return v[lo] + (h - static_cast<double>(lo)) * (v[lo + 1] - v[lo]);
}

double var_at_risk(std::span<const double> values, double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("alpha must lie in (0,1)");
    return quantile(values, 1.0 - alpha);
}

double baseline_variance(std::uint64_t horizon, double p_star) {
    return static_cast<double>(horizon) * p_star * (1.0 - p_star);
}

double chi_square_statistic(double sample_variance, double baseline, double df) {
    if (!(baseline > 0.0)) throw std::invalid_argument("chi-square baseline variance must be positive");
    return df * sample_variance / baseline;
}

double chi_square_p(double sample_variance, double baseline, double df) {
    if (!(df >= 1.0)) throw std::invalid_argument("chi-square degrees of freedom must be >= 1");
    const double x = chi_square_statistic(sample_variance, baseline, df);
    if (x <= 0.0) return 1.0;
    return std::clamp(boost::math::gamma_q(df / 2.0, x / 2.0), 0.0, 1.0);
}

double chi_square_p_normal(double sample_variance, double baseline, double df) {
    if (!(baseline > 0.0)) throw std::invalid_argument("chi-square baseline variance must be positive");
    const double z = std::sqrt(df / 2.0) * (1.0 - sample_variance / baseline);
    return 0.5 * std::erfc(-z / std::sqrt(2.0));
}

double mean_of(std::span<const double> values) {
    if (values.empty()) throw std::invalid_argument("mean of an empty sample");
    double s = 0.0;
    for (double v : values) s += v;
    return s / static_cast<double>(values.size());
}

double sample_variance(std::span<const double> values) {
    if (values.size() < 2) return 0.0;
    const double m = mean_of(values);
    double ss = 0.0;
    for (double v : values) ss += (v - m) * (v - m);
    return ss / static_cast<double>(values.size() - 1);
}

double standard_error(std::span<const double> values) {
    if (values.empty()) return 0.0;
    return std::sqrt(sample_variance(values) / static_cast<double>(values.size()));
}

std::vector<double> final_regrets(const RunBatchResult& batch) {
    std::vector<double> out;
    out.reserve(batch.runs.size());
    for (const auto& r : batch.runs) out.push_back(r.records.back().cum_regret);
    return out;
}

std::vector<double> final_rewards(const RunBatchResult& batch) {
    std::vector<double> out;
    out.reserve(batch.runs.size());
    for (const auto& r : batch.runs) out.push_back(static_cast<double>(r.records.back().cum_reward));
    return out;
}

SummaryRow summarize(const RunBatchResult& batch) {
    if (batch.runs.empty() || batch.runs.front().records.empty())
        throw std::invalid_argument("summarize: empty batch");
    const auto& cfg = batch.config;
    SummaryRow row;
    row.algorithm = cfg.params.display_name();
    row.algorithm_id = std::string(algorithm_id(cfg.params.algorithm));
    row.params = cfg.params.canonical();
    row.scenario = cfg.scenario.label;
    row.horizon = cfg.horizon;
    row.runs = batch.runs.size();

    const auto regrets = final_regrets(batch);
    const auto rewards = final_rewards(batch);
    row.avg_regret = mean_of(regrets);
    row.regret_se = standard_error(regrets);
    row.reward_variance = sample_variance(rewards);

    double subopt = 0.0;
    for (const auto& r : batch.runs) subopt += static_cast<double>(r.records.back().subopt_pulls);
    row.subopt_ratio = suboptimal_ratio(subopt / static_cast<double>(batch.runs.size()), cfg.horizon);

    const double base = baseline_variance(cfg.horizon, cfg.scenario.optimal_value());
    row.p_value = base > 0.0 ? chi_square_p(row.reward_variance, base, static_cast<double>(cfg.horizon))
                             : (row.reward_variance > 0.0 ? 0.0 : 1.0);
    return row;
}

RiskReport risk_report(const RunBatchResult& batch, const std::vector<double>& alpha_levels, VarMode mode) {
    if (batch.runs.empty()) throw std::invalid_argument("risk_report: empty batch");
    RiskReport rep;
    rep.final_regrets = final_regrets(batch);
    rep.final_rewards = final_rewards(batch);
    rep.sample_variance = sample_variance(rep.final_rewards);
    rep.alpha_levels = alpha_levels;
    rep.mode = mode;
    for (double a : alpha_levels) {
        rep.var_alpha[a] = mode == VarMode::Regret ? var_at_risk(rep.final_regrets, a)
                                                   : quantile(rep.final_rewards, a);
    }
    const auto& cfg = batch.config;
    const double base = baseline_variance(cfg.horizon, cfg.scenario.optimal_value());
    if (base > 0.0) {
        const double df = static_cast<double>(cfg.horizon);
        rep.chi2_stat = chi_square_statistic(rep.sample_variance, base, df);
        rep.chi2_p = chi_square_p(rep.sample_variance, base, df);
    } else {
        rep.chi2_stat = 0.0;
        rep.chi2_p = rep.sample_variance > 0.0 ? 0.0 : 1.0;
    }
    return rep;
}

std::vector<OutcomeCounts> reward_outcome_distribution(const RunBatchResult& batch) {
    const auto mean = batch.mean.empty() ? aggregate(batch.runs) : batch.mean;
    std::vector<OutcomeCounts> out;
    out.reserve(mean.size());
    for (const auto& m : mean) out.push_back({m.t, m.zeros, m.ones});
    return out;
}

Histogram histogram(std::span<const double> values, std::size_t bins) {
    if (values.empty()) throw std::invalid_argument("histogram of an empty sample");
    if (bins == 0) throw std::invalid_argument("histogram needs at least one bin");
    const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
    const double lo = *lo_it, hi = *hi_it;
    Histogram h;
    if (hi == lo) {
        h.edges = {lo, hi};
        h.counts = {values.size()};
        return h;
    }
    const double width = (hi - lo) / static_cast<double>(bins);
    h.edges.resize(bins + 1);
    for (std::size_t i = 0; i <= bins; ++i) h.edges[i] = lo + width * static_cast<double>(i);
    h.edges.back() = hi;
    h.counts.assign(bins, 0);
    for (double v : values) {
        auto idx = static_cast<std::size_t>((v - lo) / width);
        ++h.counts[std::min(idx, bins - 1)];
    }
    return h;
}

}  // namespace bandit
