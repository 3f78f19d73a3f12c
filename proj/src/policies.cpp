#include "bandit/policies.hpp"

#include <algorithm>
#include <array>
#include <limits>

#include "bandit/format.hpp"

namespace bandit {

namespace {

constexpr std::array<std::pair<Algorithm, std::string_view>, 8> kAlgorithmIds{{
    {Algorithm::Etc, "etc"},
    {Algorithm::EpsilonGreedy, "eps_greedy"},
    {Algorithm::Ucb, "ucb"},
    {Algorithm::UcbTuned, "ucb_tuned"},
    {Algorithm::UcbV, "ucb_v"},
    {Algorithm::Eucbv, "eucbv"},
    {Algorithm::PacUcb, "pac_ucb"},
    {Algorithm::UcbImproved, "ucb_improved"},
}};

template <class IndexFn>
std::size_t argmax_over(std::size_t arms, IndexFn&& index) {
    std::size_t best = 0;
    double best_value = index(0);
    for (std::size_t a = 1; a < arms; ++a) {
        const double v = index(a);
        if (v > best_value) {
            best_value = v;
            best = a;
        }
    }
    return best;
}

void require(bool ok, const char* field, const std::string& rule, const PolicyParams& p) {
    if (!ok) {
        throw PolicyError(std::string(algorithm_id(p.algorithm)) + ": parameter '" + field + "' must satisfy " + rule);
    }
}

}  // namespace

std::string_view algorithm_id(Algorithm a) noexcept {
    for (const auto& [alg, id] : kAlgorithmIds)
        if (alg == a) return id;
    return "unknown";
}

Algorithm parse_algorithm(std::string_view id) {
    for (const auto& [alg, name] : kAlgorithmIds)
        if (name == id) return alg;
    std::string valid;
    for (const auto& [alg, name] : kAlgorithmIds) {
        if (!valid.empty()) valid += ", ";
        valid += name;
    }
    throw PolicyError("unknown algorithm '" + std::string(id) + "' (valid: " + valid + ")");
}

const std::vector<Algorithm>& all_algorithms() {
    static const std::vector<Algorithm> all = [] {
        std::vector<Algorithm> v;
        for (const auto& entry : kAlgorithmIds) v.push_back(entry.first);
        return v;
    }();
    return all;
}

std::string PolicyParams::canonical() const {
    switch (algorithm) {
        case Algorithm::Etc: return "m=" + std::to_string(m);
        case Algorithm::EpsilonGreedy: return "epsilon=" + shortest(epsilon);
        case Algorithm::Ucb:
        case Algorithm::UcbTuned: return "";
        case Algorithm::UcbV:
            return "theta=" + shortest(theta) + ";c=" + shortest(c) + ";b=" + shortest(b);
        case Algorithm::Eucbv: {
            std::string s = "rho=" + shortest(rho);
            if (psi) s += ";psi=" + shortest(*psi);
            return s;
        }
        case Algorithm::PacUcb: {
            std::string s = "c=" + shortest(c) + ";b=" + shortest(b) + ";q=" + shortest(q) +
                            ";beta=" + shortest(beta);
            if (variance_free) s += ";variance_free=1";
            return s;
        }
        case Algorithm::UcbImproved: return "delta=" + shortest(delta_tilde0);
    }
    return "";
}

std::string PolicyParams::display_name() const {
    switch (algorithm) {
        case Algorithm::Etc: return "ETC (m=" + std::to_string(m) + ")";
        case Algorithm::EpsilonGreedy: return "Greedy (eps=" + shortest(epsilon) + ")";
        case Algorithm::Ucb: return "UCB";
        case Algorithm::UcbTuned: return "UCB-Tuned";
        case Algorithm::UcbV: return "UCB-V";
        case Algorithm::Eucbv: return "EUCBV";
        case Algorithm::PacUcb: return variance_free ? "PAC-UCB (variance-free)" : "PAC-UCB";
        case Algorithm::UcbImproved: return "UCB-Improved";
    }
    return "?";
}

void validate(const PolicyParams& p) {
    switch (p.algorithm) {
        case Algorithm::Etc: require(p.m >= 1, "m", ">= 1", p); break;
        case Algorithm::EpsilonGreedy:
            require(p.epsilon >= 0.0 && p.epsilon <= 1.0, "epsilon", "0 <= epsilon <= 1", p);
            break;
        case Algorithm::Ucb:
        case Algorithm::UcbTuned: break;
        case Algorithm::UcbV:
            require(p.theta > 0.0, "theta", "> 0", p);
            require(p.c > 0.0, "c", "> 0", p);
            require(p.b > 0.0, "b", "> 0", p);
            break;
        case Algorithm::Eucbv:
            require(p.rho > 0.0, "rho", "> 0", p);
            require(!p.psi || *p.psi > 0.0, "psi", "> 0", p);
            break;
        case Algorithm::PacUcb:
            require(p.c > 0.0, "c", "> 0", p);
            require(p.b > 0.0, "b", "> 0", p);
            require(p.q > 1.0, "q", "> 1", p);
            require(p.beta > 0.0 && p.beta < 1.0, "beta", "0 < beta < 1", p);
            break;
        case Algorithm::UcbImproved:
            require(p.delta_tilde0 > 0.0 && p.delta_tilde0 <= 1.0, "delta", "0 < delta <= 1", p);
            break;
    }
}

double ucb_index(const ArmStats& s, double t) {
    return s.mean + std::sqrt(2.0 * std::log(t) / static_cast<double>(s.count));
}

double ucbv_bound(const ArmStats& s, double t, const PolicyParams& p) {
    const double n = static_cast<double>(s.count);
    const double explore = p.theta * std::log(t);
    return s.mean + std::sqrt(2.0 * s.variance() * explore / n) + p.c * 3.0 * p.b * explore / n;
}

double ucb_tuned_index(const ArmStats& s, double t) {
    const double n = static_cast<double>(s.count);
    const double log_t = std::log(t);
    const double v = s.variance() + std::sqrt(2.0 * log_t / n);
    return s.mean + std::sqrt(log_t / n * std::min(0.25, v));
}

double pac_exploration(std::uint64_t s, std::size_t arms, double q, double beta) {
    const double e = std::log(static_cast<double>(arms) / beta) + q * std::log(static_cast<double>(s));
    return std::max(e, 2.0);
}

double pac_ucb_bound(const ArmStats& s, std::size_t arms, const PolicyParams& p) {
    const double n = static_cast<double>(s.count);
    const double explore = pac_exploration(s.count, arms, p.q, p.beta);
    const double var = p.variance_free ? p.b * p.b : s.variance();
    return s.mean + std::sqrt(2.0 * var * explore / n) + p.c * 3.0 * p.b * explore / n;
}

double eucbv_width(const ArmStats& s, double rho, double log_term) {
    return std::sqrt(rho * (s.variance() + 2.0) * log_term / (4.0 * static_cast<double>(s.count)));
}

std::uint64_t phase_cap(std::uint64_t horizon) {
    const double v = 0.5 * std::log2(static_cast<double>(horizon) / std::exp(1.0));
    return v <= 0.0 ? 0 : static_cast<std::uint64_t>(std::floor(v));
}

// PolicyCore

PolicyCore::PolicyCore(std::size_t arms, std::uint64_t horizon) : stats_(arms), horizon_(horizon) {}

void PolicyCore::record(std::size_t arm, int reward) {
    stats_[arm].push(reward);
    ++t_;
}

std::size_t PolicyCore::greedy_arm() const noexcept {
    return argmax_over(stats_.size(), [&](std::size_t a) { return stats_[a].mean; });
}

// ETC

EtcPolicy::EtcPolicy(std::size_t arms, std::uint64_t horizon, const PolicyParams& p)
    : PolicyCore(arms, horizon), explore_steps_(p.m * arms) {}

std::size_t EtcPolicy::select(RewardStream&) {
    if (t_ < explore_steps_) return static_cast<std::size_t>(t_ % stats_.size());
    if (!commit_) commit_ = greedy_arm();
    return *commit_;
}

// eps-Greedy

EpsilonGreedyPolicy::EpsilonGreedyPolicy(std::size_t arms, std::uint64_t horizon, const PolicyParams& p)
    : PolicyCore(arms, horizon), epsilon_(p.epsilon) {}

std::size_t EpsilonGreedyPolicy::select(RewardStream& stream) {
    if (auto forced = forced_arm()) return *forced;
    if (stream.next_uniform() < epsilon_) {
        const auto k = static_cast<std::size_t>(stream.next_uniform() * static_cast<double>(stats_.size()));
        return std::min(k, stats_.size() - 1);
    }
    return greedy_arm();
}

// UCB family

std::size_t UcbPolicy::select(RewardStream&) {
    if (auto forced = forced_arm()) return *forced;
    const double two_log_t = 2.0 * std::log(static_cast<double>(t_ + 1));
    return argmax_over(stats_.size(), [&](std::size_t a) {
        const auto& s = stats_[a];
        return s.mean + std::sqrt(two_log_t / static_cast<double>(s.count));
    });
}

std::size_t UcbTunedPolicy::select(RewardStream&) {
    if (auto forced = forced_arm()) return *forced;
    const double log_t = std::log(static_cast<double>(t_ + 1));
    return argmax_over(stats_.size(), [&](std::size_t a) {
        const auto& s = stats_[a];
        const double ratio = log_t / static_cast<double>(s.count);
        const double v = s.variance() + std::sqrt(2.0 * ratio);
        return s.mean + std::sqrt(ratio * std::min(0.25, v));
    });
}

std::size_t UcbVPolicy::select(RewardStream&) {
    if (auto forced = forced_arm()) return *forced;
    const double explore = params_.theta * std::log(static_cast<double>(t_ + 1));
    const double bonus = params_.c * 3.0 * params_.b * explore;
    return argmax_over(stats_.size(), [&](std::size_t a) {
        const auto& s = stats_[a];
        const double n = static_cast<double>(s.count);
        return s.mean + std::sqrt(2.0 * s.variance() * explore / n) + bonus / n;
    });
}

PacUcbPolicy::PacUcbPolicy(std::size_t arms, std::uint64_t horizon, const PolicyParams& p)
    : PolicyCore(arms, horizon), params_(p), index_(arms, 0.0) {}

std::size_t PacUcbPolicy::select(RewardStream&) {
    if (auto forced = forced_arm()) return *forced;
    return argmax_over(stats_.size(), [&](std::size_t a) { return index_[a]; });
}

void PacUcbPolicy::observe(std::size_t arm, int reward) {
    record(arm, reward);
    index_[arm] = pac_ucb_bound(stats_[arm], stats_.size(), params_);
}

// Elimination policies

EliminationCore::EliminationCore(std::size_t arms, std::uint64_t horizon)
    : PolicyCore(arms, horizon), max_phase_(phase_cap(horizon)) {
    active_.reserve(arms);
    for (std::size_t a = 0; a < arms; ++a) active_.push_back(a);
}

EucbvPolicy::EucbvPolicy(std::size_t arms, std::uint64_t horizon, const PolicyParams& p)
    : EliminationCore(arms, horizon),
      rho_(p.rho),
      psi_(p.psi.value_or(static_cast<double>(horizon) / static_cast<double>(arms * arms))),
      budget_(arms * phase_length(1.0)) {}

double EucbvPolicy::log_term() const noexcept {
    return std::max(std::log(psi_ * static_cast<double>(horizon_) * eps_), 0.0);
}

std::uint64_t EucbvPolicy::phase_length(double eps) const noexcept {
    const double v = std::log(psi_ * static_cast<double>(horizon_) * eps * eps) / (2.0 * eps);
    return v <= 1.0 ? 1 : static_cast<std::uint64_t>(std::ceil(v));
}

std::size_t EucbvPolicy::select(RewardStream&) {
    if (auto forced = forced_arm()) return *forced;
    if (active_.size() == 1) return active_.front();
    const double lt = log_term();
    std::size_t best = active_.front();
    double best_value = -std::numeric_limits<double>::infinity();
    for (std::size_t a : active_) {
        const double v = stats_[a].mean + eucbv_width(stats_[a], rho_, lt);
        if (v > best_value) {
            best_value = v;
            best = a;
        }
    }
    return best;
}

void EucbvPolicy::observe(std::size_t arm, int reward) {
    record(arm, reward);
    if (t_ < stats_.size()) return;

    if (active_.size() > 1) {
        const double lt = log_term();
        double best_lower = -std::numeric_limits<double>::infinity();
        for (std::size_t a : active_)
            best_lower = std::max(best_lower, stats_[a].mean - eucbv_width(stats_[a], rho_, lt));
        std::erase_if(active_, [&](std::size_t a) {
            return stats_[a].mean + eucbv_width(stats_[a], rho_, lt) < best_lower;
        });
    }

    if (t_ >= budget_ && phase_ < max_phase_) {
        eps_ /= 2.0;
        budget_ = t_ + active_.size() * phase_length(eps_);
        ++phase_;
    }
}

UcbImprovedPolicy::UcbImprovedPolicy(std::size_t arms, std::uint64_t horizon, const PolicyParams& p)
    : EliminationCore(arms, horizon), delta_(p.delta_tilde0), target_(target_for(p.delta_tilde0)) {}

std::uint64_t UcbImprovedPolicy::target_for(double delta) const noexcept {
    const double d2 = delta * delta;
    const double v = 2.0 * std::log(static_cast<double>(horizon_) * d2) / d2;
    return v <= 1.0 ? 1 : static_cast<std::uint64_t>(std::ceil(v));
}

std::size_t UcbImprovedPolicy::select(RewardStream&) {
    if (auto forced = forced_arm()) return *forced;
    if (exploit_) {
        std::size_t best = active_.front();
        for (std::size_t a : active_)
            if (stats_[a].mean > stats_[best].mean) best = a;
        return best;
    }
    std::size_t next = active_.front();
    for (std::size_t a : active_)
        if (stats_[a].count < stats_[next].count) next = a;
    return next;
}

void UcbImprovedPolicy::observe(std::size_t arm, int reward) {
    record(arm, reward);
    if (exploit_ || t_ < stats_.size()) return;

    const bool phase_done = std::all_of(active_.begin(), active_.end(),
                                        [&](std::size_t a) { return stats_[a].count >= target_; });
    if (!phase_done) return;

    const double d2 = delta_ * delta_;
    const double width = std::sqrt(std::log(static_cast<double>(horizon_) * d2) /
                                   (2.0 * static_cast<double>(target_)));
    double best_lower = -std::numeric_limits<double>::infinity();
    for (std::size_t a : active_) best_lower = std::max(best_lower, stats_[a].mean - width);
    std::erase_if(active_, [&](std::size_t a) { return stats_[a].mean + width < best_lower; });

    delta_ /= 2.0;
    if (phase_ >= max_phase_ || active_.size() == 1) {
        exploit_ = true;
        return;
    }
    ++phase_;
    target_ = target_for(delta_);
}

// Dispatch

Policy make_policy(std::size_t arms, std::uint64_t horizon, const PolicyParams& params) {
    if (arms < 2) throw PolicyError("a policy needs at least 2 arms");
    if (horizon <= arms) throw PolicyError("horizon must exceed the number of arms");
    validate(params);
    switch (params.algorithm) {
        case Algorithm::Etc: return EtcPolicy(arms, horizon, params);
        case Algorithm::EpsilonGreedy: return EpsilonGreedyPolicy(arms, horizon, params);
        case Algorithm::Ucb: return UcbPolicy(arms, horizon, params);
        case Algorithm::UcbTuned: return UcbTunedPolicy(arms, horizon, params);
        case Algorithm::UcbV: return UcbVPolicy(arms, horizon, params);
        case Algorithm::Eucbv: return EucbvPolicy(arms, horizon, params);
        case Algorithm::PacUcb: return PacUcbPolicy(arms, horizon, params);
        case Algorithm::UcbImproved: return UcbImprovedPolicy(arms, horizon, params);
    }
    throw PolicyError("unhandled algorithm");
}

void observe(Policy& p, std::size_t arm, int reward) {
    if (reward != 0 && reward != 1)
        throw PolicyError("reward must be 0 or 1, got " + std::to_string(reward));
    std::visit(
        [&](auto& impl) {
            if (arm >= impl.arms())
                throw PolicyError("arm " + std::to_string(arm) + " out of range for " +
                                  std::to_string(impl.arms()) + " arms");
            impl.observe(arm, reward);
        },
        p);
}

std::vector<std::size_t> active_arms(const Policy& p) {
    return std::visit(
        [](const auto& impl) -> std::vector<std::size_t> {
            if constexpr (std::is_base_of_v<EliminationCore, std::decay_t<decltype(impl)>>) {
                return impl.active_set();
            } else {
                std::vector<std::size_t> all(impl.arms());
                for (std::size_t a = 0; a < all.size(); ++a) all[a] = a;
                return all;
            }
        },
        p);
}

}  // namespace bandit
