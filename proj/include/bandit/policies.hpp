// The eight decision policies behind one incremental interface:
//
//   Policy p = make_policy(K, horizon, params);
//   for each step: arm = select_arm(p, stream); observe(p, arm, reward);
//
// Every policy forces arms 0..K-1 once during steps 1..K (ETC folds this into
// its round-robin exploration). All argmax operations break ties toward the
// lowest arm index.
#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "bandit/environment.hpp"

namespace bandit {

enum class Algorithm { Etc, EpsilonGreedy, Ucb, UcbTuned, UcbV, Eucbv, PacUcb, UcbImproved };

/// Stable identifiers used in manifests, CSVs and seeds.
std::string_view algorithm_id(Algorithm a) noexcept;
Algorithm parse_algorithm(std::string_view id);
const std::vector<Algorithm>& all_algorithms();

class PolicyError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

struct PolicyParams {
    Algorithm algorithm = Algorithm::Ucb;
    std::uint64_t m = 1000;        // ETC pulls per arm
    double epsilon = 0.1;          // eps-Greedy
    double theta = 1.0;            // UCB-V exploration scale
    double c = 1.0;                // UCB-V / PAC-UCB
    double b = 1.0;                // UCB-V / PAC-UCB reward range
    double rho = 0.5;              // EUCBV
    std::optional<double> psi;     // EUCBV; horizon / K^2 when unset
    double q = 1.3;                // PAC-UCB
    double beta = 0.05;            // PAC-UCB
    double delta_tilde0 = 1.0;     // UCB-Improved initial gap estimate
    bool variance_free = false;    // PAC-UCB: replace the empirical variance by b^2

    /// "key=value;key=value" over the fields this algorithm consults, in a
    /// fixed order. Empty for parameterless algorithms.
    std::string canonical() const;
    /// e.g. "ETC (m=1000)", "Greedy (eps=0.5)", "UCB-V".
    std::string display_name() const;

    friend bool operator==(const PolicyParams&, const PolicyParams&) = default;
};

/// Checks the fields the algorithm consults; throws PolicyError naming the field.
void validate(const PolicyParams& params);

/// Per-arm sufficient statistics. The mean is kept as the correctly rounded
/// reward_sum / count; m2 follows Welford's recurrence.
struct ArmStats {
    std::uint64_t count = 0;
    std::uint64_t reward_sum = 0;
    double mean = 0.0;
    double m2 = 0.0;

    void push(int reward) noexcept {
        ++count;
        reward_sum += static_cast<std::uint64_t>(reward);
        const double x = reward;
        const double delta = x - mean;
        mean = static_cast<double>(reward_sum) / static_cast<double>(count);
        m2 += delta * (x - mean);
    }
    /// Population (divide-by-count) variance.
    double variance() const noexcept { return count == 0 ? 0.0 : m2 / static_cast<double>(count); }

    friend bool operator==(const ArmStats&, const ArmStats&) = default;
};

// Index formulas. `t` is the step being decided (1-based).

double ucb_index(const ArmStats& s, double t);
/// UCB-V bound with exploration function theta * ln t.
double ucbv_bound(const ArmStats& s, double t, const PolicyParams& p);
double ucb_tuned_index(const ArmStats& s, double t);
/// max(ln(K s^q / beta), 2)
double pac_exploration(std::uint64_t s, std::size_t arms, double q, double beta);
double pac_ucb_bound(const ArmStats& s, std::size_t arms, const PolicyParams& p);
/// sqrt(rho (var + 2) log_term / (4 count))
double eucbv_width(const ArmStats& s, double rho, double log_term);
/// floor(0.5 * log2(horizon / e)), clamped at 0.
std::uint64_t phase_cap(std::uint64_t horizon);

/// State shared by every policy: per-arm statistics and the number of
/// completed steps.
class PolicyCore {
public:
    PolicyCore(std::size_t arms, std::uint64_t horizon);

    std::size_t arms() const noexcept { return stats_.size(); }
    std::uint64_t horizon() const noexcept { return horizon_; }
    /// Completed steps.
    std::uint64_t steps() const noexcept { return t_; }
    const std::vector<ArmStats>& stats() const noexcept { return stats_; }

protected:
    void record(std::size_t arm, int reward);
    /// Arm forced during steps 1..K, if any.
    std::optional<std::size_t> forced_arm() const noexcept {
        if (t_ < stats_.size()) return static_cast<std::size_t>(t_);
        return std::nullopt;
    }
    std::size_t greedy_arm() const noexcept;

    std::vector<ArmStats> stats_;
    std::uint64_t horizon_;
    std::uint64_t t_ = 0;
};

class EtcPolicy : public PolicyCore {
public:
    EtcPolicy(std::size_t arms, std::uint64_t horizon, const PolicyParams& p);
    std::size_t select(RewardStream& stream);
    void observe(std::size_t arm, int reward) { record(arm, reward); }
    std::optional<std::size_t> commit_index() const noexcept { return commit_; }

private:
    std::uint64_t explore_steps_;
    std::optional<std::size_t> commit_;
};

class EpsilonGreedyPolicy : public PolicyCore {
public:
    EpsilonGreedyPolicy(std::size_t arms, std::uint64_t horizon, const PolicyParams& p);
    std::size_t select(RewardStream& stream);
    void observe(std::size_t arm, int reward) { record(arm, reward); }

private:
    double epsilon_;
};

class UcbPolicy : public PolicyCore {
public:
    UcbPolicy(std::size_t arms, std::uint64_t horizon, const PolicyParams&) : PolicyCore(arms, horizon) {}
    std::size_t select(RewardStream& stream);
    void observe(std::size_t arm, int reward) { record(arm, reward); }
};

class UcbTunedPolicy : public PolicyCore {
public:
    UcbTunedPolicy(std::size_t arms, std::uint64_t horizon, const PolicyParams&) : PolicyCore(arms, horizon) {}
    std::size_t select(RewardStream& stream);
    void observe(std::size_t arm, int reward) { record(arm, reward); }
};

class UcbVPolicy : public PolicyCore {
public:
    UcbVPolicy(std::size_t arms, std::uint64_t horizon, const PolicyParams& p)
        : PolicyCore(arms, horizon), params_(p) {}
    std::size_t select(RewardStream& stream);
    void observe(std::size_t arm, int reward) { record(arm, reward); }

private:
    PolicyParams params_;
};

class PacUcbPolicy : public PolicyCore {
public:
    PacUcbPolicy(std::size_t arms, std::uint64_t horizon, const PolicyParams& p);
    std::size_t select(RewardStream& stream);
    void observe(std::size_t arm, int reward);

private:
    PolicyParams params_;
    std::vector<double> index_;  // depends only on the arm's own statistics
};

/// Elimination policies share an active set that only ever shrinks.
class EliminationCore : public PolicyCore {
public:
    EliminationCore(std::size_t arms, std::uint64_t horizon);
    const std::vector<std::size_t>& active_set() const noexcept { return active_; }
    std::uint64_t phase() const noexcept { return phase_; }
    std::uint64_t max_phase() const noexcept { return max_phase_; }

protected:
    std::vector<std::size_t> active_;
    std::uint64_t phase_ = 0;
    std::uint64_t max_phase_;
};

class EucbvPolicy : public EliminationCore {
public:
    EucbvPolicy(std::size_t arms, std::uint64_t horizon, const PolicyParams& p);
    std::size_t select(RewardStream& stream);
    void observe(std::size_t arm, int reward);

    double epsilon_m() const noexcept { return eps_; }
    std::uint64_t phase_budget() const noexcept { return budget_; }
    double psi() const noexcept { return psi_; }

private:
    double log_term() const noexcept;
    std::uint64_t phase_length(double eps) const noexcept;

    double rho_;
    double psi_;
    double eps_ = 1.0;
    std::uint64_t budget_;
};

class UcbImprovedPolicy : public EliminationCore {
public:
    UcbImprovedPolicy(std::size_t arms, std::uint64_t horizon, const PolicyParams& p);
    std::size_t select(RewardStream& stream);
    void observe(std::size_t arm, int reward);

    double delta_tilde() const noexcept { return delta_; }
    std::uint64_t phase_target() const noexcept { return target_; }
    bool exploiting() const noexcept { return exploit_; }

private:
    std::uint64_t target_for(double delta) const noexcept;

    double delta_;
    std::uint64_t target_;
    bool exploit_ = false;
};

using Policy = std::variant<EtcPolicy, EpsilonGreedyPolicy, UcbPolicy, UcbTunedPolicy, UcbVPolicy,
                            EucbvPolicy, PacUcbPolicy, UcbImprovedPolicy>;

/// Validates and builds a policy. Requires arms >= 2 and horizon > arms.
Policy make_policy(std::size_t arms, std::uint64_t horizon, const PolicyParams& params);

inline std::size_t select_arm(Policy& p, RewardStream& stream) {
    return std::visit([&](auto& impl) { return impl.select(stream); }, p);
}

/// Throws PolicyError for rewards outside {0,1} or an out-of-range arm.
void observe(Policy& p, std::size_t arm, int reward);

inline const std::vector<ArmStats>& arm_stats(const Policy& p) {
    return std::visit([](const auto& impl) -> const std::vector<ArmStats>& { return impl.stats(); }, p);
}

/// Arms still eligible; every arm for non-elimination policies.
std::vector<std::size_t> active_arms(const Policy& p);

}  // namespace bandit
