// Bernoulli bandit instances and the deterministic reward-sampling substrate.
#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace bandit {

/// SplitMix64 with the canonical constants. Every random draw in the
/// framework goes through this generator so runs are bit-identical across
/// platforms and implementations.
class RewardStream {
public:
    explicit RewardStream(std::uint64_t seed = 0) noexcept : state_(seed), origin_seed_(seed) {}

    /// Restores a stream captured mid-run with state()/origin_seed().
    static RewardStream restore(std::uint64_t origin_seed, std::uint64_t state) noexcept {
        RewardStream s(origin_seed);
        s.state_ = state;
        return s;
    }

    std::uint64_t next_word() noexcept {
        state_ += 0x9E3779B97F4A7C15ULL;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    /// Uniform in [0,1) with 53 bits of precision.
    double next_uniform() noexcept {
        return static_cast<double>(next_word() >> 11) * 0x1.0p-53;
    }

    std::uint64_t state() const noexcept { return state_; }
    std::uint64_t origin_seed() const noexcept { return origin_seed_; }

    friend bool operator==(const RewardStream&, const RewardStream&) = default;

private:
    std::uint64_t state_;
    std::uint64_t origin_seed_;
};

/// One application of the SplitMix64 step to an arbitrary state.
inline std::uint64_t splitmix64_mix(std::uint64_t x) noexcept {
    RewardStream s(x);
    return s.next_word();
}

class ScenarioError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

struct ScenarioSpec {
    std::string label;
    std::vector<double> arm_probs;

    std::size_t arms() const noexcept { return arm_probs.size(); }
    /// argmax of arm_probs, lowest index on ties.
    std::size_t optimal_index() const;
    double optimal_value() const;
    /// Q* - p_k for every arm.
    std::vector<double> gaps() const;
    /// Largest gap between the best arm and any other arm.
    double max_gap() const;

    friend bool operator==(const ScenarioSpec&, const ScenarioSpec&) = default;
};

/// Throws ScenarioError when K < 2, any probability is outside [0,1] or
/// the label is not a filesystem-safe identifier.
void validate(const ScenarioSpec& spec);

/// Presets "A", "B" and "C".
ScenarioSpec make_scenario(std::string_view preset);
const std::vector<std::string>& preset_labels();

double theoretical_variance(const ScenarioSpec& spec, std::size_t k);

inline int sample_bernoulli(double p, RewardStream& stream) noexcept {
    return stream.next_uniform() < p ? 1 : 0;
}

int sample_reward(const ScenarioSpec& spec, std::size_t k, RewardStream& stream);

}  // namespace bandit
