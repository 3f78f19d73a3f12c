#include "bandit/environment.hpp"

#include <algorithm>

namespace bandit {

std::size_t ScenarioSpec::optimal_index() const {
    if (arm_probs.empty()) throw ScenarioError("scenario '" + label + "' has no arms");
    std::size_t best = 0;
    for (std::size_t k = 1; k < arm_probs.size(); ++k) {
        if (arm_probs[k] > arm_probs[best]) best = k;
    }
    return best;
}

double ScenarioSpec::optimal_value() const { return arm_probs[optimal_index()]; }

std::vector<double> ScenarioSpec::gaps() const {
    const double best = optimal_value();
    std::vector<double> out;
    out.reserve(arm_probs.size());
    for (double p : arm_probs) out.push_back(best - p);
    return out;
}

double ScenarioSpec::max_gap() const {
    const auto g = gaps();
    return *std::max_element(g.begin(), g.end());
}

void validate(const ScenarioSpec& spec) {
    if (spec.label.empty()) throw ScenarioError("scenario label must not be empty");
    for (char c : spec.label) {
        const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                        (c >= '0' && c <= '9') || c == '_' || c == '-';
        if (!ok) throw ScenarioError("scenario label '" + spec.label + "' may only contain [A-Za-z0-9_-]");
    }
    if (spec.arm_probs.size() < 2)
        throw ScenarioError("scenario '" + spec.label + "': arm_probs needs at least 2 arms");
    for (std::size_t k = 0; k < spec.arm_probs.size(); ++k) {
        const double p = spec.arm_probs[k];
        if (!(p >= 0.0 && p <= 1.0)) {
            throw ScenarioError("scenario '" + spec.label + "': arm_probs[" + std::to_string(k) +
                                "] = " + std::to_string(p) + " is outside [0,1]");
        }
    }
}

const std::vector<std::string>& preset_labels() {
    static const std::vector<std::string> labels{"A", "B", "C"};
    return labels;
}

ScenarioSpec make_scenario(std::string_view preset) {
    if (preset == "A") return {"A", {0.8, 0.9}};
    if (preset == "B") return {"B", {0.895, 0.9}};
    if (preset == "C") return {"C", {0.89, 0.895}};
    throw ScenarioError("unknown scenario preset '" + std::string(preset) + "' (valid: A, B, C)");
}

double theoretical_variance(const ScenarioSpec& spec, std::size_t k) {
    if (k >= spec.arms())
        throw std::out_of_range("arm index " + std::to_string(k) + " out of range for " +
                                std::to_string(spec.arms()) + " arms");
    const double p = spec.arm_probs[k];
    return p * (1.0 - p);
}

int sample_reward(const ScenarioSpec& spec, std::size_t k, RewardStream& stream) {
    if (k >= spec.arms())
        throw std::out_of_range("arm index " + std::to_string(k) + " out of range for " +
                                std::to_string(spec.arms()) + " arms");
    return sample_bernoulli(spec.arm_probs[k], stream);
}

}  // namespace bandit
