#include "geor/grpo.hpp"

#include <algorithm>
#include <cmath>
#include <vector>
#include <stdexcept>

namespace geor {
namespace {

struct Moments {
    double mean = 0.0;
    double variance = 0.0;  // population
};

// Accumulates over a sorted copy so the moments (and with them every
// advantage) are exactly invariant under candidate permutation.
Moments reward_moments(const CandidateGroup& group) {
    std::vector<double> rewards;
    rewards.reserve(group.candidates.size());
    for (const Candidate& c : group.candidates) {
        if (!std::isfinite(c.reward)) {
            throw std::invalid_argument("group rewards must be finite");
        }
        rewards.push_back(c.reward);
    }
    std::sort(rewards.begin(), rewards.end());

    const double n = static_cast<double>(rewards.size());
    double sum = 0.0;
    for (double r : rewards) {
        sum += r;
    }
    const double mean = sum / n;
    double sq = 0.0;
    for (double r : rewards) {
        const double dev = r - mean;
        sq += dev * dev;
    }
    return Moments{mean, sq / n};
}

}  // namespace

AdvantageSet group_advantages(const CandidateGroup& group) {
    if (group.candidates.size() < 2) {
        throw std::invalid_argument("group_advantages: need at least two candidates");
    }
    const Moments m = reward_moments(group);
    AdvantageSet set;
    set.reward_mean = m.mean;
    set.reward_std = std::sqrt(m.variance);
    set.degenerate = set.reward_std < kAdvantageEpsilon;
    set.advantages.resize(group.candidates.size(), 0.0);
    if (!set.degenerate) {
        const double denom = set.reward_std + kAdvantageEpsilon;
        for (std::size_t i = 0; i < group.candidates.size(); ++i) {
            set.advantages[i] = (group.candidates[i].reward - m.mean) / denom;
        }
    }
    return set;
}

double vanishing_advantage_rate(std::span<const CandidateGroup> groups) {
    if (groups.empty()) {
        throw std::invalid_argument("vanishing_advantage_rate: empty group list");
    }
    std::size_t degenerate = 0;
    for (const CandidateGroup& group : groups) {
        if (group_advantages(group).degenerate) {
            ++degenerate;
        }
    }
    return static_cast<double>(degenerate) / static_cast<double>(groups.size());
}

GroupVarianceReport group_reward_variance(std::span<const CandidateGroup> groups) {
    if (groups.empty()) {
        throw std::invalid_argument("group_reward_variance: empty group list");
    }
    GroupVarianceReport report;
    report.per_group.reserve(groups.size());
    double sum = 0.0;
    for (const CandidateGroup& group : groups) {
        if (group.candidates.empty()) {
            throw std::invalid_argument("group_reward_variance: empty group");
        }
        const double v = reward_moments(group).variance;
        report.per_group.push_back(v);
        sum += v;
    }
    report.mean_variance = sum / static_cast<double>(groups.size());
    return report;
}

}  // namespace geor
