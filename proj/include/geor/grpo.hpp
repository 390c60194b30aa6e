#pragma once

#include <span>
#include <string>
#include <vector>

namespace geor {

// Std floor below which a group counts as reward-degenerate. Groups at
// or under this spread get exactly-zero advantages instead of a blown-up
// z-score.
inline constexpr double kAdvantageEpsilon = 1e-6;

struct Candidate {
    std::string response_text;
    double reward = 0.0;
};

// G sampled responses for one query, each already scored.
struct CandidateGroup {
    std::string query_id;
    std::vector<Candidate> candidates;

    std::size_t group_size() const { return candidates.size(); }
};

// Group-normalized advantages plus the moments they came from.
struct AdvantageSet {
    std::vector<double> advantages;
    double reward_mean = 0.0;
    double reward_std = 0.0;  // population std
    bool degenerate = false;
};

/**
 * Group z-score advantages: a_i = (r_i - mean) / (std + eps) with
 * population standard deviation. Groups whose std falls below
 * kAdvantageEpsilon are flagged degenerate and get all-zero advantages,
 * making the vanishing-advantage case exact.
 *
 * Throws std::invalid_argument when the group has fewer than two
 * candidates or a non-finite reward.
 */
AdvantageSet group_advantages(const CandidateGroup& group);

// Fraction of groups that are reward-degenerate. Throws on empty input.
double vanishing_advantage_rate(std::span<const CandidateGroup> groups);

struct GroupVarianceReport {
    std::vector<double> per_group;  // population variance of each group's rewards
    double mean_variance = 0.0;     // unweighted mean across groups
};

// Per-group reward variance plus the aggregate mean. Throws on empty input.
GroupVarianceReport group_reward_variance(std::span<const CandidateGroup> groups);

}  // namespace geor
