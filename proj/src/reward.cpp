#include "geor/reward.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace geor {

double distance_reward(double distance_km) {
    if (!std::isfinite(distance_km) || distance_km < 0.0) {
        throw std::invalid_argument("distance_reward: distance must be finite and >= 0");
    }
    const double d = std::min(distance_km, kRewardDistanceCapKm);
    if (d <= 750.0) {
        return 1.0 - 0.5 * d / 750.0;
    }
    if (d <= 2500.0) {
        return 0.5 - 0.3 * (d - 750.0) / 1750.0;
    }
    return 0.2 - 0.2 * (d - 2500.0) / 17500.0;
}

int format_reward(std::string_view text) {
    return parse_strict(text).status == ParseStatus::valid ? 1 : 0;
}

RewardBreakdown composite_reward(std::string_view prediction_text, const GeoCoord& truth) {
    RewardBreakdown breakdown;
    const ParseOutcome outcome = parse_strict(prediction_text);
    breakdown.parse_status = outcome.status;
    if (outcome.status != ParseStatus::valid) {
        return breakdown;  // r_format 0, r_total 0, no distance
    }
    breakdown.r_format = 1;
    const double d = haversine_km(outcome.parsed->coord, truth);
    breakdown.distance_km = d;
    breakdown.r_distance = distance_reward(d);
    breakdown.r_total = *breakdown.r_distance;
    return breakdown;
}

}  // namespace geor
