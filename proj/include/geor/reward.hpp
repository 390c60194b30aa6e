#pragma once

#include <optional>
#include <string_view>

#include "geor/coord_parser.hpp"
#include "geor/geodesy.hpp"

namespace geor {

// Distances are capped here before the reward is evaluated. The true
// antipodal maximum is ~20015 km; without the cap the final reward
// branch dips slightly below zero.
inline constexpr double kRewardDistanceCapKm = 20000.0;

/**
 * Per-prediction reward decomposition.
 *
 * distance_km and r_distance are only present when the prediction text
 * carried a usable coordinate (r_format == 1); the composite is their
 * product, so a format failure forces r_total to 0.
 */
struct RewardBreakdown {
    std::optional<double> distance_km;
    std::optional<double> r_distance;
    int r_format = 0;
    double r_total = 0.0;
    ParseStatus parse_status = ParseStatus::no_pair_found;
};

/**
 * Piecewise distance reward on [0, 1], strictly decreasing in d:
 *
 *   d <= 750          1.0 - 0.5 * d / 750
 *   750 < d <= 2500   0.5 - 0.3 * (d - 750) / 1750
 *   d > 2500          0.2 - 0.2 * (d - 2500) / 17500
 *
 * d is clamped to [0, 20000] first. Throws std::invalid_argument for
 * negative or non-finite d.
 */
double distance_reward(double distance_km);

// 1 iff the text contains exactly one well-formed, in-range pair.
int format_reward(std::string_view text);

// Full breakdown for one prediction against the ground truth. Distance
// is not computed when the format check fails.
RewardBreakdown composite_reward(std::string_view prediction_text, const GeoCoord& truth);

}  // namespace geor
