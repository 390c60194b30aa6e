#pragma once

#include <cstdint>
#include <span>
#include <unordered_map>
#include <vector>

#include "geor/geodesy.hpp"

namespace geor {

/**
 * Fixed-cell grid over lat/lon used to answer "which indexed points lie
 * within R km of a query" without scanning everything. Cell keys are
 * floor(lat / cell) x floor(wrapped lon / cell); the lookup widens its
 * cell neighborhood with latitude so it stays exact up to the poles.
 */
class SpatialGridIndex {
public:
    SpatialGridIndex(std::vector<GeoCoord> points, double cell_deg);

    double cell_deg() const { return cell_deg_; }
    std::size_t size() const { return points_.size(); }
    const std::vector<GeoCoord>& points() const { return points_; }

    // Indices of indexed points with haversine distance <= radius_km,
    // ascending. Exactly the brute-force set.
    std::vector<std::size_t> within_radius(const GeoCoord& query, double radius_km) const;

    bool any_within_radius(const GeoCoord& query, double radius_km) const;

private:
    template <typename Visitor>  // Visitor(point_index) -> bool, false stops
    bool visit_candidates(const GeoCoord& query, double radius_km, Visitor&& visit) const;

    std::vector<GeoCoord> points_;
    double cell_deg_;
    std::unordered_map<std::uint64_t, std::vector<std::size_t>> cells_;
};

// A dense grid cell of correctly-localized samples: city centers,
// landmarks, anywhere the base model already gets right.
struct PopularRegion {
    GeoCoord center;
    std::size_t member_count = 0;
};

/**
 * Grid-bins the seed coordinates; every cell holding at least min_count
 * samples becomes one PopularRegion centered at the member mean. Output
 * is sorted by descending member_count, then by (lat, lon) of the center.
 * An empty seed list yields an empty result.
 */
std::vector<PopularRegion> cluster_popular_regions(std::span<const GeoCoord> correct_samples,
                                                   double cell_deg, std::size_t min_count);

struct Exclusion {
    std::size_t sample_index = 0;
    std::size_t nearest_center = 0;  // index into the popular list
    double distance_km = 0.0;
};

struct HardFilterResult {
    std::vector<std::size_t> retained;  // sample indices, input order
    std::vector<Exclusion> excluded;    // input order
};

/**
 * Keeps exactly the samples farther than radius_km from every popular
 * center (distance <= radius excludes, boundary inclusive). Uses the
 * grid index internally; results match brute force.
 */
HardFilterResult filter_hard(std::span<const GeoCoord> samples,
                             std::span<const PopularRegion> popular, double radius_km = 200.0);

// Brute-force minimum distance to any popular center; +infinity when the
// list is empty. Doubles as the oracle for the grid-backed filter.
double nearest_popular_km(const GeoCoord& p, std::span<const PopularRegion> popular);

}  // namespace geor
