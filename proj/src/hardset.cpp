#include "geor/hardset.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace geor {
namespace {

std::uint64_t pack_cell(int lat_cell, int lon_cell) {
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(lat_cell)) << 32) |
           static_cast<std::uint32_t>(lon_cell);
}

int cell_of(double value_deg, double cell_deg) {
    return static_cast<int>(std::floor(value_deg / cell_deg));
}

}  // namespace

SpatialGridIndex::SpatialGridIndex(std::vector<GeoCoord> points, double cell_deg)
    : points_(std::move(points)), cell_deg_(cell_deg) {
    if (!(cell_deg > 0.0)) {
        throw std::invalid_argument("SpatialGridIndex: cell_deg must be positive");
    }
    for (std::size_t i = 0; i < points_.size(); ++i) {
        const int lat_cell = cell_of(points_[i].lat_deg(), cell_deg_);
        const int lon_cell = cell_of(wrap_lon_deg(points_[i].lon_deg()), cell_deg_);
        cells_[pack_cell(lat_cell, lon_cell)].push_back(i);
    }
}

template <typename Visitor>
bool SpatialGridIndex::visit_candidates(const GeoCoord& query, double radius_km,
                                        Visitor&& visit) const {
    const double dlat_deg = radius_km / kKmPerDegree + 1e-9;
    const double band_lo = std::max(-90.0, query.lat_deg() - dlat_deg);
    const double band_hi = std::min(90.0, query.lat_deg() + dlat_deg);

    // Longitude reach at the band's extreme latitude. sin/asin instead of
    // the linear ratio keeps the bound valid for large radii.
    const double max_abs_lat = std::max(std::abs(band_lo), std::abs(band_hi));
    const double cos_lat = std::cos(deg2rad(max_abs_lat));
    const double half_angle = std::sin(radius_km / (2.0 * kEarthRadiusKm));
    bool all_lons = band_lo <= -90.0 + 1e-12 || band_hi >= 90.0 - 1e-12;
    double dlon_deg = 180.0;
    if (!all_lons) {
        const double ratio = half_angle / cos_lat;
        if (ratio >= 1.0) {
            all_lons = true;
        } else {
            dlon_deg = 2.0 * std::asin(ratio) * 180.0 / 3.14159265358979323846 + 1e-9;
        }
    }

    const int lat_lo = cell_of(band_lo, cell_deg_);
    const int lat_hi = cell_of(band_hi, cell_deg_);

    // Longitude coverage as wrapped intervals. Cells at the antimeridian
    // are partial, so the keys come from interval endpoints in wrapped
    // space, never from stepping across the seam.
    const double qlon = wrap_lon_deg(query.lon_deg());
    std::vector<std::pair<double, double>> segments;
    if (all_lons || 2.0 * dlon_deg >= 360.0) {
        segments.emplace_back(-180.0, std::nextafter(180.0, 0.0));
    } else {
        const double lo = qlon - dlon_deg;
        const double hi = qlon + dlon_deg;
        if (lo < -180.0) {
            segments.emplace_back(-180.0, hi);
            segments.emplace_back(lo + 360.0, std::nextafter(180.0, 0.0));
        } else if (hi >= 180.0) {
            segments.emplace_back(lo, std::nextafter(180.0, 0.0));
            segments.emplace_back(-180.0, hi - 360.0);
        } else {
            segments.emplace_back(lo, hi);
        }
    }

    std::vector<std::uint64_t> keys;
    for (int lat_cell = lat_lo; lat_cell <= lat_hi; ++lat_cell) {
        for (const auto& [seg_lo, seg_hi] : segments) {
            const int lon_lo = cell_of(seg_lo, cell_deg_);
            const int lon_hi = cell_of(seg_hi, cell_deg_);
            for (int lon_cell = lon_lo; lon_cell <= lon_hi; ++lon_cell) {
                keys.push_back(pack_cell(lat_cell, lon_cell));
            }
        }
    }
    std::sort(keys.begin(), keys.end());
    keys.erase(std::unique(keys.begin(), keys.end()), keys.end());

    for (std::uint64_t key : keys) {
        const auto it = cells_.find(key);
        if (it == cells_.end()) {
            continue;
        }
        for (std::size_t idx : it->second) {
            if (!visit(idx)) {
                return false;
            }
        }
    }
    return true;
}

std::vector<std::size_t> SpatialGridIndex::within_radius(const GeoCoord& query,
                                                         double radius_km) const {
    std::vector<std::size_t> hits;
    visit_candidates(query, radius_km, [&](std::size_t idx) {
        if (haversine_km(points_[idx], query) <= radius_km) {
            hits.push_back(idx);
        }
        return true;
    });
    std::sort(hits.begin(), hits.end());
    return hits;
}

bool SpatialGridIndex::any_within_radius(const GeoCoord& query, double radius_km) const {
    bool found = false;
    visit_candidates(query, radius_km, [&](std::size_t idx) {
        if (haversine_km(points_[idx], query) <= radius_km) {
            found = true;
            return false;
        }
        return true;
    });
    return found;
}

std::vector<PopularRegion> cluster_popular_regions(std::span<const GeoCoord> correct_samples,
                                                   double cell_deg, std::size_t min_count) {
    if (!(cell_deg > 0.0)) {
        throw std::invalid_argument("cluster_popular_regions: cell_deg must be positive");
    }
    if (min_count < 1) {
        throw std::invalid_argument("cluster_popular_regions: min_count must be >= 1");
    }

    std::unordered_map<std::uint64_t, std::vector<std::size_t>> cells;
    for (std::size_t i = 0; i < correct_samples.size(); ++i) {
        const int lat_cell = cell_of(correct_samples[i].lat_deg(), cell_deg);
        const int lon_cell = cell_of(wrap_lon_deg(correct_samples[i].lon_deg()), cell_deg);
        cells[pack_cell(lat_cell, lon_cell)].push_back(i);
    }

    std::vector<PopularRegion> regions;
    for (const auto& [key, members] : cells) {
        if (members.size() < min_count) {
            continue;
        }
        double lat_sum = 0.0;
        double lon_sum = 0.0;
        const double lon_ref = wrap_lon_deg(correct_samples[members.front()].lon_deg());
        for (std::size_t idx : members) {
            lat_sum += correct_samples[idx].lat_deg();
            // Unwrap relative to the first member before averaging.
            double lon = wrap_lon_deg(correct_samples[idx].lon_deg());
            while (lon - lon_ref > 180.0) lon -= 360.0;
            while (lon_ref - lon > 180.0) lon += 360.0;
            lon_sum += lon;
        }
        const double n = static_cast<double>(members.size());
        const double center_lat = lat_sum / n;
        const double center_lon = wrap_lon_deg(lon_sum / n);
        regions.push_back(PopularRegion{*make_coord(center_lat, center_lon), members.size()});
    }

    std::sort(regions.begin(), regions.end(), [](const PopularRegion& a, const PopularRegion& b) {
        if (a.member_count != b.member_count) {
            return a.member_count > b.member_count;
        }
        if (a.center.lat_deg() != b.center.lat_deg()) {
            return a.center.lat_deg() < b.center.lat_deg();
        }
        return a.center.lon_deg() < b.center.lon_deg();
    });
    return regions;
}

HardFilterResult filter_hard(std::span<const GeoCoord> samples,
                             std::span<const PopularRegion> popular, double radius_km) {
    if (!(radius_km > 0.0)) {
        throw std::invalid_argument("filter_hard: radius_km must be positive");
    }

    HardFilterResult result;
    if (popular.empty()) {
        result.retained.resize(samples.size());
        for (std::size_t i = 0; i < samples.size(); ++i) {
            result.retained[i] = i;
        }
        return result;
    }

    std::vector<GeoCoord> centers;
    centers.reserve(popular.size());
    for (const PopularRegion& region : popular) {
        centers.push_back(region.center);
    }
    // Cell size spanning roughly the exclusion radius keeps the
    // neighborhood scan small without many empty cells.
    const double cell_deg = std::clamp(radius_km / kKmPerDegree, 0.25, 10.0);
    const SpatialGridIndex index(std::move(centers), cell_deg);

    for (std::size_t i = 0; i < samples.size(); ++i) {
        const auto hits = index.within_radius(samples[i], radius_km);
        if (hits.empty()) {
            result.retained.push_back(i);
            continue;
        }
        std::size_t nearest = hits.front();
        double best = haversine_km(samples[i], index.points()[nearest]);
        for (std::size_t h = 1; h < hits.size(); ++h) {
            const double d = haversine_km(samples[i], index.points()[hits[h]]);
            if (d < best) {
                best = d;
                nearest = hits[h];
            }
        }
        result.excluded.push_back(Exclusion{i, nearest, best});
    }
    return result;
}

double nearest_popular_km(const GeoCoord& p, std::span<const PopularRegion> popular) {
    double best = std::numeric_limits<double>::infinity();
    for (const PopularRegion& region : popular) {
        best = std::min(best, haversine_km(p, region.center));
    }
    return best;
}

}  // namespace geor
