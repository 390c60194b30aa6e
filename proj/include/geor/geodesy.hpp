#pragma once

#include <cmath>
#include <optional>

namespace geor {

// Mean Earth radius in kilometers; all great-circle math is spherical.
inline constexpr double kEarthRadiusKm = 6371.0;

// Largest possible great-circle separation (antipodal points).
inline constexpr double kMaxGreatCircleKm = 3.14159265358979323846 * kEarthRadiusKm;

// Kilometers per degree of latitude on the sphere (and per degree of
// longitude at the equator).
inline constexpr double kKmPerDegree = kEarthRadiusKm * 3.14159265358979323846 / 180.0;

inline constexpr double deg2rad(double deg) {
    return deg * 3.14159265358979323846 / 180.0;
}

// Wraps a longitude into [-180, 180).
double wrap_lon_deg(double lon_deg);

enum class CoordError {
    none,
    non_finite,
    lat_out_of_range,
    lon_out_of_range,
};

const char* to_string(CoordError err);

// Why a coordinate pair is unusable, or CoordError::none if it is fine.
// Latitude must lie in [-90, 90], longitude in [-180, 180], both finite.
CoordError validate_coord(double lat_deg, double lon_deg);

/**
 * A validated latitude/longitude pair in decimal degrees.
 *
 * Instances can only be obtained through make_coord(), so a GeoCoord is
 * in range and finite by construction; nothing is ever clamped.
 */
class GeoCoord {
public:
    double lat_deg() const { return lat_deg_; }
    double lon_deg() const { return lon_deg_; }

    friend bool operator==(const GeoCoord&, const GeoCoord&) = default;

private:
    friend std::optional<GeoCoord> make_coord(double, double);
    GeoCoord(double lat_deg, double lon_deg) : lat_deg_(lat_deg), lon_deg_(lon_deg) {}

    double lat_deg_;
    double lon_deg_;
};

// Returns a coordinate iff both components are finite and in range.
// Use validate_coord() to learn which check failed.
std::optional<GeoCoord> make_coord(double lat_deg, double lon_deg);

/**
 * Great-circle distance between two points in kilometers.
 *
 * Haversine form: the arcsin argument is clamped to [0, 1] so that
 * antipodal pairs cannot drift outside the domain. The result is always
 * in [0, pi * 6371].
 */
double haversine_km(const GeoCoord& a, const GeoCoord& b);

}  // namespace geor
