#include "geor/geodesy.hpp"

#include <algorithm>
#include <cmath>

namespace geor {

const char* to_string(CoordError err) {
    switch (err) {
        case CoordError::none: return "none";
        case CoordError::non_finite: return "non_finite";
        case CoordError::lat_out_of_range: return "lat_out_of_range";
        case CoordError::lon_out_of_range: return "lon_out_of_range";
    }
    return "unknown";
}

CoordError validate_coord(double lat_deg, double lon_deg) {
    if (!std::isfinite(lat_deg) || !std::isfinite(lon_deg)) {
        return CoordError::non_finite;
    }
    if (lat_deg < -90.0 || lat_deg > 90.0) {
        return CoordError::lat_out_of_range;
    }
    if (lon_deg < -180.0 || lon_deg > 180.0) {
        return CoordError::lon_out_of_range;
    }
    return CoordError::none;
}

double wrap_lon_deg(double lon_deg) {
    double w = std::fmod(lon_deg + 180.0, 360.0);
    if (w < 0.0) {
        w += 360.0;
    }
    return w - 180.0;
}

std::optional<GeoCoord> make_coord(double lat_deg, double lon_deg) {
    if (validate_coord(lat_deg, lon_deg) != CoordError::none) {
        return std::nullopt;
    }
    return GeoCoord(lat_deg, lon_deg);
}

double haversine_km(const GeoCoord& a, const GeoCoord& b) {
    const double lat1 = deg2rad(a.lat_deg());
    const double lat2 = deg2rad(b.lat_deg());
    const double dlat = lat2 - lat1;
    const double dlon = deg2rad(b.lon_deg()) - deg2rad(a.lon_deg());

    const double sin_dlat = std::sin(dlat / 2.0);
    const double sin_dlon = std::sin(dlon / 2.0);
    const double h = sin_dlat * sin_dlat +
                     std::cos(lat1) * std::cos(lat2) * sin_dlon * sin_dlon;

    const double root = std::clamp(std::sqrt(h), 0.0, 1.0);
    const double central_angle = 2.0 * std::asin(root);
    return kEarthRadiusKm * central_angle;
}

}  // namespace geor
