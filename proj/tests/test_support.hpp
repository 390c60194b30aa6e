#pragma once

#include <algorithm>
#include <cmath>
#include <random>

#include "geor/geodesy.hpp"

namespace test_support {

// Independent distance oracle: spherical law of cosines. Deliberately a
// different formula from the haversine implementation under test.
inline double slc_distance_km(const geor::GeoCoord& a, const geor::GeoCoord& b) {
    const double p1 = geor::deg2rad(a.lat_deg());
    const double p2 = geor::deg2rad(b.lat_deg());
    const double dl = geor::deg2rad(b.lon_deg() - a.lon_deg());
    double arg = std::sin(p1) * std::sin(p2) + std::cos(p1) * std::cos(p2) * std::cos(dl);
    arg = std::clamp(arg, -1.0, 1.0);
    return 6371.0 * std::acos(arg);
}

// Seeded uniform coordinate generator for property sweeps.
class CoordGen {
public:
    explicit CoordGen(std::uint64_t seed) : rng_(seed), lat_(-90.0, 90.0), lon_(-180.0, 180.0) {}

    geor::GeoCoord next() { return *geor::make_coord(lat_(rng_), lon_(rng_)); }

    double uniform(double lo, double hi) {
        return std::uniform_real_distribution<double>(lo, hi)(rng_);
    }

    std::uint64_t bits() { return rng_(); }

private:
    std::mt19937_64 rng_;
    std::uniform_real_distribution<double> lat_;
    std::uniform_real_distribution<double> lon_;
};

}  // namespace test_support
