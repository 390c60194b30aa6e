#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "geor/geodesy.hpp"

namespace geor {

enum class AdminLevel { country = 0, region = 1, city = 2 };

const char* to_string(AdminLevel level);
std::optional<AdminLevel> admin_level_from_string(std::string_view text);

struct BoundingBox {
    double min_lat = 0.0;
    double max_lat = 0.0;
    double min_lon = 0.0;
    double max_lon = 0.0;

    bool contains(const GeoCoord& p) const {
        return p.lat_deg() >= min_lat && p.lat_deg() <= max_lat &&
               p.lon_deg() >= min_lon && p.lon_deg() <= max_lon;
    }
};

/**
 * One administrative polygon. Rings are closed (first vertex repeated
 * last, at least four entries) and have already been split at the
 * antimeridian during ingestion, so every ring is longitudinally
 * contiguous. Holes are ordinary rings; the even-odd rule handles them.
 */
struct AdminRegion {
    AdminLevel level = AdminLevel::country;
    std::string name;
    std::optional<std::string> parent_name;
    std::vector<std::vector<GeoCoord>> rings;
    BoundingBox bbox;
};

// Even-odd (ray crossing) containment over all rings in lon/lat space.
// Points on a ring edge or vertex count as inside.
bool point_in_region(const GeoCoord& p, const AdminRegion& region);

/**
 * Read-only boundary set with per-level, name-ordered lookups. Built once
 * from GeoJSON; lookups are bounding-box pruned, then exact.
 */
class BoundaryIndex {
public:
    explicit BoundaryIndex(std::vector<AdminRegion> regions, std::size_t skipped_features = 0);

    const std::vector<AdminRegion>& regions() const { return regions_; }
    std::size_t skipped_features() const { return skipped_features_; }

    // Name of the first containing polygon of this level in ascending
    // name order (the overlap tie-break), or nullopt if none contains p.
    std::optional<std::string> resolve_level(const GeoCoord& p, AdminLevel level) const;

private:
    std::vector<AdminRegion> regions_;
    std::array<std::vector<std::size_t>, 3> by_level_;
    std::size_t skipped_features_ = 0;
};

/**
 * Loads a GeoJSON FeatureCollection whose features carry "level"
 * ("country" | "region" | "city") and "name" properties and Polygon or
 * MultiPolygon geometry. Features that do not fit the schema are skipped
 * and counted. Throws std::runtime_error when the document itself is
 * unusable.
 */
BoundaryIndex load_boundaries_json_text(std::string_view geojson_text);
BoundaryIndex load_boundaries_file(const std::string& path);

// Hierarchy decoded from a coordinate. Absent levels mean no polygon of
// that level contains the point; a chain without a country is unresolved
// (open ocean or uncovered area) and carries only the coordinate.
struct RegionChain {
    std::optional<std::string> country;
    std::optional<std::string> region;
    std::optional<std::string> city;
    GeoCoord coord;

    bool resolved() const { return country.has_value(); }
};

// Deepest containment per level; city is only kept when a region is also
// present so the chain stays hierarchical.
RegionChain reverse_geocode(const GeoCoord& p, const BoundaryIndex& db);

struct CoRSample {
    std::string image_ref;
    RegionChain chain;
    GeoCoord target;  // quantized to the rendered 4-decimal precision
    std::string prompt_text;
    std::string response_text;
};

// Prompt attached to every synthesized sample.
extern const char* const kCorPromptText;

/**
 * Renders the fixed coarse-to-fine template:
 *
 *   Country: <name>
 *   Region: <name or "unknown">
 *   City: <name or "unknown">
 *   Coordinates: (<lat>, <lon>)
 *
 * The coordinate is written at 4 decimal places and the stored target is
 * quantized to the same grid, so parsing the response recovers the target
 * exactly. Throws std::invalid_argument for unresolved chains, or if a
 * boundary name sneaks a second coordinate pair into the response.
 */
CoRSample render_cor_sample(const std::string& image_ref, const RegionChain& chain,
                            const GeoCoord& target);

// One JSON object per sample, no trailing newline. Key order is stable.
std::string cor_sample_jsonl(const CoRSample& sample);

struct SynthStats {
    std::size_t emitted = 0;
    std::size_t skipped = 0;
};

/**
 * Streams JSONL records {"image_ref", "lat", "lon"} into CoR samples.
 * Unreadable or unresolvable records are written to the skip log with a
 * reason and never abort the run. Output order follows input order.
 */
SynthStats synthesize_dataset(std::istream& records_jsonl, const BoundaryIndex& db,
                              std::ostream& samples_out, std::ostream& skip_log_out);

}  // namespace geor
