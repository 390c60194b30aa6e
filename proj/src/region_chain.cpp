#include "geor/region_chain.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

#include "geor/coord_parser.hpp"

namespace geor {
namespace {

using nlohmann::json;

// Raw vertex used during ingestion, before range validation. Longitudes
// may leave [-180, 180] while a ring is unwrapped for splitting.
struct LonLat {
    double lon = 0.0;
    double lat = 0.0;
};

constexpr double kBoundaryEps = 1e-9;

bool on_segment(const GeoCoord& p, const GeoCoord& a, const GeoCoord& b) {
    const double px = p.lon_deg(), py = p.lat_deg();
    const double ax = a.lon_deg(), ay = a.lat_deg();
    const double bx = b.lon_deg(), by = b.lat_deg();
    if (px < std::min(ax, bx) - kBoundaryEps || px > std::max(ax, bx) + kBoundaryEps ||
        py < std::min(ay, by) - kBoundaryEps || py > std::max(ay, by) + kBoundaryEps) {
        return false;
    }
    const double cross = (bx - ax) * (py - ay) - (by - ay) * (px - ax);
    return std::abs(cross) <= kBoundaryEps * std::max({1.0, std::abs(bx - ax), std::abs(by - ay)});
}

// Continuous longitudes: each vertex is shifted by multiples of 360 to
// stay within 180 degrees of its predecessor.
std::vector<LonLat> unwrap_ring(std::vector<LonLat> ring) {
    for (std::size_t i = 1; i < ring.size(); ++i) {
        double lon = ring[i].lon;
        const double prev = ring[i - 1].lon;
        while (lon - prev > 180.0) lon -= 360.0;
        while (prev - lon > 180.0) lon += 360.0;
        ring[i].lon = lon;
    }
    return ring;
}

// Sutherland-Hodgman clip of an open ring against lon <= bound or
// lon >= bound.
std::vector<LonLat> clip_half_plane(const std::vector<LonLat>& ring, double bound, bool keep_leq) {
    const auto inside = [&](const LonLat& v) {
        return keep_leq ? v.lon <= bound : v.lon >= bound;
    };
    const auto intersect = [&](const LonLat& a, const LonLat& b) {
        const double t = (bound - a.lon) / (b.lon - a.lon);
        return LonLat{bound, a.lat + t * (b.lat - a.lat)};
    };
    std::vector<LonLat> out;
    out.reserve(ring.size() + 2);
    for (std::size_t i = 0; i < ring.size(); ++i) {
        const LonLat& cur = ring[i];
        const LonLat& prev = ring[(i + ring.size() - 1) % ring.size()];
        if (inside(cur)) {
            if (!inside(prev)) {
                out.push_back(intersect(prev, cur));
            }
            out.push_back(cur);
        } else if (inside(prev)) {
            out.push_back(intersect(prev, cur));
        }
    }
    return out;
}

// Splits an ingested ring into longitudinally contiguous pieces, each
// within [-180, 180]. Rings that never leave the range pass through
// untouched.
std::vector<std::vector<LonLat>> split_ring_at_antimeridian(const std::vector<LonLat>& raw) {
    // Drop the closing duplicate; clipping works on the open ring.
    std::vector<LonLat> open(raw);
    if (open.size() > 1 && open.front().lon == open.back().lon &&
        open.front().lat == open.back().lat) {
        open.pop_back();
    }
    open = unwrap_ring(std::move(open));

    double min_lon = std::numeric_limits<double>::infinity();
    double max_lon = -std::numeric_limits<double>::infinity();
    for (const LonLat& v : open) {
        min_lon = std::min(min_lon, v.lon);
        max_lon = std::max(max_lon, v.lon);
    }

    std::vector<std::vector<LonLat>> pieces;
    if (min_lon >= -180.0 && max_lon <= 180.0) {
        pieces.push_back(std::move(open));
        return pieces;
    }

    // Strip k covers [-180 + 360k, 180 + 360k]; clip against each strip
    // overlapping the unwrapped extent and shift the piece back into range.
    const int k_lo = static_cast<int>(std::floor((min_lon + 180.0) / 360.0));
    const int k_hi = static_cast<int>(std::floor((max_lon + 180.0) / 360.0));
    for (int k = k_lo; k <= k_hi; ++k) {
        const double lo = -180.0 + 360.0 * k;
        const double hi = 180.0 + 360.0 * k;
        std::vector<LonLat> piece = clip_half_plane(open, lo, /*keep_leq=*/false);
        piece = clip_half_plane(piece, hi, /*keep_leq=*/true);
        if (piece.size() < 3) {
            continue;
        }
        for (LonLat& v : piece) {
            v.lon -= 360.0 * k;
        }
        pieces.push_back(std::move(piece));
    }
    return pieces;
}

// Closes the piece and validates every vertex; returns nullopt when any
// vertex is out of range (the caller skips the feature).
std::optional<std::vector<GeoCoord>> to_closed_ring(const std::vector<LonLat>& piece) {
    std::vector<GeoCoord> ring;
    ring.reserve(piece.size() + 1);
    for (const LonLat& v : piece) {
        auto coord = make_coord(v.lat, v.lon);
        if (!coord) {
            return std::nullopt;
        }
        ring.push_back(*coord);
    }
    if (ring.size() < 3) {
        return std::nullopt;
    }
    ring.push_back(ring.front());
    return ring;
}

bool parse_position(const json& pos, LonLat& out) {
    if (!pos.is_array() || pos.size() < 2 || !pos[0].is_number() || !pos[1].is_number()) {
        return false;
    }
    out.lon = pos[0].get<double>();
    out.lat = pos[1].get<double>();
    return true;
}

bool parse_ring_array(const json& ring_json, std::vector<std::vector<GeoCoord>>& rings) {
    if (!ring_json.is_array() || ring_json.size() < 3) {
        return false;
    }
    std::vector<LonLat> raw;
    raw.reserve(ring_json.size());
    for (const json& pos : ring_json) {
        LonLat v;
        if (!parse_position(pos, v)) {
            return false;
        }
        raw.push_back(v);
    }
    for (const auto& piece : split_ring_at_antimeridian(raw)) {
        auto closed = to_closed_ring(piece);
        if (!closed) {
            return false;
        }
        rings.push_back(std::move(*closed));
    }
    return true;
}

bool parse_polygon_rings(const json& geometry, std::vector<std::vector<GeoCoord>>& rings) {
    const auto type_it = geometry.find("type");
    const auto coords_it = geometry.find("coordinates");
    if (type_it == geometry.end() || coords_it == geometry.end() || !coords_it->is_array()) {
        return false;
    }
    const std::string type = type_it->is_string() ? type_it->get<std::string>() : "";
    if (type == "Polygon") {
        for (const json& ring : *coords_it) {
            if (!parse_ring_array(ring, rings)) {
                return false;
            }
        }
        return !rings.empty();
    }
    if (type == "MultiPolygon") {
        for (const json& poly : *coords_it) {
            if (!poly.is_array()) {
                return false;
            }
            for (const json& ring : poly) {
                if (!parse_ring_array(ring, rings)) {
                    return false;
                }
            }
        }
        return !rings.empty();
    }
    return false;
}

BoundingBox compute_bbox(const std::vector<std::vector<GeoCoord>>& rings) {
    BoundingBox box{90.0, -90.0, 180.0, -180.0};
    for (const auto& ring : rings) {
        for (const GeoCoord& v : ring) {
            box.min_lat = std::min(box.min_lat, v.lat_deg());
            box.max_lat = std::max(box.max_lat, v.lat_deg());
            box.min_lon = std::min(box.min_lon, v.lon_deg());
            box.max_lon = std::max(box.max_lon, v.lon_deg());
        }
    }
    return box;
}

std::string format_coord_4dp(double value) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4f", value);
    return buf;
}

// Nearest point on the 1e-4 degree grid; +0.0 clears a negative zero.
double quantize_4dp(double value) {
    return std::round(value * 10000.0) / 10000.0 + 0.0;
}

}  // namespace

const char* to_string(AdminLevel level) {
    switch (level) {
        case AdminLevel::country: return "country";
        case AdminLevel::region: return "region";
        case AdminLevel::city: return "city";
    }
    return "unknown";
}

std::optional<AdminLevel> admin_level_from_string(std::string_view text) {
    if (text == "country") return AdminLevel::country;
    if (text == "region") return AdminLevel::region;
    if (text == "city") return AdminLevel::city;
    return std::nullopt;
}

bool point_in_region(const GeoCoord& p, const AdminRegion& region) {
    for (const auto& ring : region.rings) {
        for (std::size_t i = 0; i + 1 < ring.size(); ++i) {
            if (on_segment(p, ring[i], ring[i + 1])) {
                return true;
            }
        }
    }
    const double px = p.lon_deg();
    const double py = p.lat_deg();
    bool inside = false;
    for (const auto& ring : region.rings) {
        for (std::size_t i = 0; i + 1 < ring.size(); ++i) {
            const double ax = ring[i].lon_deg(), ay = ring[i].lat_deg();
            const double bx = ring[i + 1].lon_deg(), by = ring[i + 1].lat_deg();
            if ((ay > py) != (by > py) && px < (bx - ax) * (py - ay) / (by - ay) + ax) {
                inside = !inside;
            }
        }
    }
    return inside;
}

BoundaryIndex::BoundaryIndex(std::vector<AdminRegion> regions, std::size_t skipped_features)
    : regions_(std::move(regions)), skipped_features_(skipped_features) {
    for (std::size_t i = 0; i < regions_.size(); ++i) {
        by_level_[static_cast<std::size_t>(regions_[i].level)].push_back(i);
    }
    for (auto& level_indices : by_level_) {
        std::sort(level_indices.begin(), level_indices.end(), [this](std::size_t a, std::size_t b) {
            return regions_[a].name < regions_[b].name;
        });
    }
}

std::optional<std::string> BoundaryIndex::resolve_level(const GeoCoord& p, AdminLevel level) const {
    for (std::size_t idx : by_level_[static_cast<std::size_t>(level)]) {
        const AdminRegion& region = regions_[idx];
        if (!region.bbox.contains(p)) {
            continue;
        }
        if (point_in_region(p, region)) {
            return region.name;
        }
    }
    return std::nullopt;
}

BoundaryIndex load_boundaries_json_text(std::string_view geojson_text) {
    json doc = json::parse(geojson_text, nullptr, /*allow_exceptions=*/false);
    if (doc.is_discarded() || !doc.is_object()) {
        throw std::runtime_error("boundary db: not a JSON object");
    }
    const auto features_it = doc.find("features");
    if (features_it == doc.end() || !features_it->is_array()) {
        throw std::runtime_error("boundary db: missing \"features\" array");
    }

    std::vector<AdminRegion> regions;
    std::size_t skipped = 0;
    for (const json& feature : *features_it) {
        if (!feature.is_object()) {
            ++skipped;
            continue;
        }
        const auto props_it = feature.find("properties");
        const auto geom_it = feature.find("geometry");
        if (props_it == feature.end() || !props_it->is_object() || geom_it == feature.end() ||
            !geom_it->is_object()) {
            ++skipped;
            continue;
        }
        const json& props = *props_it;
        if (!props.contains("level") || !props["level"].is_string() || !props.contains("name") ||
            !props["name"].is_string()) {
            ++skipped;
            continue;
        }
        const auto level = admin_level_from_string(props["level"].get<std::string>());
        if (!level) {
            ++skipped;
            continue;
        }
        AdminRegion region;
        region.level = *level;
        region.name = props["name"].get<std::string>();
        if (props.contains("parent") && props["parent"].is_string()) {
            region.parent_name = props["parent"].get<std::string>();
        }
        if (!parse_polygon_rings(*geom_it, region.rings)) {
            ++skipped;
            continue;
        }
        region.bbox = compute_bbox(region.rings);
        regions.push_back(std::move(region));
    }
    return BoundaryIndex(std::move(regions), skipped);
}

BoundaryIndex load_boundaries_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("boundary db: cannot open " + path);
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return load_boundaries_json_text(buffer.str());
}

RegionChain reverse_geocode(const GeoCoord& p, const BoundaryIndex& db) {
    RegionChain chain{std::nullopt, std::nullopt, std::nullopt, p};
    chain.country = db.resolve_level(p, AdminLevel::country);
    if (!chain.country) {
        return chain;  // unresolved: ocean or uncovered area
    }
    chain.region = db.resolve_level(p, AdminLevel::region);
    if (chain.region) {
        chain.city = db.resolve_level(p, AdminLevel::city);
    }
    return chain;
}

const char* const kCorPromptText =
    "Identify where this photo was taken. Reason from coarse to fine: name the country, "
    "then the region, then the city, citing the visible evidence for each step. Finish "
    "with exactly one line of the form Coordinates: (latitude, longitude) in decimal "
    "degrees.";

CoRSample render_cor_sample(const std::string& image_ref, const RegionChain& chain,
                            const GeoCoord& target) {
    if (!chain.resolved()) {
        throw std::invalid_argument("render_cor_sample: unresolved chain");
    }
    const double lat_q = quantize_4dp(target.lat_deg());
    const double lon_q = quantize_4dp(target.lon_deg());
    const GeoCoord quantized = *make_coord(lat_q, lon_q);

    std::string response;
    response += "Country: " + *chain.country + "\n";
    response += "Region: " + chain.region.value_or("unknown") + "\n";
    response += "City: " + chain.city.value_or("unknown") + "\n";
    response += "Coordinates: (" + format_coord_4dp(lat_q) + ", " + format_coord_4dp(lon_q) + ")";

    const ParseOutcome check = parse_strict(response);
    if (check.status != ParseStatus::valid) {
        throw std::invalid_argument(std::string("render_cor_sample: response not parsable (") +
                                    to_string(check.status) + ")");
    }

    CoRSample sample{image_ref, chain, quantized, kCorPromptText, std::move(response)};
    return sample;
}

std::string cor_sample_jsonl(const CoRSample& sample) {
    json line;
    line["image_ref"] = sample.image_ref;
    line["country"] = sample.chain.country ? json(*sample.chain.country) : json(nullptr);
    line["region"] = sample.chain.region ? json(*sample.chain.region) : json(nullptr);
    line["city"] = sample.chain.city ? json(*sample.chain.city) : json(nullptr);
    line["lat"] = sample.target.lat_deg();
    line["lon"] = sample.target.lon_deg();
    line["prompt"] = sample.prompt_text;
    line["response"] = sample.response_text;
    return line.dump();
}

SynthStats synthesize_dataset(std::istream& records_jsonl, const BoundaryIndex& db,
                              std::ostream& samples_out, std::ostream& skip_log_out) {
    SynthStats stats;
    std::string line;
    std::size_t line_no = 0;

    const auto skip = [&](const std::string& image_ref, const std::string& reason) {
        json entry;
        entry["image_ref"] = image_ref;
        entry["line"] = line_no;
        entry["reason"] = reason;
        skip_log_out << entry.dump() << "\n";
        ++stats.skipped;
    };

    while (std::getline(records_jsonl, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) {
            continue;
        }
        json record = json::parse(line, nullptr, /*allow_exceptions=*/false);
        if (record.is_discarded() || !record.is_object()) {
            skip("", "invalid_json");
            continue;
        }
        if (!record.contains("image_ref") || !record["image_ref"].is_string() ||
            !record.contains("lat") || !record["lat"].is_number() || !record.contains("lon") ||
            !record["lon"].is_number()) {
            skip("", "missing_or_invalid_fields");
            continue;
        }
        const std::string image_ref = record["image_ref"].get<std::string>();
        const auto coord = make_coord(record["lat"].get<double>(), record["lon"].get<double>());
        if (!coord) {
            skip(image_ref, std::string("invalid_coordinate:") +
                                to_string(validate_coord(record["lat"].get<double>(),
                                                         record["lon"].get<double>())));
            continue;
        }
        const RegionChain chain = reverse_geocode(*coord, db);
        if (!chain.resolved()) {
            skip(image_ref, "unresolved");
            continue;
        }
        try {
            const CoRSample sample = render_cor_sample(image_ref, chain, *coord);
            samples_out << cor_sample_jsonl(sample) << "\n";
            ++stats.emitted;
        } catch (const std::invalid_argument& e) {
            skip(image_ref, std::string("render_failed:") + e.what());
        }
    }
    return stats;
}

}  // namespace geor
