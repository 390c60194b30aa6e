#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "geor/coord_parser.hpp"
#include "geor/geodesy.hpp"

namespace geor {

// Standard geolocalization accuracy bands, km, ascending.
inline constexpr std::array<double, 5> kThresholdsKm{1.0, 25.0, 200.0, 750.0, 2500.0};

/**
 * One prediction to score. Either the raw model text (parsed with the
 * strict grammar) or a direct coordinate; when both are set the
 * coordinate wins and parsing is skipped.
 */
struct PredictionRecord {
    std::string id;
    std::optional<std::string> predicted_text;
    std::optional<GeoCoord> predicted_coord;
    GeoCoord truth;
};

// How a single record scored; feeds both the report and transcripts.
struct ScoredPrediction {
    bool parsable = false;
    std::optional<double> distance_km;
    ParseStatus parse_status = ParseStatus::no_pair_found;
};

ScoredPrediction score_prediction(const PredictionRecord& record);

struct EvalReport {
    std::array<double, 5> fractions{};  // aligned with kThresholdsKm
    std::size_t n_total = 0;
    std::size_t n_unparsable = 0;
};

/**
 * Fraction of records whose geodesic error is within each threshold
 * (boundary inclusive). Unparsable predictions stay in the denominator
 * and count as misses everywhere. Throws on an empty record list.
 */
EvalReport threshold_accuracy(std::span<const PredictionRecord> records);

struct LabeledReport {
    std::string label;
    EvalReport report;
};

// Markdown table, one row per run, percentages at 2 decimals.
std::string render_markdown(std::span<const LabeledReport> rows);

// CSV with a header row, same columns and formatting as the markdown.
std::string render_csv(std::span<const LabeledReport> rows);

std::string format_percent(double fraction);  // e.g. 0.181 -> "18.10"

}  // namespace geor
