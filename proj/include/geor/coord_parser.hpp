#pragma once

#include <cstddef>
#include <optional>
#include <string_view>
#include <vector>

#include "geor/geodesy.hpp"

namespace geor {

// Character range [begin, end) of a matched coordinate pair in the input.
struct SourceSpan {
    std::size_t begin = 0;
    std::size_t end = 0;

    friend bool operator==(const SourceSpan&, const SourceSpan&) = default;
};

// A substring that matched the coordinate grammar, before range validation.
// Values may be non-finite when the matched digits overflow a double.
struct RawCandidate {
    double lat = 0.0;
    double lon = 0.0;
    SourceSpan span;
};

enum class ParseStatus {
    valid,
    no_pair_found,
    multiple_pairs,
    out_of_range,
    malformed,
};

const char* to_string(ParseStatus status);

struct ParsedCoordinate {
    GeoCoord coord;
    SourceSpan source_span;
};

struct ParseOutcome {
    ParseStatus status = ParseStatus::no_pair_found;
    std::optional<ParsedCoordinate> parsed;
    std::size_t candidate_count = 0;
};

/**
 * Scans text left to right for every non-overlapping substring matching
 *
 *   "(" ws* signed-decimal ws* "," ws* signed-decimal ws* ")"
 *
 * where signed-decimal is an optional sign, one or more digits, and an
 * optional "." followed by one or more digits. Scientific notation,
 * degree symbols, and hemisphere suffixes do not match. Matching is
 * leftmost-longest; digits are consumed greedily.
 */
std::vector<RawCandidate> extract_candidates(std::string_view text);

/**
 * Strict single-pair extraction.
 *
 * valid            exactly one candidate, in coordinate range
 * no_pair_found    zero candidates
 * multiple_pairs   two or more candidates
 * out_of_range     one candidate, finite but outside lat/lon bounds
 * malformed        one candidate whose digits do not fit a finite double
 *
 * Never throws; every input maps to exactly one status.
 */
ParseOutcome parse_strict(std::string_view text);

}  // namespace geor
