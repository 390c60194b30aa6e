#include "geor/coord_parser.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <limits>

namespace geor {
namespace {

bool is_space(char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

bool is_digit(char c) {
    return c >= '0' && c <= '9';
}

std::size_t skip_ws(std::string_view text, std::size_t pos) {
    while (pos < text.size() && is_space(text[pos])) {
        ++pos;
    }
    return pos;
}

// Matches an optional sign, 1+ digits, optional "." with 1+ digits.
// On success advances pos past the literal and stores its value; digit
// overflow yields +/-infinity so the caller can still count the match.
bool match_signed_decimal(std::string_view text, std::size_t& pos, double& value) {
    std::size_t p = pos;
    bool negative = false;
    if (p < text.size() && (text[p] == '+' || text[p] == '-')) {
        negative = text[p] == '-';
        ++p;
    }
    const std::size_t digits_begin = p;
    while (p < text.size() && is_digit(text[p])) {
        ++p;
    }
    if (p == digits_begin) {
        return false;
    }
    if (p < text.size() && text[p] == '.') {
        const std::size_t frac_begin = p + 1;
        std::size_t q = frac_begin;
        while (q < text.size() && is_digit(text[q])) {
            ++q;
        }
        if (q == frac_begin) {
            return false;  // "12." with no fraction digits
        }
        p = q;
    }

    // from_chars never accepts exponents in fixed format, matching the grammar.
    double parsed = 0.0;
    const char* first = text.data() + digits_begin;
    const char* last = text.data() + p;
    const auto result = std::from_chars(first, last, parsed, std::chars_format::fixed);
    if (result.ec == std::errc::result_out_of_range) {
        parsed = std::numeric_limits<double>::infinity();
    } else if (result.ec != std::errc() || result.ptr != last) {
        return false;
    }

    value = negative ? -parsed : parsed;
    pos = p;
    return true;
}

// Attempts the full pair grammar at an opening parenthesis.
bool match_pair(std::string_view text, std::size_t open, RawCandidate& out) {
    std::size_t pos = open + 1;
    pos = skip_ws(text, pos);
    double lat = 0.0;
    if (!match_signed_decimal(text, pos, lat)) {
        return false;
    }
    pos = skip_ws(text, pos);
    if (pos >= text.size() || text[pos] != ',') {
        return false;
    }
    pos = skip_ws(text, pos + 1);
    double lon = 0.0;
    if (!match_signed_decimal(text, pos, lon)) {
        return false;
    }
    pos = skip_ws(text, pos);
    if (pos >= text.size() || text[pos] != ')') {
        return false;
    }
    out.lat = lat;
    out.lon = lon;
    out.span = SourceSpan{open, pos + 1};
    return true;
}

}  // namespace

const char* to_string(ParseStatus status) {
    switch (status) {
        case ParseStatus::valid: return "valid";
        case ParseStatus::no_pair_found: return "no_pair_found";
        case ParseStatus::multiple_pairs: return "multiple_pairs";
        case ParseStatus::out_of_range: return "out_of_range";
        case ParseStatus::malformed: return "malformed";
    }
    return "unknown";
}

std::vector<RawCandidate> extract_candidates(std::string_view text) {
    std::vector<RawCandidate> candidates;
    std::size_t pos = 0;
    while (pos < text.size()) {
        if (text[pos] != '(') {
            ++pos;
            continue;
        }
        RawCandidate candidate;
        if (match_pair(text, pos, candidate)) {
            pos = candidate.span.end;
            candidates.push_back(candidate);
        } else {
            ++pos;
        }
    }
    return candidates;
}

ParseOutcome parse_strict(std::string_view text) {
    const auto candidates = extract_candidates(text);

    ParseOutcome outcome;
    outcome.candidate_count = candidates.size();
    if (candidates.empty()) {
        outcome.status = ParseStatus::no_pair_found;
        return outcome;
    }
    if (candidates.size() > 1) {
        outcome.status = ParseStatus::multiple_pairs;
        return outcome;
    }

    const RawCandidate& only = candidates.front();
    switch (validate_coord(only.lat, only.lon)) {
        case CoordError::none:
            outcome.status = ParseStatus::valid;
            outcome.parsed = ParsedCoordinate{*make_coord(only.lat, only.lon), only.span};
            break;
        case CoordError::non_finite:
            outcome.status = ParseStatus::malformed;
            break;
        case CoordError::lat_out_of_range:
        case CoordError::lon_out_of_range:
            outcome.status = ParseStatus::out_of_range;
            break;
    }
    return outcome;
}

}  // namespace geor
