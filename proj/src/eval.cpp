#include "geor/eval.hpp"

#include <cstdio>
#include <stdexcept>
#include <unordered_set>

namespace geor {

ScoredPrediction score_prediction(const PredictionRecord& record) {
    ScoredPrediction scored;
    if (record.predicted_coord) {
        scored.parsable = true;
        scored.parse_status = ParseStatus::valid;
        scored.distance_km = haversine_km(*record.predicted_coord, record.truth);
        return scored;
    }
    if (!record.predicted_text) {
        return scored;  // nothing to parse: unparsable miss
    }
    const ParseOutcome outcome = parse_strict(*record.predicted_text);
    scored.parse_status = outcome.status;
    if (outcome.status != ParseStatus::valid) {
        return scored;
    }
    scored.parsable = true;
    scored.distance_km = haversine_km(outcome.parsed->coord, record.truth);
    return scored;
}

EvalReport threshold_accuracy(std::span<const PredictionRecord> records) {
    if (records.empty()) {
        throw std::invalid_argument("threshold_accuracy: empty record list");
    }
    std::unordered_set<std::string> seen;
    for (const PredictionRecord& record : records) {
        if (!seen.insert(record.id).second) {
            throw std::invalid_argument("threshold_accuracy: duplicate record id " + record.id);
        }
    }

    EvalReport report;
    report.n_total = records.size();
    std::array<std::size_t, 5> hits{};
    for (const PredictionRecord& record : records) {
        const ScoredPrediction scored = score_prediction(record);
        if (!scored.parsable) {
            ++report.n_unparsable;
            continue;
        }
        for (std::size_t t = 0; t < kThresholdsKm.size(); ++t) {
            if (*scored.distance_km <= kThresholdsKm[t]) {
                ++hits[t];
            }
        }
    }
    for (std::size_t t = 0; t < kThresholdsKm.size(); ++t) {
        report.fractions[t] = static_cast<double>(hits[t]) / static_cast<double>(report.n_total);
    }
    return report;
}

std::string format_percent(double fraction) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", fraction * 100.0);
    return buf;
}

std::string render_markdown(std::span<const LabeledReport> rows) {
    std::string out = "| run | 1km | 25km | 200km | 750km | 2500km |\n"
                      "|---|---|---|---|---|---|\n";
    for (const LabeledReport& row : rows) {
        out += "| " + row.label;
        for (double fraction : row.report.fractions) {
            out += " | " + format_percent(fraction);
        }
        out += " |\n";
    }
    return out;
}

std::string render_csv(std::span<const LabeledReport> rows) {
    std::string out = "label,1km,25km,200km,750km,2500km\n";
    for (const LabeledReport& row : rows) {
        out += row.label;
        for (double fraction : row.report.fractions) {
            out += "," + format_percent(fraction);
        }
        out += "\n";
    }
    return out;
}

}  // namespace geor
