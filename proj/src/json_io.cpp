#include "geor/json_io.hpp"

#include <functional>
#include <istream>

namespace geor {

using nlohmann::json;

nlohmann::json breakdown_to_json(const RewardBreakdown& breakdown) {
    json out;
    out["r_total"] = breakdown.r_total;
    out["r_format"] = breakdown.r_format;
    out["parse_status"] = to_string(breakdown.parse_status);
    if (breakdown.r_distance) {
        out["r_distance"] = *breakdown.r_distance;
    }
    if (breakdown.distance_km) {
        out["distance_km"] = *breakdown.distance_km;
    }
    return out;
}

nlohmann::json parse_outcome_to_json(const ParseOutcome& outcome) {
    json out;
    out["status"] = to_string(outcome.status);
    out["candidate_count"] = outcome.candidate_count;
    if (outcome.parsed) {
        out["lat"] = outcome.parsed->coord.lat_deg();
        out["lon"] = outcome.parsed->coord.lon_deg();
        out["span"] = json::array({outcome.parsed->source_span.begin,
                                   outcome.parsed->source_span.end});
    }
    return out;
}

nlohmann::json report_to_json(const LabeledReport& labeled) {
    json out;
    out["label"] = labeled.label;
    out["thresholds_km"] = kThresholdsKm;
    out["fractions"] = labeled.report.fractions;
    out["n_total"] = labeled.report.n_total;
    out["n_unparsable"] = labeled.report.n_unparsable;
    return out;
}

std::string trace_jsonl_line(const IterationStats& stats) {
    json out;
    out["iteration"] = stats.iteration;
    out["mean_reward"] = stats.mean_reward;
    out["vanishing_rate"] = stats.vanishing_rate;
    out["mean_group_variance"] = stats.mean_group_variance;
    return out.dump();
}

namespace {

bool get_number(const json& obj, const char* key, double& out) {
    const auto it = obj.find(key);
    if (it == obj.end() || !it->is_number()) {
        return false;
    }
    out = it->get<double>();
    return true;
}

void for_each_jsonl(std::istream& in, std::vector<std::string>& errors,
                    const std::function<bool(const json&, std::string&)>& consume) {
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) {
            continue;
        }
        const json obj = json::parse(line, nullptr, /*allow_exceptions=*/false);
        if (obj.is_discarded() || !obj.is_object()) {
            errors.push_back("line " + std::to_string(line_no) + ": invalid JSON");
            continue;
        }
        std::string reason;
        if (!consume(obj, reason)) {
            errors.push_back("line " + std::to_string(line_no) + ": " + reason);
        }
    }
}

}  // namespace

std::vector<PredictionRecord> load_prediction_jsonl(std::istream& in,
                                                    std::vector<std::string>& errors) {
    std::vector<PredictionRecord> records;
    for_each_jsonl(in, errors, [&](const json& obj, std::string& reason) {
        double lat = 0.0, lon = 0.0;
        if (!obj.contains("id") || !obj["id"].is_string()) {
            reason = "missing id";
            return false;
        }
        if (!get_number(obj, "lat", lat) || !get_number(obj, "lon", lon)) {
            reason = "missing truth lat/lon";
            return false;
        }
        const auto truth = make_coord(lat, lon);
        if (!truth) {
            reason = std::string("invalid truth coordinate: ") + to_string(validate_coord(lat, lon));
            return false;
        }
        PredictionRecord record{obj["id"].get<std::string>(), std::nullopt, std::nullopt, *truth};
        double pred_lat = 0.0, pred_lon = 0.0;
        if (get_number(obj, "pred_lat", pred_lat) && get_number(obj, "pred_lon", pred_lon)) {
            const auto coord = make_coord(pred_lat, pred_lon);
            if (!coord) {
                reason = "invalid predicted coordinate";
                return false;
            }
            record.predicted_coord = coord;
        } else if (obj.contains("predicted_text") && obj["predicted_text"].is_string()) {
            record.predicted_text = obj["predicted_text"].get<std::string>();
        }
        // Neither prediction field present: legal, scores as an
        // unparsable miss.
        records.push_back(std::move(record));
        return true;
    });
    return records;
}

std::vector<SimQuery> load_sim_queries(std::istream& in, std::vector<std::string>& errors) {
    std::vector<SimQuery> queries;
    for_each_jsonl(in, errors, [&](const json& obj, std::string& reason) {
        double lat = 0.0, lon = 0.0;
        if (!get_number(obj, "lat", lat) || !get_number(obj, "lon", lon)) {
            reason = "missing lat/lon";
            return false;
        }
        const auto truth = make_coord(lat, lon);
        if (!truth) {
            reason = std::string("invalid coordinate: ") + to_string(validate_coord(lat, lon));
            return false;
        }
        if (!obj.contains("tag") || !obj["tag"].is_string()) {
            reason = "missing tag";
            return false;
        }
        const std::string tag = obj["tag"].get<std::string>();
        if (tag != "easy" && tag != "hard") {
            reason = "tag must be \"easy\" or \"hard\"";
            return false;
        }
        queries.push_back(SimQuery{*truth, tag == "easy" ? QueryTag::easy : QueryTag::hard});
        return true;
    });
    return queries;
}

}  // namespace geor
