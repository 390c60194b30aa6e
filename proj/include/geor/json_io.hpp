#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"

#include "geor/coord_parser.hpp"
#include "geor/eval.hpp"
#include "geor/policy_sim.hpp"
#include "geor/reward.hpp"

namespace geor {

// RewardBreakdown as served over the wire; distance fields appear only
// when the format check passed.
nlohmann::json breakdown_to_json(const RewardBreakdown& breakdown);

nlohmann::json parse_outcome_to_json(const ParseOutcome& outcome);

nlohmann::json report_to_json(const LabeledReport& labeled);

// One trace line per iteration, stable key order.
std::string trace_jsonl_line(const IterationStats& stats);

/**
 * Prediction JSONL: {"id", "lat", "lon"} for the truth plus either
 * "predicted_text" or "pred_lat"/"pred_lon". Lines that do not fit the
 * schema are reported in errors ("line N: reason") and skipped.
 */
std::vector<PredictionRecord> load_prediction_jsonl(std::istream& in,
                                                    std::vector<std::string>& errors);

// Simulator queries: {"lat", "lon", "tag": "easy"|"hard"}.
std::vector<SimQuery> load_sim_queries(std::istream& in, std::vector<std::string>& errors);

}  // namespace geor
