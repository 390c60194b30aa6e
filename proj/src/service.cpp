#include "geor/service.hpp"

#include "httplib.h"
#include "json.hpp"

#include "geor/json_io.hpp"
#include "geor/reward.hpp"
#include "geor/version.hpp"

namespace geor {
namespace {

using nlohmann::json;

void reply_error(httplib::Response& res, int status, const std::string& message) {
    json body;
    body["error"] = message;
    res.status = status;
    res.set_content(body.dump(), "application/json");
}

// Scores one request object; inline error strings instead of exceptions
// so batch elements can fail independently.
json score_request(const json& request, std::string& error) {
    if (!request.is_object()) {
        error = "request must be a JSON object";
        return {};
    }
    if (!request.contains("prediction_text") || !request["prediction_text"].is_string()) {
        error = "missing or non-string prediction_text";
        return {};
    }
    if (!request.contains("truth_lat") || !request["truth_lat"].is_number() ||
        !request.contains("truth_lon") || !request["truth_lon"].is_number()) {
        error = "missing or non-numeric truth_lat/truth_lon";
        return {};
    }
    const double lat = request["truth_lat"].get<double>();
    const double lon = request["truth_lon"].get<double>();
    const auto truth = make_coord(lat, lon);
    if (!truth) {
        error = std::string("invalid truth coordinate: ") + to_string(validate_coord(lat, lon));
        return {};
    }
    return breakdown_to_json(composite_reward(request["prediction_text"].get<std::string>(), *truth));
}

}  // namespace

void register_reward_routes(httplib::Server& server) {
    server.Get("/healthz", [](const httplib::Request&, httplib::Response& res) {
        json body;
        body["status"] = "ok";
        body["version"] = kVersion;
        res.set_content(body.dump(), "application/json");
    });

    server.Post("/v1/reward", [](const httplib::Request& req, httplib::Response& res) {
        if (req.body.size() > kSingleRewardBodyLimit) {
            reply_error(res, 413, "body exceeds 1 MiB");
            return;
        }
        const json request = json::parse(req.body, nullptr, /*allow_exceptions=*/false);
        if (request.is_discarded()) {
            reply_error(res, 400, "malformed JSON body");
            return;
        }
        std::string error;
        const json breakdown = score_request(request, error);
        if (!error.empty()) {
            reply_error(res, 400, error);
            return;
        }
        res.set_content(breakdown.dump(), "application/json");
    });

    server.Post("/v1/reward/batch", [](const httplib::Request& req, httplib::Response& res) {
        const json requests = json::parse(req.body, nullptr, /*allow_exceptions=*/false);
        if (requests.is_discarded() || !requests.is_array()) {
            reply_error(res, 400, "body must be a JSON array of reward requests");
            return;
        }
        if (requests.size() > kBatchRewardLimit) {
            reply_error(res, 413, "batch exceeds 10000 requests");
            return;
        }
        json results = json::array();
        for (const json& request : requests) {
            std::string error;
            json breakdown = score_request(request, error);
            if (!error.empty()) {
                json inline_error;
                inline_error["error"] = error;
                results.push_back(std::move(inline_error));
            } else {
                results.push_back(std::move(breakdown));
            }
        }
        res.set_content(results.dump(), "application/json");
    });
}

bool run_reward_service(const std::string& host, int port) {
    httplib::Server server;
    server.set_payload_max_length(64 * 1024 * 1024);
    register_reward_routes(server);
    return server.listen(host, port);
}

}  // namespace geor
