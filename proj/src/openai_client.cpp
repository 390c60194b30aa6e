#include "geor/openai_client.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <istream>
#include <stdexcept>
#include <thread>

#include "httplib.h"
#include "json.hpp"

namespace geor {
namespace {

using nlohmann::json;

std::chrono::milliseconds to_ms(double seconds) {
    return std::chrono::milliseconds(static_cast<long long>(seconds * 1000.0));
}

json build_chat_body(const EndpointConfig& config, const std::string& prompt,
                     const std::string& image_ref) {
    json message;
    message["role"] = "user";
    if (image_ref.empty()) {
        message["content"] = prompt;
    } else {
        json text_part;
        text_part["type"] = "text";
        text_part["text"] = prompt;
        json image_part;
        image_part["type"] = "image_url";
        image_part["image_url"]["url"] = image_ref;
        message["content"] = json::array({text_part, image_part});
    }
    json body;
    body["model"] = config.model_name;
    body["messages"] = json::array({message});
    return body;
}

httplib::Client make_client(const EndpointConfig& config) {
    httplib::Client client(config.base_url);
    client.set_connection_timeout(to_ms(config.timeout_s));
    client.set_read_timeout(to_ms(config.timeout_s));
    client.set_write_timeout(to_ms(config.timeout_s));
    if (!config.api_key.empty()) {
        client.set_bearer_token_auth(config.api_key);
    }
    return client;
}

bool retryable_status(int status) {
    return status == 429 || status >= 500;
}

ChatResult chat_with_retries(httplib::Client& client, const EndpointConfig& config,
                             const json& body);

ChatResult chat_once(httplib::Client& client, const json& body) {
    ChatResult result;
    const auto res = client.Post("/v1/chat/completions", body.dump(), "application/json");
    if (!res) {
        result.error = "connection error: " + httplib::to_string(res.error());
        return result;
    }
    result.http_status = res->status;
    if (res->status != 200) {
        result.error = "http status " + std::to_string(res->status);
        return result;
    }
    const json reply = json::parse(res->body, nullptr, /*allow_exceptions=*/false);
    if (reply.is_discarded() || !reply.contains("choices") || !reply["choices"].is_array() ||
        reply["choices"].empty()) {
        result.error = "malformed completion response";
        return result;
    }
    const json& first = reply["choices"][0];
    if (!first.contains("message") || !first["message"].contains("content") ||
        !first["message"]["content"].is_string()) {
        result.error = "completion missing message content";
        return result;
    }
    result.ok = true;
    result.text = first["message"]["content"].get<std::string>();
    return result;
}

ChatResult chat_with_retries(httplib::Client& client, const EndpointConfig& config,
                             const json& body) {
    ChatResult result;
    double backoff_s = config.initial_backoff_s;
    const int attempts = 1 + std::max(0, config.max_retries);
    for (int attempt = 0; attempt < attempts; ++attempt) {
        if (attempt > 0) {
            std::this_thread::sleep_for(to_ms(backoff_s));
            backoff_s *= 2.0;
        }
        result = chat_once(client, body);
        if (result.ok) {
            return result;
        }
        const bool connection_error = result.http_status == 0;
        if (!connection_error && !retryable_status(result.http_status)) {
            return result;  // 4xx other than 429: retrying will not help
        }
    }
    return result;
}

}  // namespace

EndpointConfig apply_endpoint_env(EndpointConfig config) {
    if (config.base_url.empty()) {
        if (const char* url = std::getenv("GEOR_ENDPOINT_URL")) {
            config.base_url = url;
        }
    }
    if (config.api_key.empty()) {
        if (const char* key = std::getenv("GEOR_API_KEY")) {
            config.api_key = key;
        }
    }
    return config;
}

ChatResult chat_complete(const EndpointConfig& config, const std::string& prompt,
                         const std::string& image_ref) {
    httplib::Client client = make_client(config);
    return chat_with_retries(client, config, build_chat_body(config, prompt, image_ref));
}

bool endpoint_reachable(const EndpointConfig& config) {
    httplib::Client client = make_client(config);
    const auto res = client.Get("/v1/models");
    return static_cast<bool>(res);  // any HTTP answer counts as reachable
}

const char* const kDefaultEvalPrompt =
    "Where was this photo taken? Think step by step about the country, region, and city, "
    "then answer with exactly one coordinate pair formatted as (latitude, longitude) in "
    "decimal degrees.";

std::string fnv1a_hex(std::string_view text) {
    std::uint64_t hash = 1469598103934665603ull;
    for (unsigned char c : text) {
        hash ^= c;
        hash *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(hash));
    return buf;
}

EndpointRunResult evaluate_endpoint_run(std::span<const EndpointSample> samples,
                                        const EndpointConfig& config, const RunOptions& options) {
    if (samples.empty()) {
        throw std::invalid_argument("evaluate_endpoint_run: empty sample list");
    }
    if (!endpoint_reachable(config)) {
        throw std::runtime_error("model endpoint unreachable at " + config.base_url);
    }
    const std::string prompt_template =
        options.prompt_template.empty() ? kDefaultEvalPrompt : options.prompt_template;

    std::vector<TranscriptEntry> transcript(samples.size());
    std::vector<PredictionRecord> records;
    records.reserve(samples.size());
    for (const EndpointSample& sample : samples) {
        records.push_back(PredictionRecord{sample.id, std::nullopt, std::nullopt, sample.truth});
    }

    std::atomic<std::size_t> next{0};
    const std::size_t workers = std::max<std::size_t>(1, std::min(options.concurrency, samples.size()));
    const auto worker = [&]() {
        httplib::Client client = make_client(config);
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= samples.size()) {
                return;
            }
            const EndpointSample& sample = samples[i];
            const std::string prompt = sample.prompt.empty() ? prompt_template : sample.prompt;
            const ChatResult chat =
                chat_with_retries(client, config, build_chat_body(config, prompt, sample.image_ref));

            TranscriptEntry& entry = transcript[i];
            entry.id = sample.id;
            entry.prompt_digest = fnv1a_hex(prompt);
            if (!chat.ok) {
                entry.parse_status = "request_failed";
                continue;
            }
            entry.raw_response = chat.text;
            records[i].predicted_text = chat.text;

            const ScoredPrediction scored =
                score_prediction(PredictionRecord{sample.id, chat.text, std::nullopt, sample.truth});
            entry.parse_status = to_string(scored.parse_status);
            entry.distance_km = scored.distance_km;
            if (scored.distance_km) {
                for (std::size_t t = 0; t < kThresholdsKm.size(); ++t) {
                    entry.within[t] = *scored.distance_km <= kThresholdsKm[t];
                }
            }
        }
    };

    std::vector<std::thread> threads;
    threads.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        threads.emplace_back(worker);
    }
    for (std::thread& t : threads) {
        t.join();
    }

    EndpointRunResult result;
    result.report = threshold_accuracy(records);
    result.transcript = std::move(transcript);
    return result;
}

std::vector<EndpointSample> load_endpoint_samples(std::istream& in,
                                                  std::vector<std::string>& errors) {
    std::vector<EndpointSample> samples;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) {
            continue;
        }
        const json obj = json::parse(line, nullptr, /*allow_exceptions=*/false);
        const auto fail = [&](const std::string& reason) {
            errors.push_back("line " + std::to_string(line_no) + ": " + reason);
        };
        if (obj.is_discarded() || !obj.is_object()) {
            fail("invalid JSON");
            continue;
        }
        if (!obj.contains("id") || !obj["id"].is_string() || !obj.contains("lat") ||
            !obj["lat"].is_number() || !obj.contains("lon") || !obj["lon"].is_number()) {
            fail("missing id/lat/lon");
            continue;
        }
        const auto truth = make_coord(obj["lat"].get<double>(), obj["lon"].get<double>());
        if (!truth) {
            fail("invalid truth coordinate");
            continue;
        }
        EndpointSample sample{obj["id"].get<std::string>(), *truth, {}, {}};
        if (obj.contains("image_ref") && obj["image_ref"].is_string()) {
            sample.image_ref = obj["image_ref"].get<std::string>();
        }
        if (obj.contains("prompt") && obj["prompt"].is_string()) {
            sample.prompt = obj["prompt"].get<std::string>();
        }
        samples.push_back(std::move(sample));
    }
    return samples;
}

std::string transcript_jsonl_line(const TranscriptEntry& entry) {
    json out;
    out["id"] = entry.id;
    out["prompt_digest"] = entry.prompt_digest;
    out["raw_response"] = entry.raw_response;
    out["parse_status"] = entry.parse_status;
    if (entry.distance_km) {
        out["distance_km"] = *entry.distance_km;
    }
    out["within"] = entry.within;
    return out.dump();
}

}  // namespace geor
