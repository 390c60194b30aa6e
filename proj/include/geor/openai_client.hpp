#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "geor/eval.hpp"
#include "geor/geodesy.hpp"

namespace geor {

/**
 * Connection settings for an OpenAI-compatible chat-completions server.
 * The API key is read from GEOR_API_KEY (and the URL from
 * GEOR_ENDPOINT_URL) unless set explicitly; it is sent only in the
 * Authorization header and never written to logs or transcripts.
 */
struct EndpointConfig {
    std::string base_url;  // e.g. http://127.0.0.1:8000
    std::string model_name;
    std::string api_key;
    double timeout_s = 30.0;
    int max_retries = 3;
    double initial_backoff_s = 0.25;  // doubles per retry
};

// Fills base_url/api_key from the environment when they are empty.
EndpointConfig apply_endpoint_env(EndpointConfig config);

struct ChatResult {
    bool ok = false;
    std::string text;
    std::string error;
    int http_status = 0;
};

/**
 * One chat-completion round trip with retries (exponential backoff on
 * connection errors, 429 and 5xx). When image_ref is non-empty the
 * message carries an image_url content part alongside the text.
 */
ChatResult chat_complete(const EndpointConfig& config, const std::string& prompt,
                         const std::string& image_ref = {});

// True when the endpoint answers HTTP at all (any status counts).
bool endpoint_reachable(const EndpointConfig& config);

struct EndpointSample {
    std::string id;
    GeoCoord truth;
    std::string image_ref;  // attached to the prompt when non-empty
    std::string prompt;     // pre-rendered; empty means use the template
};

struct TranscriptEntry {
    std::string id;
    std::string prompt_digest;  // FNV-1a 64 of the prompt, hex
    std::string raw_response;
    std::string parse_status;   // parse status name or "request_failed"
    std::optional<double> distance_km;
    std::array<bool, 5> within{};  // per-threshold hit flags
};

struct EndpointRunResult {
    EvalReport report;
    std::vector<TranscriptEntry> transcript;  // sample order
};

struct RunOptions {
    std::size_t concurrency = 4;
    std::string prompt_template;  // empty means kDefaultEvalPrompt
};

// Stock evaluation prompt; override it per run with --prompt-template.
extern const char* const kDefaultEvalPrompt;

std::string fnv1a_hex(std::string_view text);

/**
 * Queries the endpoint for every sample (up to concurrency in flight),
 * scores the responses like the offline evaluator, and merges results by
 * sample index. Requests that still fail after max_retries score as
 * unparsable misses. Throws std::runtime_error when the endpoint is
 * unreachable at startup.
 */
EndpointRunResult evaluate_endpoint_run(std::span<const EndpointSample> samples,
                                        const EndpointConfig& config, const RunOptions& options);

// Samples JSONL: {"id","lat","lon"} plus optional "image_ref"/"prompt".
std::vector<EndpointSample> load_endpoint_samples(std::istream& in,
                                                  std::vector<std::string>& errors);

std::string transcript_jsonl_line(const TranscriptEntry& entry);

}  // namespace geor
