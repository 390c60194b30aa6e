#pragma once

#include <string>

namespace httplib {
class Server;
}

namespace geor {

// Largest accepted /v1/reward body; bigger requests get 413.
inline constexpr std::size_t kSingleRewardBodyLimit = 1 << 20;

// Largest accepted /v1/reward/batch element count.
inline constexpr std::size_t kBatchRewardLimit = 10000;

/**
 * Attaches the stateless reward routes to a server:
 *
 *   POST /v1/reward        one RewardRequest -> RewardBreakdown JSON
 *   POST /v1/reward/batch  JSON array -> array, inline per-element errors
 *   GET  /healthz          {"status":"ok","version":...}
 *
 * Handlers share no mutable state; concurrent requests are independent.
 */
void register_reward_routes(httplib::Server& server);

// Blocking serve loop for the CLI; returns false when the bind fails.
bool run_reward_service(const std::string& host, int port);

}  // namespace geor
