#include "geor/policy_sim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "geor/reward.hpp"

namespace geor {
namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kLog2Pi = 1.8378770664093453;

std::string render_coordinate_text(double lat, double lon) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "(%.4f, %.4f)", lat, lon);
    return buf;
}

}  // namespace

double GaussianRng::uniform01() {
    // 53 uniform bits shifted into (0, 1); the +0.5 keeps log() finite.
    const std::uint64_t bits = engine_() >> 11;
    return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
}

double GaussianRng::gaussian() {
    const double u1 = uniform01();
    const double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
}

SampledGroup sample_candidates(const QueryPolicyParams& params, const GeoCoord& truth,
                               std::size_t group_size, GaussianRng& rng, std::string query_id) {
    if (group_size < 2) {
        throw std::invalid_argument("sample_candidates: group_size must be >= 2");
    }
    const double std_lat = std::exp(params.log_std_lat);
    const double std_lon = std::exp(params.log_std_lon);

    SampledGroup sampled;
    sampled.group.query_id = std::move(query_id);
    sampled.group.candidates.reserve(group_size);
    sampled.draws.reserve(group_size);
    for (std::size_t i = 0; i < group_size; ++i) {
        SampleDraw draw;
        draw.lat = params.mean_lat + std_lat * rng.gaussian();
        draw.lon = params.mean_lon + std_lon * rng.gaussian();
        sampled.draws.push_back(draw);

        const double lat = std::clamp(draw.lat, -90.0, 90.0);
        const double lon = wrap_lon_deg(draw.lon);
        std::string text = render_coordinate_text(lat, lon);
        const double reward = composite_reward(text, truth).r_total;
        sampled.group.candidates.push_back(Candidate{std::move(text), reward});
    }
    return sampled;
}

double gaussian_log_density(const QueryPolicyParams& params, const SampleDraw& draw) {
    const double std_lat = std::exp(params.log_std_lat);
    const double std_lon = std::exp(params.log_std_lon);
    const double z_lat = (draw.lat - params.mean_lat) / std_lat;
    const double z_lon = (draw.lon - params.mean_lon) / std_lon;
    return -kLog2Pi - params.log_std_lat - params.log_std_lon -
           0.5 * (z_lat * z_lat + z_lon * z_lon);
}

ParamGradient gaussian_log_density_gradient(const QueryPolicyParams& params,
                                            const SampleDraw& draw) {
    const double std_lat = std::exp(params.log_std_lat);
    const double std_lon = std::exp(params.log_std_lon);
    const double z_lat = (draw.lat - params.mean_lat) / std_lat;
    const double z_lon = (draw.lon - params.mean_lon) / std_lon;
    ParamGradient grad;
    grad.mean_lat = z_lat / std_lat;
    grad.mean_lon = z_lon / std_lon;
    grad.log_std_lat = z_lat * z_lat - 1.0;
    grad.log_std_lon = z_lon * z_lon - 1.0;
    return grad;
}

QueryPolicyParams score_gradient_step(const QueryPolicyParams& params, const SampledGroup& sampled,
                                      const AdvantageSet& advantages, double learning_rate) {
    const std::size_t n = sampled.group.candidates.size();
    if (advantages.advantages.size() != n || sampled.draws.size() != n) {
        throw std::invalid_argument("score_gradient_step: misaligned group and advantages");
    }
    if (advantages.degenerate) {
        return params;  // zero update, bit for bit
    }
    ParamGradient mean_grad;
    for (std::size_t i = 0; i < n; ++i) {
        const ParamGradient g = gaussian_log_density_gradient(params, sampled.draws[i]);
        const double a = advantages.advantages[i];
        mean_grad.mean_lat += a * g.mean_lat;
        mean_grad.mean_lon += a * g.mean_lon;
        mean_grad.log_std_lat += a * g.log_std_lat;
        mean_grad.log_std_lon += a * g.log_std_lon;
    }
    // Mean steps use the Fisher-preconditioned gradient (sigma^2 times the
    // score); the raw score gradient carries a 1/sigma factor that forces
    // divergence once the policy sharpens past sqrt(learning_rate).
    const double var_lat = std::exp(2.0 * params.log_std_lat);
    const double var_lon = std::exp(2.0 * params.log_std_lon);
    const double scale = learning_rate / static_cast<double>(n);
    QueryPolicyParams updated = params;
    updated.mean_lat += scale * var_lat * mean_grad.mean_lat;
    updated.mean_lon += scale * var_lon * mean_grad.mean_lon;
    updated.log_std_lat += scale * mean_grad.log_std_lat;
    updated.log_std_lon += scale * mean_grad.log_std_lon;
    return updated;
}

SimTrace simulate_training(std::span<const SimQuery> queries, const SimConfig& config) {
    if (queries.empty()) {
        throw std::invalid_argument("simulate_training: empty query list");
    }

    GaussianRng rng(config.seed);

    // Place each query's initial policy at a seeded random bearing from
    // its truth, with the per-tag offset and spread.
    std::vector<QueryPolicyParams> params;
    params.reserve(queries.size());
    for (const SimQuery& query : queries) {
        const bool easy = query.tag == QueryTag::easy;
        const double offset = easy ? config.easy_offset_deg : config.hard_offset_deg;
        const double std_deg = easy ? config.easy_std_deg : config.hard_std_deg;
        const double bearing = 2.0 * kPi * rng.uniform01();
        QueryPolicyParams p;
        p.mean_lat = query.truth.lat_deg() + offset * std::cos(bearing);
        p.mean_lon = query.truth.lon_deg() + offset * std::sin(bearing);
        p.log_std_lat = std::log(std_deg);
        p.log_std_lon = std::log(std_deg);
        params.push_back(p);
    }

    SimTrace trace;
    trace.config = config;
    trace.iterations.reserve(config.iterations);
    for (std::size_t iter = 0; iter < config.iterations; ++iter) {
        double reward_sum = 0.0;
        std::size_t reward_count = 0;
        std::size_t degenerate_groups = 0;
        double variance_sum = 0.0;

        for (std::size_t q = 0; q < queries.size(); ++q) {
            const SampledGroup sampled =
                sample_candidates(params[q], queries[q].truth, config.group_size, rng);
            const AdvantageSet advantages = group_advantages(sampled.group);

            for (const Candidate& c : sampled.group.candidates) {
                reward_sum += c.reward;
            }
            reward_count += sampled.group.candidates.size();
            if (advantages.degenerate) {
                ++degenerate_groups;
            }
            variance_sum += advantages.reward_std * advantages.reward_std;

            params[q] = score_gradient_step(params[q], sampled, advantages,
                                            config.learning_rate);
        }

        IterationStats stats;
        stats.iteration = iter;
        stats.mean_reward = reward_sum / static_cast<double>(reward_count);
        stats.vanishing_rate =
            static_cast<double>(degenerate_groups) / static_cast<double>(queries.size());
        stats.mean_group_variance = variance_sum / static_cast<double>(queries.size());
        trace.iterations.push_back(stats);
    }
    return trace;
}

}  // namespace geor
