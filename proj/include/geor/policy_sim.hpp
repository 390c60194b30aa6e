#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "geor/geodesy.hpp"
#include "geor/grpo.hpp"

namespace geor {

/**
 * Deterministic normal sampler: mt19937_64 plus an explicit Box-Muller
 * transform over fixed-width uniforms, so a seeded run replays
 * bit-identically on any platform.
 */
class GaussianRng {
public:
    explicit GaussianRng(std::uint64_t seed) : engine_(seed) {}

    double uniform01();  // open interval (0, 1)
    double gaussian();   // standard normal

private:
    std::mt19937_64 engine_;
};

// Per-query policy: independent Gaussians over latitude and longitude,
// parameterized by mean and log standard deviation.
struct QueryPolicyParams {
    double mean_lat = 0.0;
    double mean_lon = 0.0;
    double log_std_lat = 0.0;
    double log_std_lon = 0.0;

    friend bool operator==(const QueryPolicyParams&, const QueryPolicyParams&) = default;
};

// Raw draw from the policy, before the clip/wrap applied for rendering.
struct SampleDraw {
    double lat = 0.0;
    double lon = 0.0;
};

// A candidate group together with the draws that produced it; the draws
// are what the score-function gradient is evaluated at.
struct SampledGroup {
    CandidateGroup group;
    std::vector<SampleDraw> draws;
};

/**
 * Draws group_size coordinates from the per-query Gaussian, renders each
 * as "(lat, lon)" at 4 decimals (latitude clipped to [-90, 90], longitude
 * wrapped into [-180, 180)), and scores each with the composite reward
 * against the truth. Throws when group_size < 2.
 */
SampledGroup sample_candidates(const QueryPolicyParams& params, const GeoCoord& truth,
                               std::size_t group_size, GaussianRng& rng,
                               std::string query_id = {});

double gaussian_log_density(const QueryPolicyParams& params, const SampleDraw& draw);

struct ParamGradient {
    double mean_lat = 0.0;
    double mean_lon = 0.0;
    double log_std_lat = 0.0;
    double log_std_lon = 0.0;
};

// Analytic gradient of gaussian_log_density with respect to the params.
ParamGradient gaussian_log_density_gradient(const QueryPolicyParams& params,
                                            const SampleDraw& draw);

/**
 * One REINFORCE-style ascent step: params + lr * mean_i(advantage_i *
 * grad log p(draw_i)), with the mean components Fisher-preconditioned
 * (scaled by sigma^2) so the step stays proportional to the sampling
 * spread. Degenerate advantage sets leave the parameters bit-for-bit
 * unchanged. Throws when group and advantages are misaligned.
 */
QueryPolicyParams score_gradient_step(const QueryPolicyParams& params, const SampledGroup& sampled,
                                      const AdvantageSet& advantages, double learning_rate);

enum class QueryTag { easy, hard };

struct SimQuery {
    GeoCoord truth;
    QueryTag tag = QueryTag::easy;
};

struct SimConfig {
    std::size_t iterations = 200;
    std::size_t group_size = 8;
    double learning_rate = 0.05;
    std::uint64_t seed = 0;
    // Initial policy placement per tag: mean offset from the truth and
    // starting standard deviation, in degrees.
    double easy_offset_deg = 0.001;
    double easy_std_deg = 0.001;
    double hard_offset_deg = 60.0;
    double hard_std_deg = 5.0;
};

struct IterationStats {
    std::size_t iteration = 0;
    double mean_reward = 0.0;          // over all candidates this iteration
    double vanishing_rate = 0.0;       // fraction of degenerate query groups
    double mean_group_variance = 0.0;  // unweighted mean of group reward variances
};

struct SimTrace {
    SimConfig config;
    std::vector<IterationStats> iterations;
};

/**
 * Full loop: sample -> reward -> group advantages -> score-function
 * update, for every query, every iteration. Identical (queries, config)
 * inputs give a bit-identical trace. Throws on an empty query list.
 */
SimTrace simulate_training(std::span<const SimQuery> queries, const SimConfig& config);

}  // namespace geor
