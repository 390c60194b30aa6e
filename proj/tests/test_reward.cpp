#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <stdexcept>

#include "geor/reward.hpp"
#include "test_support.hpp"

using geor::composite_reward;
using geor::distance_reward;
using geor::format_reward;
using geor::make_coord;

TEST_CASE("distance reward branch boundaries are exact") {
    CHECK(std::abs(distance_reward(0.0) - 1.0) <= 1e-12);
    CHECK(std::abs(distance_reward(750.0) - 0.5) <= 1e-12);
    CHECK(std::abs(distance_reward(2500.0) - 0.2) <= 1e-12);
    CHECK(std::abs(distance_reward(20000.0) - 0.0) <= 1e-12);
}

TEST_CASE("distance reward interior values") {
    CHECK(distance_reward(375.0) == doctest::Approx(0.75).epsilon(1e-12));
    // Second branch, hand evaluation.
    CHECK(distance_reward(1105.76) == doctest::Approx(0.5 - 0.3 * 355.76 / 1750.0).epsilon(1e-12));
    // Third branch.
    CHECK(distance_reward(10000.0) == doctest::Approx(0.2 - 0.2 * 7500.0 / 17500.0).epsilon(1e-12));
}

TEST_CASE("distance beyond the cap clamps to zero, never negative") {
    CHECK(distance_reward(20015.09) == 0.0);
    CHECK(distance_reward(geor::kMaxGreatCircleKm) == 0.0);
    CHECK(distance_reward(1e9) == 0.0);
}

TEST_CASE("distance reward rejects bad input") {
    CHECK_THROWS_AS(distance_reward(-1.0), std::invalid_argument);
    CHECK_THROWS_AS(distance_reward(std::nan("")), std::invalid_argument);
    CHECK_THROWS_AS(distance_reward(std::numeric_limits<double>::infinity()),
                    std::invalid_argument);
}

TEST_CASE("branch limits agree from both sides") {
    const double below_750 = std::nextafter(750.0, 0.0);
    const double above_750 = std::nextafter(750.0, 1e4);
    CHECK(std::abs(distance_reward(below_750) - 0.5) <= 1e-12);
    CHECK(std::abs(distance_reward(above_750) - 0.5) <= 1e-12);

    const double below_2500 = std::nextafter(2500.0, 0.0);
    const double above_2500 = std::nextafter(2500.0, 1e4);
    CHECK(std::abs(distance_reward(below_2500) - 0.2) <= 1e-12);
    CHECK(std::abs(distance_reward(above_2500) - 0.2) <= 1e-12);
}

TEST_CASE("strict monotonicity and range on a dense grid plus random pairs") {
    double prev = distance_reward(0.0);
    for (int km = 1; km <= 20000; ++km) {
        const double r = distance_reward(static_cast<double>(km));
        CHECK(r < prev);
        CHECK(r >= 0.0);
        CHECK(r <= 1.0);
        prev = r;
    }
    test_support::CoordGen gen(0xabcdull);
    for (int i = 0; i < 10000; ++i) {
        const double d1 = gen.uniform(0.0, 20000.0);
        const double d2 = gen.uniform(0.0, 20000.0);
        if (d1 == d2) {
            continue;
        }
        const double lo = std::min(d1, d2);
        const double hi = std::max(d1, d2);
        CHECK(distance_reward(lo) > distance_reward(hi));
    }
}

TEST_CASE("format reward is binary on the fixture texts") {
    CHECK(format_reward("(48.8566, 2.3522)") == 1);
    CHECK(format_reward("I am unsure.") == 0);
    CHECK(format_reward("(10, 20) or (30, 40)") == 0);
    CHECK(format_reward("(95.0, 10.0)") == 0);
}

TEST_CASE("composite reward: exact hit") {
    const auto truth = *make_coord(48.8566, 2.3522);
    const auto breakdown = composite_reward("(48.8566, 2.3522)", truth);
    CHECK(breakdown.r_format == 1);
    CHECK(breakdown.r_total == 1.0);
    CHECK(*breakdown.distance_km == 0.0);
    CHECK(*breakdown.r_distance == 1.0);
}

TEST_CASE("composite reward: format failure short-circuits") {
    const auto truth = *make_coord(10.0, 10.0);
    const auto breakdown = composite_reward("no idea", truth);
    CHECK(breakdown.r_format == 0);
    CHECK(breakdown.r_total == 0.0);
    CHECK(!breakdown.distance_km.has_value());
    CHECK(!breakdown.r_distance.has_value());

    // Zero-product even when coordinates appear in the text.
    const auto multi = composite_reward("(10, 10) (10, 10)", truth);
    CHECK(multi.r_format == 0);
    CHECK(multi.r_total == 0.0);
}

TEST_CASE("composite reward: Paris prediction against Rome truth") {
    const auto rome = *make_coord(41.9028, 12.4964);
    const auto breakdown = composite_reward("(48.8566, 2.3522)", rome);
    REQUIRE(breakdown.r_format == 1);
    // Distance via the independent oracle, reward via the second branch.
    const auto paris = *make_coord(48.8566, 2.3522);
    const double oracle_km = test_support::slc_distance_km(paris, rome);
    CHECK(*breakdown.distance_km == doctest::Approx(oracle_km).epsilon(1e-9));
    CHECK(*breakdown.distance_km == doctest::Approx(1105.2801).epsilon(1e-6));
    CHECK(breakdown.r_total == doctest::Approx(0.43910).epsilon(1e-4));
    CHECK(breakdown.r_total == doctest::Approx(0.5 - 0.3 * (oracle_km - 750.0) / 1750.0).epsilon(1e-9));
}

TEST_CASE("composite equals distance_reward of haversine when format valid") {
    test_support::CoordGen gen(0x77aull);
    for (int i = 0; i < 2000; ++i) {
        const geor::GeoCoord pred = gen.next();
        const geor::GeoCoord truth = gen.next();
        char text[64];
        std::snprintf(text, sizeof(text), "(%.6f, %.6f)", pred.lat_deg(), pred.lon_deg());
        const auto breakdown = composite_reward(text, truth);
        REQUIRE(breakdown.r_format == 1);
        CHECK(breakdown.r_total == distance_reward(*breakdown.distance_km));
        CHECK(breakdown.r_total >= 0.0);
        CHECK(breakdown.r_total <= 1.0);
    }
}
