#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "geor/eval.hpp"
#include "geor/json_io.hpp"
#include "test_support.hpp"

using geor::EvalReport;
using geor::GeoCoord;
using geor::LabeledReport;
using geor::make_coord;
using geor::PredictionRecord;
using geor::threshold_accuracy;

namespace {

// Truth at the origin; a prediction planted d km due north of it.
PredictionRecord planted(std::string id, double km) {
    const GeoCoord truth = *make_coord(0.0, 0.0);
    const double lat = km / geor::kKmPerDegree;
    PredictionRecord record{std::move(id), std::nullopt, std::nullopt, truth};
    record.predicted_coord = make_coord(lat, 0.0);
    return record;
}

PredictionRecord text_record(std::string id, std::string text, GeoCoord truth) {
    PredictionRecord record{std::move(id), std::nullopt, std::nullopt, truth};
    record.predicted_text = std::move(text);
    return record;
}

}  // namespace

TEST_CASE("planted-distance fixture {0.5, 30, 300, 3000} km") {
    const std::vector<PredictionRecord> records{planted("a", 0.5), planted("b", 30.0),
                                                planted("c", 300.0), planted("d", 3000.0)};
    const EvalReport report = threshold_accuracy(records);
    CHECK(report.n_total == 4);
    CHECK(report.n_unparsable == 0);
    const std::array<double, 5> expected{0.25, 0.25, 0.50, 0.75, 0.75};
    for (std::size_t t = 0; t < 5; ++t) {
        CHECK(report.fractions[t] == expected[t]);
    }
}

TEST_CASE("all exact hits and all unparsable") {
    std::vector<PredictionRecord> hits;
    for (int i = 0; i < 7; ++i) {
        hits.push_back(planted("h" + std::to_string(i), 0.0));
    }
    const EvalReport perfect = threshold_accuracy(hits);
    for (double f : perfect.fractions) {
        CHECK(f == 1.0);
    }

    std::vector<PredictionRecord> junk;
    for (int i = 0; i < 5; ++i) {
        junk.push_back(text_record("j" + std::to_string(i), "no idea", *make_coord(0.0, 0.0)));
    }
    const EvalReport zero = threshold_accuracy(junk);
    CHECK(zero.n_unparsable == 5);
    for (double f : zero.fractions) {
        CHECK(f == 0.0);
    }
}

TEST_CASE("unparsable predictions stay in the denominator") {
    std::vector<PredictionRecord> records{planted("good", 0.5),
                                          text_record("bad", "hmm", *make_coord(0.0, 0.0))};
    const EvalReport report = threshold_accuracy(records);
    CHECK(report.n_total == 2);
    CHECK(report.n_unparsable == 1);
    CHECK(report.fractions[0] == 0.5);
}

TEST_CASE("threshold boundary is inclusive") {
    // Walk latitude ulps until the haversine distance is exactly 25.0 km,
    // then the record must count as within the 25 km band.
    const GeoCoord truth = *make_coord(0.0, 0.0);
    double lat = 25.0 / geor::kKmPerDegree;
    bool found = false;
    for (int step = 0; step < 20000; ++step) {
        const double d = geor::haversine_km(*make_coord(lat, 0.0), truth);
        if (d == 25.0) {
            found = true;
            break;
        }
        lat = std::nextafter(lat, d > 25.0 ? 0.0 : 90.0);
    }
    REQUIRE(found);

    PredictionRecord record{"exact", std::nullopt, make_coord(lat, 0.0), truth};
    const EvalReport report = threshold_accuracy(std::vector<PredictionRecord>{record});
    CHECK(report.fractions[0] == 0.0);  // 1 km
    CHECK(report.fractions[1] == 1.0);  // 25 km, boundary counts as within
}

TEST_CASE("text predictions parse through the strict grammar") {
    const GeoCoord truth = *make_coord(48.8566, 2.3522);
    const std::vector<PredictionRecord> records{
        text_record("ok", "my answer: (48.8566, 2.3522)", truth),
        text_record("multi", "(1, 2) or (3, 4)", truth),
    };
    const EvalReport report = threshold_accuracy(records);
    CHECK(report.n_unparsable == 1);
    CHECK(report.fractions[0] == 0.5);
}

TEST_CASE("monotone fractions and permutation invariance on random fixtures") {
    std::mt19937_64 rng(0xe7a1);
    std::uniform_real_distribution<double> km(0.0, 4000.0);
    std::vector<PredictionRecord> records;
    for (int i = 0; i < 400; ++i) {
        records.push_back(planted("r" + std::to_string(i), km(rng)));
    }
    const EvalReport report = threshold_accuracy(records);
    for (std::size_t t = 1; t < 5; ++t) {
        CHECK(report.fractions[t] >= report.fractions[t - 1]);
    }

    std::shuffle(records.begin(), records.end(), rng);
    const EvalReport shuffled = threshold_accuracy(records);
    CHECK(shuffled.fractions == report.fractions);
}

TEST_CASE("empty record list is an input error") {
    CHECK_THROWS_AS(threshold_accuracy({}), std::invalid_argument);
}

TEST_CASE("duplicate record ids are rejected") {
    const std::vector<PredictionRecord> records{planted("same", 1.0), planted("same", 2.0)};
    CHECK_THROWS_AS(threshold_accuracy(records), std::invalid_argument);
}

TEST_CASE("markdown and CSV rendering of the published row shape") {
    EvalReport report;
    report.fractions = {0.181, 0.4153, 0.5831, 0.7533, 0.8642};
    report.n_total = 3000;
    const std::vector<LabeledReport> rows{{"im2gps3k-demo", report}};

    const std::string markdown = geor::render_markdown(rows);
    CHECK(markdown.find("| im2gps3k-demo | 18.10 | 41.53 | 58.31 | 75.33 | 86.42 |") !=
          std::string::npos);
    CHECK(markdown.find("| run | 1km | 25km | 200km | 750km | 2500km |") != std::string::npos);

    const std::string csv = geor::render_csv(rows);
    CHECK(csv.find("label,1km,25km,200km,750km,2500km\n") == 0);
    CHECK(csv.find("im2gps3k-demo,18.10,41.53,58.31,75.33,86.42\n") != std::string::npos);
}

TEST_CASE("zero report renders rows of 0.00 and label order is stable") {
    EvalReport zero;
    const std::vector<LabeledReport> rows{{"first", zero}, {"second", zero}};
    const std::string csv = geor::render_csv(rows);
    CHECK(csv.find("first,0.00,0.00,0.00,0.00,0.00\n") != std::string::npos);
    const auto first_pos = csv.find("first");
    const auto second_pos = csv.find("second");
    CHECK(first_pos < second_pos);
}

TEST_CASE("prediction JSONL loader") {
    std::istringstream in(
        R"x({"id": "a", "lat": 0.0, "lon": 0.0, "predicted_text": "(1.0, 1.0)"})x" "\n"
        R"({"id": "b", "lat": 0.0, "lon": 0.0, "pred_lat": 2.0, "pred_lon": 2.0})" "\n"
        R"({"id": "c", "lat": 0.0, "lon": 0.0})" "\n"
        "garbage\n"
        R"({"id": "d", "lat": 95.0, "lon": 0.0, "predicted_text": "x"})" "\n");
    std::vector<std::string> errors;
    const auto records = geor::load_prediction_jsonl(in, errors);
    REQUIRE(records.size() == 3);
    CHECK(records[0].predicted_text.has_value());
    CHECK(records[1].predicted_coord.has_value());
    CHECK(!records[2].predicted_text.has_value());
    CHECK(!records[2].predicted_coord.has_value());
    CHECK(errors.size() == 2);

    const auto report = threshold_accuracy(records);
    CHECK(report.n_total == 3);
    CHECK(report.n_unparsable == 1);  // record "c" has nothing to parse
}
