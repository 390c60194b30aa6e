#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <thread>

#include "httplib.h"
#include "json.hpp"

using nlohmann::json;

namespace {

struct RunResult {
    int exit_code = -1;
    std::string stdout_text;
};

// Runs the CLI through the shell; stderr is dropped unless merged.
RunResult run_cli(const std::string& args, bool merge_stderr = false) {
    const std::string cmd = std::string(GEOR_CLI_PATH) + " " + args +
                            (merge_stderr ? " 2>&1" : " 2>/dev/null");
    RunResult result;
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    char buffer[4096];
    while (std::size_t n = std::fread(buffer, 1, sizeof(buffer), pipe)) {
        result.stdout_text.append(buffer, n);
    }
    const int status = pclose(pipe);
    result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return result;
}

std::string q(const std::string& text) {
    return "'" + text + "'";
}

class TempDir {
public:
    TempDir() {
        char tmpl[] = "/tmp/geor_cli_XXXXXX";
        dir_ = mkdtemp(tmpl);
    }
    std::string path(const std::string& name) const { return dir_ + "/" + name; }

private:
    std::string dir_;
};

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path);
    REQUIRE(out.good());
    out << content;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

const char* kBoundaryDb = R"({
  "type": "FeatureCollection",
  "features": [
    {"type": "Feature", "properties": {"level": "country", "name": "A"},
     "geometry": {"type": "Polygon", "coordinates": [[[0,0],[10,0],[10,10],[0,10],[0,0]]]}},
    {"type": "Feature", "properties": {"level": "region", "name": "A1"},
     "geometry": {"type": "Polygon", "coordinates": [[[0,0],[5,0],[5,5],[0,5],[0,0]]]}}
  ]
})";

}  // namespace

TEST_CASE("usage errors exit 2, help exits 0") {
    CHECK(run_cli("bogus").exit_code == 2);
    CHECK(run_cli("").exit_code == 2);
    CHECK(run_cli("reward").exit_code == 2);  // missing required flags

    const auto help = run_cli("--help");
    CHECK(help.exit_code == 0);
    CHECK(help.stdout_text.find("reward") != std::string::npos);
    CHECK(help.stdout_text.find("simulate") != std::string::npos);

    const auto sub_help = run_cli("reward --help");
    CHECK(sub_help.exit_code == 0);
    CHECK(sub_help.stdout_text.find("--pred") != std::string::npos);
    CHECK(sub_help.stdout_text.find("--truth") != std::string::npos);

    // Defaults show up in help for flag-bearing subcommands.
    const auto filter_help = run_cli("filter-hard --help");
    CHECK(filter_help.exit_code == 0);
    CHECK(filter_help.stdout_text.find("--radius-km") != std::string::npos);
    CHECK(filter_help.stdout_text.find("200") != std::string::npos);
    CHECK(filter_help.stdout_text.find("--min-count") != std::string::npos);
}

TEST_CASE("reward subcommand prints a breakdown") {
    const auto result =
        run_cli("reward --pred " + q("(48.8566, 2.3522)") + " --truth 41.9028,12.4964");
    REQUIRE(result.exit_code == 0);
    const json body = json::parse(result.stdout_text);
    CHECK(body["r_format"] == 1);
    CHECK(body["r_total"].get<double>() == doctest::Approx(0.439095).epsilon(1e-4));
    CHECK(body["distance_km"].get<double>() == doctest::Approx(1105.2801).epsilon(1e-5));

    CHECK(run_cli("reward --pred " + q("(1,2)") + " --truth 95,0").exit_code == 2);
    CHECK(run_cli("reward --pred " + q("(1,2)") + " --truth nonsense").exit_code == 2);
}

TEST_CASE("parse subcommand reports statuses") {
    const auto multi = run_cli("parse --text " + q("(10, 20) or (30, 40)"));
    REQUIRE(multi.exit_code == 0);
    CHECK(json::parse(multi.stdout_text)["status"] == "multiple_pairs");

    const auto valid = run_cli("parse --text " + q("(48.85, 2.35)"));
    const json body = json::parse(valid.stdout_text);
    CHECK(body["status"] == "valid");
    CHECK(body["lat"].get<double>() == doctest::Approx(48.85));
    CHECK(body["candidate_count"] == 1);
}

TEST_CASE("synth pipeline writes samples and a skip log") {
    TempDir tmp;
    write_file(tmp.path("db.geojson"), kBoundaryDb);
    write_file(tmp.path("records.jsonl"),
               R"({"image_ref": "a.jpg", "lat": 2.0, "lon": 2.0})" "\n"
               R"({"image_ref": "ocean.jpg", "lat": -60.0, "lon": -120.0})" "\n");

    const auto result = run_cli("synth --records " + tmp.path("records.jsonl") +
                                " --boundaries " + tmp.path("db.geojson") + " --out " +
                                tmp.path("samples.jsonl") + " --skip-log " +
                                tmp.path("skips.jsonl"));
    REQUIRE(result.exit_code == 0);

    std::istringstream samples(read_file(tmp.path("samples.jsonl")));
    std::string line;
    REQUIRE(std::getline(samples, line));
    const json sample = json::parse(line);
    CHECK(sample["image_ref"] == "a.jpg");
    CHECK(sample["country"] == "A");
    CHECK(sample["region"] == "A1");
    CHECK(sample["city"].is_null());
    CHECK(sample["response"].get<std::string>().find("Coordinates: (2.0000, 2.0000)") !=
          std::string::npos);
    CHECK(!std::getline(samples, line));

    const json skip = json::parse(read_file(tmp.path("skips.jsonl")));
    CHECK(skip["image_ref"] == "ocean.jpg");
    CHECK(skip["reason"] == "unresolved");

    // Unreadable inputs are operational failures.
    CHECK(run_cli("synth --records /nonexistent.jsonl --boundaries " + tmp.path("db.geojson"))
              .exit_code == 1);
    CHECK(run_cli("synth --records " + tmp.path("records.jsonl") +
                  " --boundaries /nonexistent.geojson")
              .exit_code == 1);
}

TEST_CASE("filter-hard pipeline retains far samples and reports exclusions") {
    TempDir tmp;
    // 25 correct predictions pile up near (10, 10) -> one popular region.
    std::ostringstream seed;
    for (int i = 0; i < 25; ++i) {
        seed << R"({"id": "s)" << i << R"(", "lat": 10.0, "lon": 10.)" << i % 10
             << R"(, "pred_lat": 10.0, "pred_lon": 10.)" << i % 10 << "}\n";
    }
    write_file(tmp.path("seed.jsonl"), seed.str());
    write_file(tmp.path("data.jsonl"),
               R"({"image_ref": "near.jpg", "lat": 10.2, "lon": 10.2})" "\n"
               R"({"image_ref": "far.jpg", "lat": 40.0, "lon": 40.0})" "\n");

    const auto result = run_cli("filter-hard --in " + tmp.path("data.jsonl") + " --seed-preds " +
                                tmp.path("seed.jsonl") + " --out " + tmp.path("hard.jsonl") +
                                " --report " + tmp.path("excl.jsonl") + " --min-count 20");
    REQUIRE(result.exit_code == 0);

    const std::string hard = read_file(tmp.path("hard.jsonl"));
    CHECK(hard.find("far.jpg") != std::string::npos);
    CHECK(hard.find("near.jpg") == std::string::npos);

    const json exclusion = json::parse(read_file(tmp.path("excl.jsonl")));
    CHECK(exclusion["image_ref"] == "near.jpg");
    CHECK(exclusion["distance_km"].get<double>() < 200.0);
}

TEST_CASE("eval offline renders markdown, CSV and JSON") {
    TempDir tmp;
    write_file(tmp.path("preds.jsonl"),
               R"({"id": "a", "lat": 0.0, "lon": 0.0, "pred_lat": 0.0, "pred_lon": 0.0})" "\n"
               R"({"id": "b", "lat": 0.0, "lon": 0.0, "pred_lat": 0.0, "pred_lon": 3.0})" "\n");

    const auto result = run_cli("eval --preds " + tmp.path("preds.jsonl") + " --label demo --out " +
                                tmp.path("report.csv") + " --json " + tmp.path("report.json"));
    REQUIRE(result.exit_code == 0);
    CHECK(result.stdout_text.find("| demo | 50.00 | 50.00 | 50.00 | 100.00 | 100.00 |") !=
          std::string::npos);

    const std::string csv = read_file(tmp.path("report.csv"));
    CHECK(csv.find("demo,50.00,50.00,50.00,100.00,100.00") != std::string::npos);

    const json report = json::parse(read_file(tmp.path("report.json")));
    CHECK(report["n_total"] == 2);
    CHECK(report["fractions"][0].get<double>() == 0.5);

    // Exactly one of --preds / --samples must be given.
    CHECK(run_cli("eval").exit_code == 2);
    CHECK(run_cli("eval --preds x --samples y").exit_code == 2);
    CHECK(run_cli("eval --preds /nonexistent.jsonl").exit_code == 1);
}

TEST_CASE("eval live mode drives an endpoint from the environment") {
    // Truth-echoing chat-completions mock.
    httplib::Server server;
    server.Get("/v1/models", [](const httplib::Request&, httplib::Response& res) {
        res.set_content("{\"data\":[]}", "application/json");
    });
    server.Post("/v1/chat/completions", [](const httplib::Request& req, httplib::Response& res) {
        const json body = json::parse(req.body, nullptr, false);
        std::string prompt;
        if (body.contains("messages") && !body["messages"].empty() &&
            body["messages"][0]["content"].is_string()) {
            prompt = body["messages"][0]["content"].get<std::string>();
        }
        json reply;
        json choice;
        choice["message"]["content"] = prompt.substr(prompt.find('('));
        reply["choices"] = json::array({choice});
        res.set_content(reply.dump(), "application/json");
    });
    const int port = server.bind_to_any_port("127.0.0.1");
    std::thread thread([&server] { server.listen_after_bind(); });
    server.wait_until_ready();

    TempDir tmp;
    write_file(tmp.path("samples.jsonl"),
               R"x({"id": "a", "lat": 10.0, "lon": 20.0, "prompt": "echo (10.0, 20.0)"})x" "\n"
               R"x({"id": "b", "lat": -5.0, "lon": 7.0, "prompt": "echo (-5.0, 7.0)"})x" "\n");

    const std::string env = "GEOR_ENDPOINT_URL=http://127.0.0.1:" + std::to_string(port) + " ";
    const std::string cmd = env + std::string(GEOR_CLI_PATH) + " eval --samples " +
                            tmp.path("samples.jsonl") + " --label live --transcript " +
                            tmp.path("transcript.jsonl") + " 2>/dev/null";
    RunResult result;
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    char buffer[4096];
    while (std::size_t n = std::fread(buffer, 1, sizeof(buffer), pipe)) {
        result.stdout_text.append(buffer, n);
    }
    result.exit_code = WEXITSTATUS(pclose(pipe));
    server.stop();
    thread.join();

    REQUIRE(result.exit_code == 0);
    CHECK(result.stdout_text.find("| live | 100.00 | 100.00 | 100.00 | 100.00 | 100.00 |") !=
          std::string::npos);

    std::istringstream transcript(read_file(tmp.path("transcript.jsonl")));
    std::string line;
    std::size_t entries = 0;
    while (std::getline(transcript, line)) {
        const json entry = json::parse(line);
        CHECK(entry["parse_status"] == "valid");
        CHECK(entry["distance_km"].get<double>() <= 0.01);
        ++entries;
    }
    CHECK(entries == 2);
}

TEST_CASE("serve exits 1 when it cannot bind") {
    const auto result = run_cli("serve --host 999.999.999.999 --port 18080", true);
    CHECK(result.exit_code == 1);
    CHECK(result.stdout_text.find("failed to bind") != std::string::npos);
}

TEST_CASE("simulate honors --seed with bit-identical traces") {
    TempDir tmp;
    write_file(tmp.path("queries.jsonl"),
               R"({"lat": 48.85, "lon": 2.35, "tag": "easy"})" "\n"
               R"({"lat": -33.87, "lon": 151.21, "tag": "hard"})" "\n");

    const std::string args = "simulate --queries " + tmp.path("queries.jsonl") +
                             " --iters 5 --group-size 4 --seed 7 --trace-out ";
    REQUIRE(run_cli(args + tmp.path("t1.jsonl")).exit_code == 0);
    REQUIRE(run_cli(args + tmp.path("t2.jsonl")).exit_code == 0);

    const std::string t1 = read_file(tmp.path("t1.jsonl"));
    CHECK(t1 == read_file(tmp.path("t2.jsonl")));

    std::istringstream lines(t1);
    std::string line;
    std::size_t count = 0;
    while (std::getline(lines, line)) {
        const json stats = json::parse(line);
        CHECK(stats["iteration"] == count);
        CHECK(stats["mean_reward"].get<double>() >= 0.0);
        CHECK(stats["mean_reward"].get<double>() <= 1.0);
        ++count;
    }
    CHECK(count == 5);

    // A different seed changes the trace.
    REQUIRE(run_cli("simulate --queries " + tmp.path("queries.jsonl") +
                    " --iters 5 --group-size 4 --seed 8 --trace-out " + tmp.path("t3.jsonl"))
                .exit_code == 0);
    CHECK(read_file(tmp.path("t3.jsonl")) != t1);
}
