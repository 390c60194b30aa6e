#include <charconv>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "geor/eval.hpp"
#include "geor/hardset.hpp"
#include "geor/json_io.hpp"
#include "geor/openai_client.hpp"
#include "geor/policy_sim.hpp"
#include "geor/region_chain.hpp"
#include "geor/reward.hpp"
#include "geor/service.hpp"
#include "geor/version.hpp"

namespace {

using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

geor::GeoCoord parse_lat_lon_flag(const std::string& text) {
    const auto comma = text.find(',');
    if (comma == std::string::npos) {
        throw UsageError("expected \"lat,lon\", got: " + text);
    }
    const auto parse_one = [&](std::string_view part) {
        double value = 0.0;
        const char* first = part.data();
        const char* last = part.data() + part.size();
        while (first < last && (*first == ' ' || *first == '\t')) ++first;
        while (last > first && (*(last - 1) == ' ' || *(last - 1) == '\t')) --last;
        const auto result = std::from_chars(first, last, value);
        if (result.ec != std::errc() || result.ptr != last) {
            throw UsageError("not a number: " + std::string(part));
        }
        return value;
    };
    const double lat = parse_one(std::string_view(text).substr(0, comma));
    const double lon = parse_one(std::string_view(text).substr(comma + 1));
    const auto coord = geor::make_coord(lat, lon);
    if (!coord) {
        throw UsageError(std::string("invalid coordinate: ") +
                         geor::to_string(geor::validate_coord(lat, lon)));
    }
    return *coord;
}

std::ifstream open_input(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open " + path);
    }
    return in;
}

std::ofstream open_output(const std::string& path) {
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot write " + path);
    }
    return out;
}

std::string read_file(const std::string& path) {
    std::ifstream in = open_input(path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

void emit(const std::string& text, const std::string& out_path) {
    if (out_path.empty()) {
        std::cout << text;
        if (!text.empty() && text.back() != '\n') {
            std::cout << "\n";
        }
    } else {
        open_output(out_path) << text;
    }
}

void warn_lines(const std::vector<std::string>& errors, const char* what) {
    for (const std::string& e : errors) {
        std::cerr << "warning: " << what << " " << e << "\n";
    }
}

struct RewardArgs {
    std::string pred;
    std::string truth;
    std::string out;
};

struct ParseArgs {
    std::string text;
    std::string out;
};

struct SynthArgs {
    std::string records;
    std::string boundaries;
    std::string out;
    std::string skip_log;
};

struct FilterArgs {
    std::string in;
    std::string seed_preds;
    std::string out;
    std::string report;
    double radius_km = 200.0;
    double cell_deg = 1.0;
    std::size_t min_count = 20;
    double correct_threshold_km = 25.0;
};

struct EvalArgs {
    std::string preds;
    std::string samples;
    std::string endpoint_url;
    std::string model = "default";
    std::string label = "run";
    std::string out;
    std::string json_out;
    std::string transcript;
    std::string prompt_template_file;
    std::size_t concurrency = 4;
    double timeout_s = 30.0;
    int max_retries = 3;
};

struct SimulateArgs {
    std::string queries;
    std::string trace_out;
    geor::SimConfig config;
};

struct ServeArgs {
    std::string host = "127.0.0.1";
    int port = 8080;
};

int run_reward(const RewardArgs& args) {
    const geor::GeoCoord truth = parse_lat_lon_flag(args.truth);
    const geor::RewardBreakdown breakdown = geor::composite_reward(args.pred, truth);
    emit(geor::breakdown_to_json(breakdown).dump(), args.out);
    return kExitOk;
}

int run_parse(const ParseArgs& args) {
    emit(geor::parse_outcome_to_json(geor::parse_strict(args.text)).dump(), args.out);
    return kExitOk;
}

int run_synth(const SynthArgs& args, bool verbose) {
    std::ifstream records = open_input(args.records);
    const geor::BoundaryIndex db = geor::load_boundaries_file(args.boundaries);
    if (verbose && db.skipped_features() > 0) {
        std::cerr << "note: skipped " << db.skipped_features() << " unusable boundary features\n";
    }

    std::ofstream out_file;
    std::ofstream skip_file;
    std::ostream* samples_out = &std::cout;
    std::ostream* skips_out = &std::cerr;
    if (!args.out.empty()) {
        out_file = open_output(args.out);
        samples_out = &out_file;
    }
    if (!args.skip_log.empty()) {
        skip_file = open_output(args.skip_log);
        skips_out = &skip_file;
    }
    const geor::SynthStats stats = geor::synthesize_dataset(records, db, *samples_out, *skips_out);
    std::cerr << "synth: " << stats.emitted << " samples, " << stats.skipped << " skipped\n";
    return kExitOk;
}

int run_filter_hard(const FilterArgs& args) {
    // Seed set: predictions whose error is within the correctness band.
    std::vector<std::string> errors;
    std::ifstream seed_in = open_input(args.seed_preds);
    const auto predictions = geor::load_prediction_jsonl(seed_in, errors);
    warn_lines(errors, "seed");

    std::vector<geor::GeoCoord> correct;
    for (const auto& record : predictions) {
        const auto scored = geor::score_prediction(record);
        if (scored.parsable && *scored.distance_km <= args.correct_threshold_km) {
            correct.push_back(record.truth);
        }
    }
    const auto popular =
        geor::cluster_popular_regions(correct, args.cell_deg, args.min_count);

    // Records keep their original lines so the output is byte-stable.
    std::vector<std::string> lines;
    std::vector<std::string> refs;
    std::vector<geor::GeoCoord> coords;
    std::ifstream in = open_input(args.in);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) {
            continue;
        }
        const json obj = json::parse(line, nullptr, /*allow_exceptions=*/false);
        if (obj.is_discarded() || !obj.is_object() || !obj.contains("lat") ||
            !obj["lat"].is_number() || !obj.contains("lon") || !obj["lon"].is_number()) {
            std::cerr << "warning: records line " << line_no << ": not a usable record\n";
            continue;
        }
        const auto coord = geor::make_coord(obj["lat"].get<double>(), obj["lon"].get<double>());
        if (!coord) {
            std::cerr << "warning: records line " << line_no << ": invalid coordinate\n";
            continue;
        }
        lines.push_back(line);
        refs.push_back(obj.contains("image_ref") && obj["image_ref"].is_string()
                           ? obj["image_ref"].get<std::string>()
                           : "line:" + std::to_string(line_no));
        coords.push_back(*coord);
    }

    const geor::HardFilterResult result = geor::filter_hard(coords, popular, args.radius_km);

    std::ofstream out_file;
    std::ostream* out = &std::cout;
    if (!args.out.empty()) {
        out_file = open_output(args.out);
        out = &out_file;
    }
    for (std::size_t idx : result.retained) {
        *out << lines[idx] << "\n";
    }
    if (!args.report.empty()) {
        std::ofstream report = open_output(args.report);
        for (const geor::Exclusion& e : result.excluded) {
            json entry;
            entry["image_ref"] = refs[e.sample_index];
            entry["nearest_lat"] = popular[e.nearest_center].center.lat_deg();
            entry["nearest_lon"] = popular[e.nearest_center].center.lon_deg();
            entry["distance_km"] = e.distance_km;
            report << entry.dump() << "\n";
        }
    }
    std::cerr << "filter-hard: " << popular.size() << " popular regions, " << result.retained.size()
              << " retained, " << result.excluded.size() << " excluded\n";
    return kExitOk;
}

int render_reports(const geor::LabeledReport& labeled, const EvalArgs& args) {
    const std::vector<geor::LabeledReport> rows{labeled};
    std::cout << geor::render_markdown(rows);
    if (!args.out.empty()) {
        open_output(args.out) << geor::render_csv(rows);
    }
    if (!args.json_out.empty()) {
        open_output(args.json_out) << geor::report_to_json(labeled).dump() << "\n";
    }
    return kExitOk;
}

int run_eval(const EvalArgs& args) {
    if (args.preds.empty() == args.samples.empty()) {
        throw UsageError("pass exactly one of --preds (offline) or --samples (live endpoint)");
    }

    if (!args.preds.empty()) {
        std::vector<std::string> errors;
        std::ifstream in = open_input(args.preds);
        const auto records = geor::load_prediction_jsonl(in, errors);
        warn_lines(errors, "preds");
        if (records.empty()) {
            throw std::runtime_error("no usable prediction records in " + args.preds);
        }
        return render_reports({args.label, geor::threshold_accuracy(records)}, args);
    }

    std::vector<std::string> errors;
    std::ifstream in = open_input(args.samples);
    const auto samples = geor::load_endpoint_samples(in, errors);
    warn_lines(errors, "samples");
    if (samples.empty()) {
        throw std::runtime_error("no usable samples in " + args.samples);
    }

    geor::EndpointConfig config;
    config.base_url = args.endpoint_url;
    config.model_name = args.model;
    config.timeout_s = args.timeout_s;
    config.max_retries = args.max_retries;
    config = geor::apply_endpoint_env(config);
    if (config.base_url.empty()) {
        throw UsageError("no endpoint: pass --endpoint-url or set GEOR_ENDPOINT_URL");
    }

    geor::RunOptions options;
    options.concurrency = args.concurrency;
    if (!args.prompt_template_file.empty()) {
        options.prompt_template = read_file(args.prompt_template_file);
    }

    const geor::EndpointRunResult result = geor::evaluate_endpoint_run(samples, config, options);
    if (!args.transcript.empty()) {
        std::ofstream transcript = open_output(args.transcript);
        for (const geor::TranscriptEntry& entry : result.transcript) {
            transcript << geor::transcript_jsonl_line(entry) << "\n";
        }
    }
    return render_reports({args.label, result.report}, args);
}

int run_simulate(const SimulateArgs& args) {
    std::vector<std::string> errors;
    std::ifstream in = open_input(args.queries);
    const auto queries = geor::load_sim_queries(in, errors);
    warn_lines(errors, "queries");
    if (queries.empty()) {
        throw std::runtime_error("no usable queries in " + args.queries);
    }

    const geor::SimTrace trace = geor::simulate_training(queries, args.config);

    std::ofstream out_file;
    std::ostream* out = &std::cout;
    if (!args.trace_out.empty()) {
        out_file = open_output(args.trace_out);
        out = &out_file;
    }
    for (const geor::IterationStats& stats : trace.iterations) {
        *out << geor::trace_jsonl_line(stats) << "\n";
    }
    if (!trace.iterations.empty()) {
        const geor::IterationStats& last = trace.iterations.back();
        std::cerr << "simulate: final mean_reward " << last.mean_reward << ", vanishing_rate "
                  << last.vanishing_rate << "\n";
    }
    return kExitOk;
}

int run_serve(const ServeArgs& args) {
    std::cerr << "geor reward service " << geor::kVersion << " listening on " << args.host << ":"
              << args.port << "\n";
    if (!geor::run_reward_service(args.host, args.port)) {
        std::cerr << "error: failed to bind " << args.host << ":" << args.port << "\n";
        return kExitFailure;
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"geolocalization reward toolkit"};
    app.set_version_flag("--version", geor::kVersion);
    app.require_subcommand(1);
    bool verbose = false;
    app.add_flag("--verbose", verbose, "chattier diagnostics on stderr");

    RewardArgs reward_args;
    auto* reward = app.add_subcommand("reward", "score one prediction against a truth coordinate");
    reward->add_option("--pred", reward_args.pred, "prediction text")->required();
    reward->add_option("--truth", reward_args.truth, "truth as \"lat,lon\"")->required();
    reward->add_option("--out", reward_args.out, "write JSON here instead of stdout")
        ->capture_default_str();

    ParseArgs parse_args;
    auto* parse = app.add_subcommand("parse", "run the strict coordinate parser on text");
    parse->add_option("--text", parse_args.text, "text to scan")->required();
    parse->add_option("--out", parse_args.out, "write JSON here instead of stdout")
        ->capture_default_str();

    SynthArgs synth_args;
    auto* synth = app.add_subcommand("synth", "synthesize chain-of-region samples");
    synth->add_option("--records", synth_args.records, "input JSONL (image_ref, lat, lon)")
        ->required();
    synth->add_option("--boundaries", synth_args.boundaries, "GeoJSON boundary database")
        ->required();
    synth->add_option("--out", synth_args.out, "samples JSONL (stdout when omitted)")
        ->capture_default_str();
    synth->add_option("--skip-log", synth_args.skip_log, "skip log JSONL (stderr when omitted)")
        ->capture_default_str();

    FilterArgs filter_args;
    auto* filter = app.add_subcommand("filter-hard", "drop samples near popular regions");
    filter->add_option("--in", filter_args.in, "records JSONL to filter")->required();
    filter
        ->add_option("--seed-preds", filter_args.seed_preds,
                     "prediction JSONL used to find popular regions")
        ->required();
    filter->add_option("--out", filter_args.out, "retained records (stdout when omitted)")
        ->capture_default_str();
    filter->add_option("--report", filter_args.report, "exclusion report JSONL")
        ->capture_default_str();
    filter->add_option("--radius-km", filter_args.radius_km, "exclusion radius")
        ->capture_default_str();
    filter->add_option("--cell-deg", filter_args.cell_deg, "clustering grid cell size")
        ->capture_default_str();
    filter->add_option("--min-count", filter_args.min_count, "samples per cell to make it popular")
        ->capture_default_str();
    filter
        ->add_option("--correct-threshold-km", filter_args.correct_threshold_km,
                     "prediction error that still counts as correct")
        ->capture_default_str();

    EvalArgs eval_args;
    auto* eval = app.add_subcommand("eval", "threshold-accuracy evaluation");
    eval->add_option("--preds", eval_args.preds, "offline: prediction JSONL")
        ->capture_default_str();
    eval->add_option("--samples", eval_args.samples, "live: samples JSONL for an endpoint run")
        ->capture_default_str();
    eval->add_option("--endpoint-url", eval_args.endpoint_url,
                     "OpenAI-compatible base URL (or GEOR_ENDPOINT_URL)")
        ->capture_default_str();
    eval->add_option("--model", eval_args.model, "model name for live runs")
        ->capture_default_str();
    eval->add_option("--label", eval_args.label, "row label")->capture_default_str();
    eval->add_option("--out", eval_args.out, "CSV output path")->capture_default_str();
    eval->add_option("--json", eval_args.json_out, "machine-readable report path")
        ->capture_default_str();
    eval->add_option("--transcript", eval_args.transcript, "per-sample transcript JSONL (live)")
        ->capture_default_str();
    eval->add_option("--prompt-template", eval_args.prompt_template_file,
                     "file overriding the built-in eval prompt (live)")
        ->capture_default_str();
    eval->add_option("--concurrency", eval_args.concurrency, "max in-flight requests (live)")
        ->capture_default_str();
    eval->add_option("--timeout-s", eval_args.timeout_s, "per-request timeout (live)")
        ->capture_default_str();
    eval->add_option("--max-retries", eval_args.max_retries, "retries per request (live)")
        ->capture_default_str();

    SimulateArgs sim_args;
    auto* simulate = app.add_subcommand("simulate", "toy policy RL loop at desk scale");
    simulate->add_option("--queries", sim_args.queries, "query JSONL (lat, lon, tag)")->required();
    simulate->add_option("--iters", sim_args.config.iterations, "training iterations")
        ->capture_default_str();
    simulate->add_option("--group-size", sim_args.config.group_size, "candidates per query")
        ->capture_default_str();
    simulate->add_option("--seed", sim_args.config.seed, "rng seed")->capture_default_str();
    simulate->add_option("--lr", sim_args.config.learning_rate, "learning rate")
        ->capture_default_str();
    simulate->add_option("--trace-out", sim_args.trace_out, "trace JSONL (stdout when omitted)")
        ->capture_default_str();
    simulate->add_option("--easy-offset-deg", sim_args.config.easy_offset_deg,
                         "initial mean offset for easy queries")
        ->capture_default_str();
    simulate->add_option("--easy-std-deg", sim_args.config.easy_std_deg,
                         "initial std for easy queries")
        ->capture_default_str();
    simulate->add_option("--hard-offset-deg", sim_args.config.hard_offset_deg,
                         "initial mean offset for hard queries")
        ->capture_default_str();
    simulate->add_option("--hard-std-deg", sim_args.config.hard_std_deg,
                         "initial std for hard queries")
        ->capture_default_str();

    ServeArgs serve_args;
    auto* serve = app.add_subcommand("serve", "stateless HTTP reward service");
    serve->add_option("--host", serve_args.host, "bind address")->capture_default_str();
    serve->add_option("--port", serve_args.port, "bind port")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);  // prints help, exit 0
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n";
        std::cerr << "run with --help for usage\n";
        return kExitUsage;
    }

    try {
        if (reward->parsed()) return run_reward(reward_args);
        if (parse->parsed()) return run_parse(parse_args);
        if (synth->parsed()) return run_synth(synth_args, verbose);
        if (filter->parsed()) return run_filter_hard(filter_args);
        if (eval->parsed()) return run_eval(eval_args);
        if (simulate->parsed()) return run_simulate(sim_args);
        if (serve->parsed()) return run_serve(serve_args);
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitFailure;
    }
    return kExitOk;
}
