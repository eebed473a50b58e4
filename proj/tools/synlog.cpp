// Command-line front end: one subcommand per pipeline phase plus the
// end-to-end orchestrator.

#include <glob.h>

#include <algorithm>
#include <filesystem>
#include <iostream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "synlog/synlog.hpp"

namespace {

namespace fs = std::filesystem;
using namespace synlog;

struct HostPort {
    std::string host;
    int port = 0;
};

HostPort parse_host_port(const std::string& text, const char* flag) {
    const std::size_t colon = text.rfind(':');
    if (colon == std::string::npos || colon == 0 || colon + 1 >= text.size())
        throw ConfigError(std::string(flag) + " wants IP:PORT, got '" + text + "'");
    HostPort hp;
    hp.host = text.substr(0, colon);
    try {
        hp.port = std::stoi(text.substr(colon + 1));
    } catch (const std::exception&) {
        throw ConfigError(std::string(flag) + " has a non-numeric port: '" + text + "'");
    }
    if (hp.port < 1 || hp.port > 65535)
        throw ConfigError(std::string(flag) + " port out of range: " + std::to_string(hp.port));
    return hp;
}

std::vector<std::string> expand_glob(const std::string& pattern) {
    glob_t results{};
    const int rc = ::glob(pattern.c_str(), 0, nullptr, &results);
    std::vector<std::string> out;
    if (rc == 0)
        for (std::size_t i = 0; i < results.gl_pathc; ++i) out.emplace_back(results.gl_pathv[i]);
    ::globfree(&results);
    if (rc != 0 && rc != GLOB_NOMATCH) throw Error("glob failed for pattern '" + pattern + "'");
    if (out.empty()) throw ConfigError("pattern '" + pattern + "' matches no files");
    std::sort(out.begin(), out.end());
    return out;
}

// Scored-run files are named <detector>_<run>.csv; the first underscore
// separates the two (so int_run1 stays intact).
std::pair<std::string, std::string> scored_file_identity(const std::string& path) {
    const std::string stem = fs::path(path).stem().string();
    const std::size_t sep = stem.find('_');
    if (sep == std::string::npos || sep == 0 || sep + 1 >= stem.size())
        throw ConfigError("cannot derive detector/run from '" + path +
                          "'; name scored files <detector>_<run>.csv");
    return {stem.substr(0, sep), stem.substr(sep + 1)};
}

int cmd_gen(const std::string& server, std::uint64_t standard, std::uint64_t threats,
            std::uint64_t seed, const std::string& csv_path, const std::string& raw_path,
            const std::string& payload, const std::string& placement, const std::string& pools_path,
            const std::string& scenarios_path, bool no_transmit, bool with_pri) {
    GenerationSpec spec;
    spec.standard_count = standard;
    spec.threat_count = threats;
    spec.seed = seed;
    spec.payload = payload_style_from_string(payload);
    spec.placement = threat_placement_from_string(placement);
    const HostPort hp = parse_host_port(server, "--server");
    spec.server_host = hp.host;
    spec.server_port = hp.port;

    const FieldPools pools = pools_path.empty() ? default_pools() : load_pools(pools_path);
    const auto scenarios =
        scenarios_path.empty() ? default_scenarios() : load_scenarios(scenarios_path);
    const auto records = synthesize_dataset(spec, scenarios, pools);
    const auto report = export_dataset(records, csv_path, raw_path, spec.payload, with_pri);
    std::cout << "generated " << records.size() << " records (" << spec.threat_count
              << " threats) -> " << csv_path;
    if (!raw_path.empty()) std::cout << ", " << raw_path;
    std::cout << "\n";
    (void)report;

    if (!no_transmit) {
        const auto tx = transmit(records, spec.server_host, spec.server_port, spec.payload,
                                 with_pri);
        std::cout << "transmitted to " << spec.server_host << ":" << spec.server_port
                  << " sent=" << tx.sent << " failed=" << tx.failed << "\n";
    }
    return 0;
}

int cmd_collect(const std::string& bind, std::uint64_t expect, const std::string& csv_path,
                const std::string& quarantine_path, std::uint64_t idle_ms) {
    const HostPort hp = parse_host_port(bind, "--bind");
    CollectorOptions options;
    options.bind_host = hp.host;
    options.port = hp.port;
    if (expect > 0) options.expected_count = expect;
    options.idle_timeout = std::chrono::milliseconds(idle_ms);
    UdpCollector collector(options);
    std::cerr << "listening on " << hp.host << ":" << collector.port() << "\n";

    const auto lines = collector.collect();
    const auto parsed = parse_lines(lines);
    std::vector<SyslogRecord> records;
    std::string quarantined;
    std::size_t malformed = 0;
    for (const auto& p : parsed) {
        if (p.record) {
            records.push_back(*p.record);
        } else {
            ++malformed;
            quarantined += p.line;
            quarantined.push_back('\n');
        }
    }
    write_text_file(csv_path, records_csv_text(records, false));
    if (!quarantine_path.empty()) write_text_file(quarantine_path, quarantined);
    std::cout << "received=" << lines.size() << " parsed=" << records.size()
              << " malformed=" << malformed;
    if (!quarantine_path.empty() && malformed > 0)
        std::cout << " (quarantined to " << quarantine_path << ")";
    std::cout << "\n-> " << csv_path << "\n";
    return 0;
}

int cmd_detect(const std::string& input, const std::string& detector, const std::string& endpoint,
               const std::string& model, const std::string& key_env, int runs,
               const std::string& out_prefix, std::uint64_t batch,
               const std::string& label_insertion, const std::string& provider,
               const std::string& prompt_template, int max_retries, std::uint64_t backoff_ms) {
    DetectorConfig config;
    if (detector == "baseline") {
        config.kind = DetectorKind::baseline;
    } else if (detector == "remote") {
        config.kind = DetectorKind::remote_llm;
        if (endpoint.empty()) throw ConfigError("--detector remote requires --endpoint");
    } else {
        throw ConfigError("unknown detector '" + detector + "' (baseline|remote)");
    }
    const auto records = read_dataset_csv(input);
    config.name = model.empty() ? detector : model;
    config.endpoint = endpoint;
    config.model = model;
    config.api_key_env = key_env;
    config.batch_size = batch;
    config.label_insertion = label_insertion_from_string(label_insertion);
    config.provider = detail::provider_from_string(provider);
    config.prompt_template = prompt_template;
    config.max_retries = max_retries;
    config.backoff.base = std::chrono::milliseconds(backoff_ms);

    for (int k = 1; k <= runs; ++k) {
        const std::string path =
            runs > 1 ? out_prefix + "_run" + std::to_string(k) + ".csv" : out_prefix + ".csv";
        const std::string label = fs::path(path).stem().string();
        const ScoredRun run = run_detection(records, config, label, path);
        std::size_t flagged = 0;
        for (const auto& p : run.predictions) flagged += p.predicted_label == 1 ? 1u : 0u;
        std::cout << "run " << k << "/" << runs << ": " << run.predictions.size()
                  << " predictions, " << flagged << " flagged -> " << path << "\n";
    }
    return 0;
}

int cmd_aggregate(const std::string& truth_control, const std::string& truth_treatment,
                  const std::string& runs_glob, const std::string& out_csv) {
    const auto control = read_dataset_csv(truth_control);
    const auto treatment = read_dataset_csv(truth_treatment);
    std::map<std::string, int> truth;
    std::set<std::string> control_ids, treatment_ids;
    for (const auto& r : control) {
        truth[r.session_id] = r.is_threat ? 1 : 0;
        control_ids.insert(r.session_id);
    }
    for (const auto& r : treatment) {
        truth[r.session_id] = r.is_threat ? 1 : 0;
        treatment_ids.insert(r.session_id);
    }

    std::vector<ScoredRun> runs;
    std::vector<std::string> aliases;
    std::set<std::string> control_names, treatment_names;
    for (const auto& path : expand_glob(runs_glob)) {
        auto [alias, run_name] = scored_file_identity(path);
        ScoredRun run{run_name, alias, read_scored_csv(path)};
        std::size_t in_control = 0, in_treatment = 0;
        for (auto& p : run.predictions) {
            const auto it = truth.find(p.session_id);
            if (it == truth.end())
                throw SessionIdMismatch("'" + path + "' has session '" + p.session_id +
                                        "' absent from both truth datasets");
            p.true_label = it->second;
            in_control += control_ids.count(p.session_id);
            in_treatment += treatment_ids.count(p.session_id);
        }
        if (in_control > 0 && in_treatment > 0)
            throw SessionIdMismatch("'" + path + "' mixes control and treatment sessions");
        (in_control > 0 ? control_names : treatment_names).insert(run_name);
        if (std::find(aliases.begin(), aliases.end(), alias) == aliases.end())
            aliases.push_back(alias);
        runs.push_back(std::move(run));
    }
    if (control_names.size() != 1)
        throw ConfigError("expected exactly one control run name per detector, found " +
                          std::to_string(control_names.size()));
    if (treatment_names.empty()) throw ConfigError("no treatment runs matched the pattern");

    AggregateLayout layout;
    layout.detector_aliases = aliases;
    layout.control_run = *control_names.begin();
    layout.treatment_runs.assign(treatment_names.begin(), treatment_names.end());
    const AggregatedTable table = aggregate_runs(runs, layout);
    write_aggregated_csv(out_csv, table);
    std::cout << "aggregated " << table.rows.size() << " rows x " << table.layout.header().size()
              << " columns -> " << out_csv << "\n";
    return 0;
}

int cmd_stats(const std::string& input, const std::string& confidences_glob,
              const std::string& out_dir, const std::string& basis, double alpha) {
    const AggregatedTable table = read_aggregated_csv(input);
    std::vector<ScoredRun> confidences;
    if (!confidences_glob.empty()) {
        for (const auto& path : expand_glob(confidences_glob)) {
            auto [alias, run_name] = scored_file_identity(path);
            confidences.push_back(ScoredRun{run_name, alias, read_scored_csv(path)});
        }
    }
    StatsOptions options;
    options.score_basis = score_basis_from_string(basis);
    options.alpha = alpha;
    const StatsBundle bundle = summarize_all(table, confidences, options);
    write_stats_outputs(bundle, out_dir);
    std::cout << "summarized " << bundle.runs.size() << " runs, " << bundle.comparisons.size()
              << " comparisons -> " << out_dir << "\n";
    return 0;
}

int cmd_report(const std::string& stats_dir, const std::string& out_dir,
               const std::string& format) {
    const StatsArtifacts artifacts = read_stats_dir(stats_dir);
    const auto written =
        write_report_outputs(artifacts, out_dir, report_formats_from_string(format));
    for (const auto& path : written) std::cout << "wrote " << path << "\n";
    if (artifacts.curves.empty()) std::cout << "no curves available; figure skipped\n";
    return 0;
}

int cmd_pipeline(const std::string& config_path, const std::string& out_dir) {
    const PipelineConfig config =
        config_path.empty() ? default_pipeline_config() : load_pipeline_config(config_path);
    const PipelineResult result = run_pipeline(config, out_dir);
    std::cout << "pipeline finished: " << result.artifacts.size() << " artifacts under "
              << result.out_dir << "\n";
    for (const auto& rs : result.stats.runs) {
        std::cout << "  " << rs.detector << "/" << rs.run << ": tp=" << rs.counts.tp
                  << " fn=" << rs.counts.fn << " fp=" << rs.counts.fp << " tn=" << rs.counts.tn
                  << " accuracy=" << format_fixed3(rs.metrics.accuracy)
                  << " far=" << format_fixed3(rs.metrics.false_alarm_rate) << "\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Imbalanced insider-threat syslog benchmark toolkit"};
    app.set_version_flag("--version", tool_version);
    app.require_subcommand(1);

    // gen
    auto* gen = app.add_subcommand("gen", "Synthesize a dataset and export/transmit it");
    std::uint64_t gen_standard = 381, gen_threats = 4, gen_seed = 42;
    std::string gen_server = "127.0.0.1:514", gen_csv, gen_raw, gen_payload = "flat",
                gen_placement = "uniform", gen_pools, gen_scenarios;
    bool gen_no_transmit = false, gen_pri = false;
    gen->add_option("--standard", gen_standard, "Standard (benign) record count");
    gen->add_option("--threats", gen_threats, "Threat record count");
    gen->add_option("--seed", gen_seed, "Deterministic generator seed");
    gen->add_option("--server", gen_server, "Syslog destination IP:PORT");
    gen->add_option("--csv", gen_csv, "Structured CSV output path")->required();
    gen->add_option("--raw", gen_raw, "Raw syslog-line output path");
    gen->add_option("--payload", gen_payload, "Line payload style: flat|structured");
    gen->add_option("--placement", gen_placement, "Threat placement: uniform|append");
    gen->add_option("--pools", gen_pools, "Field-pool JSON asset (default: built-in)");
    gen->add_option("--scenarios", gen_scenarios, "Threat-scenario JSON asset (default: built-in)");
    gen->add_flag("--no-transmit", gen_no_transmit, "Skip UDP transmission");
    gen->add_flag("--pri", gen_pri, "Prefix rendered lines with <14>");

    // collect
    auto* collect = app.add_subcommand("collect", "Listen for syslog datagrams and export CSV");
    std::string col_bind = "0.0.0.0:514", col_csv, col_quarantine;
    std::uint64_t col_expect = 0, col_idle_ms = 5000;
    collect->add_option("--bind", col_bind, "Bind address IP:PORT");
    collect->add_option("--expect", col_expect, "Stop after N datagrams (0 = idle timeout only)");
    collect->add_option("--csv", col_csv, "Parsed-record CSV output path")->required();
    collect->add_option("--quarantine", col_quarantine, "File for malformed lines, verbatim");
    collect->add_option("--idle-ms", col_idle_ms, "Idle timeout after last datagram");

    // detect
    auto* detect = app.add_subcommand("detect", "Classify a dataset with a detector");
    std::string det_input, det_detector = "baseline", det_endpoint, det_model, det_key_env,
                det_out, det_insertion = "post", det_provider = "auto",
                det_template = "insider-threat-v1";
    int det_runs = 1, det_max_retries = 4;
    std::uint64_t det_batch = 32, det_backoff_ms = 2000;
    detect->add_option("--input", det_input, "Dataset CSV to classify")->required();
    detect->add_option("--detector", det_detector, "baseline|remote");
    detect->add_option("--endpoint", det_endpoint, "Chat-completion URL for --detector remote");
    detect->add_option("--model", det_model, "Model name sent to the endpoint");
    detect->add_option("--key-env", det_key_env, "Environment variable holding the API key");
    detect->add_option("--runs", det_runs, "Repetitions over the same dataset");
    detect->add_option("--out", det_out,
                       "Output prefix: PREFIX.csv, or PREFIX_run<k>.csv when --runs > 1")
        ->required();
    detect->add_option("--batch", det_batch, "Records per request batch");
    detect->add_option("--label-insertion", det_insertion,
                       "pre (blank labels shown to detector) | post (labels added after)");
    detect->add_option("--provider", det_provider, "Auth header style: auto|openai|anthropic");
    detect->add_option("--template", det_template, "Prompt template id");
    detect->add_option("--max-retries", det_max_retries, "Retries per batch after a failure");
    detect->add_option("--backoff-ms", det_backoff_ms, "Base backoff between retries");

    // aggregate
    auto* aggregate = app.add_subcommand("aggregate", "Join scored runs into one predictions table");
    std::string agg_control, agg_treatment, agg_runs, agg_out;
    aggregate->add_option("--truth-control", agg_control, "Control dataset CSV (with is_threat)")
        ->required();
    aggregate
        ->add_option("--truth-treatment", agg_treatment, "Treatment dataset CSV (with is_threat)")
        ->required();
    aggregate->add_option("--runs", agg_runs, "Glob of scored CSVs named <detector>_<run>.csv")
        ->required();
    aggregate->add_option("--out", agg_out, "Aggregated CSV output path")->required();

    // stats
    auto* stats = app.add_subcommand("stats", "Compute the metric suite from an aggregated table");
    std::string st_input, st_confidences, st_out_dir, st_basis = "predicted";
    double st_alpha = 0.05;
    stats->add_option("--input", st_input, "Aggregated CSV")->required();
    stats->add_option("--confidences", st_confidences,
                      "Glob of scored CSVs supplying per-prediction confidences");
    stats->add_option("--out-dir", st_out_dir, "Directory for the stats CSVs")->required();
    stats->add_option("--score-basis", st_basis, "ROC score label basis: predicted|true");
    stats->add_option("--alpha", st_alpha, "Significance level for confidence intervals");

    // report
    auto* report = app.add_subcommand("report", "Render stats into tables and the ROC figure");
    std::string rep_stats, rep_out, rep_format = "csv,latex,svg";
    report->add_option("--stats", rep_stats, "Directory written by `synlog stats`")->required();
    report->add_option("--out-dir", rep_out, "Directory for rendered outputs")->required();
    report->add_option("--format", rep_format, "Comma list of csv,latex,svg");

    // pipeline
    auto* pipeline = app.add_subcommand("pipeline", "Run all phases end to end");
    std::string pipe_config, pipe_out = "out";
    pipeline->add_option("--config", pipe_config, "key=value config file (default: built-in)");
    pipeline->add_option("--out", pipe_out, "Run directory");

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen->parsed())
            return cmd_gen(gen_server, gen_standard, gen_threats, gen_seed, gen_csv, gen_raw,
                           gen_payload, gen_placement, gen_pools, gen_scenarios, gen_no_transmit,
                           gen_pri);
        if (collect->parsed())
            return cmd_collect(col_bind, col_expect, col_csv, col_quarantine, col_idle_ms);
        if (detect->parsed())
            return cmd_detect(det_input, det_detector, det_endpoint, det_model, det_key_env,
                              det_runs, det_out, det_batch, det_insertion, det_provider,
                              det_template, det_max_retries, det_backoff_ms);
        if (aggregate->parsed()) return cmd_aggregate(agg_control, agg_treatment, agg_runs, agg_out);
        if (stats->parsed()) return cmd_stats(st_input, st_confidences, st_out_dir, st_basis,
                                              st_alpha);
        if (report->parsed()) return cmd_report(rep_stats, rep_out, rep_format);
        if (pipeline->parsed()) return cmd_pipeline(pipe_config, pipe_out);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
