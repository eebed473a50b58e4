#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "synlog/aggregate.hpp"
#include "synlog/codec.hpp"
#include "synlog/dataset_io.hpp"
#include "synlog/detector.hpp"
#include "synlog/error.hpp"
#include "synlog/generator.hpp"
#include "synlog/integrity.hpp"
#include "synlog/net.hpp"
#include "synlog/report.hpp"
#include "synlog/stats.hpp"

#include "json.hpp"

namespace synlog {

inline constexpr const char* tool_version = "synlog 0.1.0";

// ---------------------------------------------------------------------------
// Checksums
// ---------------------------------------------------------------------------

inline std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

inline std::string fnv1a64_hex(std::string_view bytes) {
    static const char* digits = "0123456789abcdef";
    std::uint64_t h = fnv1a64(bytes);
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = digits[h & 0xF];
        h >>= 4;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

struct PipelineConfig {
    std::uint64_t seed = 42;
    std::uint64_t standard_count = 381;
    std::uint64_t threat_count = 4;
    std::optional<std::uint64_t> control_count;  // default: standard + threat
    int treatment_runs = 3;
    PayloadStyle payload = PayloadStyle::flat_csv;
    ThreatPlacement placement = ThreatPlacement::uniform;
    ScoreBasis score_basis = ScoreBasis::predicted;
    double alpha = 0.05;
    bool loopback_collect = false;
    std::uint16_t collector_port = 0;  // 0 = ephemeral
    std::string pools_path;            // empty = built-in
    std::string scenarios_path;        // empty = built-in
    ReportFormats report_formats;
    std::vector<DetectorConfig> detectors;
};

// Two offline detector columns so the default run exercises the full
// eight-dataset aggregation without any remote dependency.
inline PipelineConfig default_pipeline_config() {
    PipelineConfig cfg;
    DetectorConfig a;
    a.name = "claude";
    DetectorConfig b;
    b.name = "gpt4o";
    cfg.detectors = {a, b};
    return cfg;
}

namespace detail {

inline bool parse_bool_value(const std::string& key, std::string_view value) {
    const auto v = to_lower(trim(value));
    if (v == "true" || v == "yes" || v == "1") return true;
    if (v == "false" || v == "no" || v == "0") return false;
    throw ConfigError("key '" + key + "': expected a boolean, got '" + std::string(value) + "'");
}

inline std::uint64_t parse_u64_value(const std::string& key, std::string_view value) {
    try {
        std::size_t used = 0;
        const std::string text{trim(value)};
        const unsigned long long parsed = std::stoull(text, &used);
        if (used != text.size()) throw std::invalid_argument(text);
        return parsed;
    } catch (const std::exception&) {
        throw ConfigError("key '" + key + "': expected an unsigned integer, got '" +
                          std::string(value) + "'");
    }
}

inline double parse_double_value(const std::string& key, std::string_view value) {
    try {
        std::size_t used = 0;
        const std::string text{trim(value)};
        const double parsed = std::stod(text, &used);
        if (used != text.size()) throw std::invalid_argument(text);
        return parsed;
    } catch (const std::exception&) {
        throw ConfigError("key '" + key + "': expected a number, got '" + std::string(value) + "'");
    }
}

inline DetectorKind detector_kind_from_string(std::string_view s) {
    if (s == "baseline") return DetectorKind::baseline;
    if (s == "remote_llm") return DetectorKind::remote_llm;
    throw ConfigError("unknown detector kind '" + std::string(s) + "' (baseline|remote_llm)");
}

inline Provider provider_from_string(std::string_view s) {
    if (s == "auto") return Provider::auto_detect;
    if (s == "openai") return Provider::openai_style;
    if (s == "anthropic") return Provider::anthropic_style;
    throw ConfigError("unknown provider '" + std::string(s) + "' (auto|openai|anthropic)");
}

inline const char* detector_kind_name(DetectorKind k) {
    return k == DetectorKind::baseline ? "baseline" : "remote_llm";
}

inline const char* provider_name(Provider p) {
    switch (p) {
        case Provider::openai_style: return "openai";
        case Provider::anthropic_style: return "anthropic";
        default: return "auto";
    }
}

}  // namespace detail

// Flat key=value format, one setting per line; '#' starts a comment.
// Detector columns are declared with `detectors = a,b` and configured with
// `detector.<alias>.<field> = value`.
inline PipelineConfig parse_pipeline_config(const std::string& text) {
    PipelineConfig cfg = default_pipeline_config();
    cfg.detectors.clear();
    std::vector<std::pair<std::string, std::string>> entries;
    std::size_t line_start = 0;
    int line_no = 0;
    while (line_start <= text.size()) {
        std::size_t eol = text.find('\n', line_start);
        if (eol == std::string::npos) eol = text.size();
        ++line_no;
        std::string line = text.substr(line_start, eol - line_start);
        line_start = eol + 1;
        if (const std::size_t hash = line.find('#'); hash != std::string::npos)
            line.resize(hash);
        if (trim(line).empty()) continue;
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(line_no) + " is not key=value: '" +
                              std::string(trim(line)) + "'");
        entries.emplace_back(std::string(trim(line.substr(0, eq))),
                             std::string(trim(line.substr(eq + 1))));
    }

    // The detector list must be known before detector.* keys are applied.
    for (const auto& [key, value] : entries) {
        if (key != "detectors") continue;
        std::size_t start = 0;
        while (start <= value.size()) {
            std::size_t comma = value.find(',', start);
            if (comma == std::string::npos) comma = value.size();
            const std::string alias{trim(std::string_view(value).substr(start, comma - start))};
            if (!alias.empty()) {
                DetectorConfig d;
                d.name = alias;
                cfg.detectors.push_back(std::move(d));
            }
            start = comma + 1;
        }
    }
    if (cfg.detectors.empty()) cfg.detectors = default_pipeline_config().detectors;

    for (const auto& [key, value] : entries) {
        if (key == "detectors") continue;
        if (key == "seed") cfg.seed = detail::parse_u64_value(key, value);
        else if (key == "standard_count") cfg.standard_count = detail::parse_u64_value(key, value);
        else if (key == "threat_count") cfg.threat_count = detail::parse_u64_value(key, value);
        else if (key == "control_count") cfg.control_count = detail::parse_u64_value(key, value);
        else if (key == "treatment_runs") {
            cfg.treatment_runs = static_cast<int>(detail::parse_u64_value(key, value));
            if (cfg.treatment_runs < 1) throw ConfigError("treatment_runs must be >= 1");
        } else if (key == "payload_style") cfg.payload = payload_style_from_string(value);
        else if (key == "threat_placement") cfg.placement = threat_placement_from_string(value);
        else if (key == "score_basis") cfg.score_basis = score_basis_from_string(value);
        else if (key == "alpha") cfg.alpha = detail::parse_double_value(key, value);
        else if (key == "loopback_collect") cfg.loopback_collect = detail::parse_bool_value(key, value);
        else if (key == "collector_port")
            cfg.collector_port = static_cast<std::uint16_t>(detail::parse_u64_value(key, value));
        else if (key == "pools") cfg.pools_path = value;
        else if (key == "scenarios") cfg.scenarios_path = value;
        else if (key == "report_formats") cfg.report_formats = report_formats_from_string(value);
        else if (key.starts_with("detector.")) {
            const std::size_t dot = key.find('.', 9);
            if (dot == std::string::npos)
                throw ConfigError("malformed detector key '" + key +
                                  "' (want detector.<alias>.<field>)");
            const std::string alias = key.substr(9, dot - 9);
            const std::string field = key.substr(dot + 1);
            DetectorConfig* det = nullptr;
            for (auto& d : cfg.detectors)
                if (d.name == alias) det = &d;
            if (!det)
                throw ConfigError("key '" + key + "' refers to unknown detector '" + alias +
                                  "'; declare it in `detectors`");
            if (field == "kind") det->kind = detail::detector_kind_from_string(value);
            else if (field == "endpoint") det->endpoint = value;
            else if (field == "model") det->model = value;
            else if (field == "api_key_env") det->api_key_env = value;
            else if (field == "provider") det->provider = detail::provider_from_string(value);
            else if (field == "batch_size") {
                det->batch_size = detail::parse_u64_value(key, value);
                if (det->batch_size < 1) throw ConfigError("batch_size must be >= 1");
            } else if (field == "max_retries")
                det->max_retries = static_cast<int>(detail::parse_u64_value(key, value));
            else if (field == "backoff_base_ms")
                det->backoff.base =
                    std::chrono::milliseconds(detail::parse_u64_value(key, value));
            else if (field == "prompt_template") det->prompt_template = value;
            else if (field == "label_insertion")
                det->label_insertion = label_insertion_from_string(value);
            else
                throw ConfigError("unknown detector field '" + field + "' in key '" + key + "'");
        } else {
            throw ConfigError("unknown config key '" + key + "'");
        }
    }
    if (!(cfg.alpha > 0.0 && cfg.alpha < 1.0)) throw ConfigError("alpha must lie in (0,1)");
    for (const auto& d : cfg.detectors)
        if (d.kind == DetectorKind::remote_llm && d.endpoint.empty())
            throw ConfigError("detector '" + d.name + "' is remote_llm but has no endpoint");
    return cfg;
}

inline PipelineConfig load_pipeline_config(const std::string& path) {
    return parse_pipeline_config(read_text_file(path));
}

// Canonical dump: parses back to an equivalent config, and its hash is the
// manifest's config_hash.
inline std::string dump_pipeline_config(const PipelineConfig& cfg) {
    std::string out;
    const auto kv = [&](const std::string& key, const std::string& value) {
        out += key;
        out += " = ";
        out += value;
        out.push_back('\n');
    };
    kv("seed", format_u64(cfg.seed));
    kv("standard_count", format_u64(cfg.standard_count));
    kv("threat_count", format_u64(cfg.threat_count));
    if (cfg.control_count) kv("control_count", format_u64(*cfg.control_count));
    kv("treatment_runs", std::to_string(cfg.treatment_runs));
    kv("payload_style", cfg.payload == PayloadStyle::flat_csv ? "flat_csv" : "structured");
    kv("threat_placement", cfg.placement == ThreatPlacement::uniform ? "uniform" : "append");
    kv("score_basis", cfg.score_basis == ScoreBasis::predicted ? "predicted" : "true");
    kv("alpha", format_double(cfg.alpha));
    kv("loopback_collect", cfg.loopback_collect ? "true" : "false");
    kv("collector_port", std::to_string(cfg.collector_port));
    if (!cfg.pools_path.empty()) kv("pools", cfg.pools_path);
    if (!cfg.scenarios_path.empty()) kv("scenarios", cfg.scenarios_path);
    {
        std::string formats;
        if (cfg.report_formats.csv) formats += "csv";
        if (cfg.report_formats.latex) formats += formats.empty() ? "latex" : ",latex";
        if (cfg.report_formats.svg) formats += formats.empty() ? "svg" : ",svg";
        kv("report_formats", formats);
    }
    {
        std::string aliases;
        for (const auto& d : cfg.detectors) {
            if (!aliases.empty()) aliases += ",";
            aliases += d.name;
        }
        kv("detectors", aliases);
    }
    for (const auto& d : cfg.detectors) {
        const std::string prefix = "detector." + d.name + ".";
        kv(prefix + "kind", detail::detector_kind_name(d.kind));
        if (!d.endpoint.empty()) kv(prefix + "endpoint", d.endpoint);
        if (!d.model.empty()) kv(prefix + "model", d.model);
        if (!d.api_key_env.empty()) kv(prefix + "api_key_env", d.api_key_env);
        if (d.provider != Provider::auto_detect)
            kv(prefix + "provider", detail::provider_name(d.provider));
        kv(prefix + "batch_size", format_u64(d.batch_size));
        kv(prefix + "max_retries", std::to_string(d.max_retries));
        kv(prefix + "label_insertion",
           d.label_insertion == LabelInsertion::pre ? "pre" : "post");
    }
    return out;
}

// ---------------------------------------------------------------------------
// Orchestration
// ---------------------------------------------------------------------------

struct PhaseError : Error {
    PhaseError(std::string phase_name, const std::string& cause)
        : Error("phase '" + phase_name + "' failed: " + cause), phase(std::move(phase_name)) {}
    std::string phase;
};

struct PipelineResult {
    std::string out_dir;
    std::vector<std::string> artifacts;  // relative paths, creation order
    StatsBundle stats;
};

using TransportFactory =
    std::function<std::unique_ptr<ChatTransport>(const DetectorConfig&)>;

namespace detail {

template <typename F>
void run_phase(const char* name, F&& body) {
    try {
        body();
    } catch (const PhaseError&) {
        throw;
    } catch (const std::exception& e) {
        throw PhaseError(name, e.what());
    }
}

// Loopback transmit -> collect of one dataset; returns the integrity report
// and the received lines.
inline std::pair<IntegrityReport, std::vector<std::string>> loopback_roundtrip(
    const std::vector<SyslogRecord>& records, PayloadStyle style, std::uint16_t port) {
    CollectorOptions options;
    options.bind_host = "127.0.0.1";
    options.port = port;
    options.expected_count = records.size();
    options.idle_timeout = std::chrono::milliseconds(5000);
    options.startup_timeout = std::chrono::milliseconds(30000);
    UdpCollector collector(options);

    std::vector<std::string> lines;
    lines.reserve(records.size());
    for (const auto& r : records) lines.push_back(render_rfc3164(r, style));

    std::atomic<bool> stop{false};
    std::vector<std::string> received;
    std::exception_ptr collect_error;
    std::thread listener([&] {
        try {
            received = collector.collect(&stop);
        } catch (...) {
            collect_error = std::current_exception();
        }
    });
    try {
        transmit_lines(lines, "127.0.0.1", collector.port());
    } catch (...) {
        stop = true;
        listener.join();
        throw;
    }
    listener.join();
    if (collect_error) std::rethrow_exception(collect_error);

    std::set<std::string> ids;
    for (const auto& r : records) ids.insert(r.session_id);
    return {verify_integrity(ids, parse_lines(received)), received};
}

inline std::string integrity_summary(const IntegrityReport& report) {
    return "expected=" + format_u64(report.expected) + " received=" + format_u64(report.received) +
           " missing=" + format_u64(report.missing_ids.size()) +
           " duplicates=" + format_u64(report.duplicate_ids.size()) +
           " malformed=" + format_u64(report.malformed);
}

}  // namespace detail

// Runs generate -> (optional loopback collect) -> detect -> aggregate ->
// stats -> report under out_dir, then writes a manifest of everything
// produced. A failing phase throws PhaseError naming the phase; artifacts
// written before the failure stay on disk.
inline PipelineResult run_pipeline(const PipelineConfig& cfg, const std::string& out_dir,
                                   const TransportFactory& transport_factory = {}) {
    namespace fs = std::filesystem;
    if (cfg.detectors.empty()) throw ConfigError("pipeline needs at least one detector");

    PipelineResult result;
    result.out_dir = out_dir;
    const auto absolute = [&](const std::string& rel) {
        return (fs::path(out_dir) / rel).string();
    };
    const auto note = [&](const std::string& rel) { result.artifacts.push_back(rel); };

    fs::create_directories(fs::path(out_dir) / "datasets");
    fs::create_directories(fs::path(out_dir) / "runs");

    const std::string resolved = dump_pipeline_config(cfg);
    write_text_file(absolute("config.txt"), resolved);
    note("config.txt");

    std::vector<SyslogRecord> control, treatment;
    detail::run_phase("generate", [&] {
        const FieldPools pools = cfg.pools_path.empty() ? default_pools()
                                                        : load_pools(cfg.pools_path);
        const std::vector<ThreatScenario> scenarios =
            cfg.scenarios_path.empty() ? default_scenarios() : load_scenarios(cfg.scenarios_path);

        GenerationSpec treatment_spec;
        treatment_spec.standard_count = cfg.standard_count;
        treatment_spec.threat_count = cfg.threat_count;
        treatment_spec.seed = cfg.seed;
        treatment_spec.payload = cfg.payload;
        treatment_spec.placement = cfg.placement;
        treatment = synthesize_dataset(treatment_spec, scenarios, pools);

        GenerationSpec control_spec = treatment_spec;
        control_spec.standard_count = cfg.control_count.value_or(cfg.standard_count +
                                                                 cfg.threat_count);
        control_spec.threat_count = 0;
        control_spec.seed = cfg.seed + 1;  // disjoint sessions from the treatment set
        control = synthesize_dataset(control_spec, scenarios, pools);

        export_dataset(control, absolute("datasets/control.csv"),
                       absolute("datasets/control.log"), cfg.payload);
        note("datasets/control.csv");
        note("datasets/control.log");
        export_dataset(treatment, absolute("datasets/treatment.csv"),
                       absolute("datasets/treatment.log"), cfg.payload);
        note("datasets/treatment.csv");
        note("datasets/treatment.log");
    });

    if (cfg.loopback_collect) {
        detail::run_phase("collect", [&] {
            fs::create_directories(fs::path(out_dir) / "collected");
            const std::pair<const char*, const std::vector<SyslogRecord>*> sets[] = {
                {"control", &control}, {"treatment", &treatment}};
            for (const auto& [name, records] : sets) {
                auto [report, received] =
                    detail::loopback_roundtrip(*records, cfg.payload, cfg.collector_port);
                std::string received_text;
                for (const auto& line : received) {
                    received_text += line;
                    received_text.push_back('\n');
                }
                const std::string rel = std::string("collected/") + name + ".log";
                write_text_file(absolute(rel), received_text);
                note(rel);
                const std::string summary_rel = std::string("collected/") + name + ".integrity.txt";
                write_text_file(absolute(summary_rel), detail::integrity_summary(report) + "\n");
                note(summary_rel);
                if (!report.clean())
                    throw Error("loopback transport for the " + std::string(name) +
                                " dataset was not clean: " + detail::integrity_summary(report));
            }
        });
    }

    std::vector<ScoredRun> scored;
    detail::run_phase("detect", [&] {
        std::map<std::string, int> truth;
        for (const auto& r : control) truth[r.session_id] = r.is_threat ? 1 : 0;
        for (const auto& r : treatment) truth[r.session_id] = r.is_threat ? 1 : 0;

        for (const auto& det : cfg.detectors) {
            std::unique_ptr<ChatTransport> transport;
            if (det.kind == DetectorKind::remote_llm && transport_factory)
                transport = transport_factory(det);
            const auto run_one = [&](const std::vector<SyslogRecord>& records,
                                     const std::string& run_label) {
                const std::string rel = "runs/" + det.name + "_" + run_label + ".csv";
                ScoredRun run = run_detection(records, det, run_label, absolute(rel),
                                              transport.get());
                note(rel);
                // Evaluation always needs ground truth, even when the
                // detector ran label-blind; the scored CSV keeps whatever
                // the run itself produced.
                for (auto& p : run.predictions) p.true_label = truth.at(p.session_id);
                scored.push_back(std::move(run));
            };
            run_one(control, "control");
            for (int k = 1; k <= cfg.treatment_runs; ++k)
                run_one(treatment, "int_run" + std::to_string(k));
        }
    });

    AggregatedTable table;
    detail::run_phase("aggregate", [&] {
        AggregateLayout layout;
        layout.detector_aliases.clear();
        for (const auto& det : cfg.detectors) layout.detector_aliases.push_back(det.name);
        layout.control_run = "control";
        layout.treatment_runs.clear();
        for (int k = 1; k <= cfg.treatment_runs; ++k)
            layout.treatment_runs.push_back("int_run" + std::to_string(k));
        table = aggregate_runs(scored, layout);
        write_aggregated_csv(absolute("aggregated.csv"), table);
        note("aggregated.csv");
    });

    detail::run_phase("stats", [&] {
        result.stats = summarize_all(table, scored, StatsOptions{cfg.score_basis, cfg.alpha});
        write_stats_outputs(result.stats, absolute("stats"));
        note("stats/confusion_matrices.csv");
        note("stats/metrics_summary.csv");
        note("stats/comparisons.csv");
        if (fs::exists(absolute("stats/roc_curves.csv"))) note("stats/roc_curves.csv");
    });

    detail::run_phase("report", [&] {
        const StatsArtifacts artifacts = read_stats_dir(absolute("stats"));
        for (const auto& path :
             write_report_outputs(artifacts, absolute("report"), cfg.report_formats))
            note(fs::path(path).lexically_relative(out_dir).generic_string());
    });

    nlohmann::json manifest;
    manifest["tool"] = tool_version;
    manifest["seed"] = cfg.seed;
    manifest["config_hash"] = fnv1a64_hex(resolved);
    nlohmann::json artifacts = nlohmann::json::object();
    for (const auto& rel : result.artifacts)
        artifacts[rel] = fnv1a64_hex(read_text_file(absolute(rel)));
    manifest["artifacts"] = artifacts;
    write_text_file(absolute("manifest.json"), manifest.dump(2) + "\n");
    return result;
}

inline PipelineResult run_pipeline_file(const std::string& config_path, const std::string& out_dir,
                                        const TransportFactory& transport_factory = {}) {
    return run_pipeline(load_pipeline_config(config_path), out_dir, transport_factory);
}

// ---------------------------------------------------------------------------
// Manifest verification
// ---------------------------------------------------------------------------

struct ManifestCheck {
    std::vector<std::string> missing;
    std::vector<std::string> mismatched;
    bool ok() const { return missing.empty() && mismatched.empty(); }
};

inline ManifestCheck verify_manifest(const std::string& out_dir) {
    namespace fs = std::filesystem;
    const std::string manifest_path = (fs::path(out_dir) / "manifest.json").string();
    nlohmann::json manifest;
    try {
        manifest = nlohmann::json::parse(read_text_file(manifest_path));
    } catch (const nlohmann::json::exception& e) {
        throw IoError(manifest_path, e.what());
    }
    if (!manifest.contains("artifacts") || !manifest["artifacts"].is_object())
        throw IoError(manifest_path, "manifest has no artifacts object");
    ManifestCheck check;
    for (const auto& [rel, digest] : manifest["artifacts"].items()) {
        const std::string path = (fs::path(out_dir) / rel).string();
        if (!fs::exists(path)) {
            check.missing.push_back(rel);
            continue;
        }
        if (fnv1a64_hex(read_text_file(path)) != digest.get<std::string>())
            check.mismatched.push_back(rel);
    }
    return check;
}

}  // namespace synlog
