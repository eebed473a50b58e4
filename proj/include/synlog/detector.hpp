#pragma once

#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "synlog/codec.hpp"
#include "synlog/csv.hpp"
#include "synlog/error.hpp"
#include "synlog/labels.hpp"
#include "synlog/prediction.hpp"
#include "synlog/record.hpp"
#include "synlog/rng.hpp"

#include "httplib.h"
#include "json.hpp"

namespace synlog {

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

enum class DetectorKind { baseline, remote_llm };
enum class LabelInsertion { pre, post };
enum class Provider { auto_detect, openai_style, anthropic_style };

struct BackoffSchedule {
    std::chrono::milliseconds base{2000};
    double factor = 2.0;
    double jitter_fraction = 0.1;
};

struct DetectorConfig {
    std::string name = "baseline";  // run/column label for this detector
    DetectorKind kind = DetectorKind::baseline;
    std::string endpoint;     // full URL for remote_llm
    std::string model;
    std::string api_key_env;  // environment variable holding the key
    Provider provider = Provider::auto_detect;
    std::size_t batch_size = 32;
    int max_retries = 4;  // retries after the first attempt
    BackoffSchedule backoff;
    std::string prompt_template = "insider-threat-v1";
    LabelInsertion label_insertion = LabelInsertion::post;
};

inline LabelInsertion label_insertion_from_string(std::string_view s) {
    if (s == "pre") return LabelInsertion::pre;
    if (s == "post") return LabelInsertion::post;
    throw ConfigError("unknown label insertion mode '" + std::string(s) + "' (pre|post)");
}

// ---------------------------------------------------------------------------
// Batching
// ---------------------------------------------------------------------------

// ceil(N / batch_size) contiguous batches; concatenation equals the input.
template <typename T>
std::vector<std::span<const T>> chunk(std::span<const T> items, std::size_t batch_size) {
    if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
    std::vector<std::span<const T>> out;
    for (std::size_t at = 0; at < items.size(); at += batch_size)
        out.push_back(items.subspan(at, std::min(batch_size, items.size() - at)));
    return out;
}

template <typename T>
std::vector<std::span<const T>> chunk(const std::vector<T>& items, std::size_t batch_size) {
    return chunk(std::span<const T>(items), batch_size);
}

// ---------------------------------------------------------------------------
// Prompt templates
// ---------------------------------------------------------------------------

struct TemplateError : Error {
    using Error::Error;
};

struct PromptTemplate {
    std::string id;
    std::string system;
    std::string user;
};

struct ChatRequest {
    std::string system;
    std::string user;
};

inline const PromptTemplate& get_prompt_template(const std::string& id) {
    static const PromptTemplate default_template{
        "insider-threat-v1",
        "You are a security analyst reviewing system logs for insider threat activity. "
        "Respond with CSV only: no commentary, no markdown, no code fences.",
        "Review the following {{row_count}} syslog records and classify each as insider "
        "threat (1) or normal (0).\n\nField glossary:\n{{glossary}}\n"
        "Records (CSV):\n{{batch_csv}}\n{{label_instruction}}"
        "Output CSV with a header row and exactly {{row_count}} data rows, one per input "
        "record, in the same order. Columns: {{output_columns}}. predicted_label is 1 for "
        "insider threat and 0 for normal. confidence_score is a decimal fraction in [0,1]. "
        "classification_result is a short free-text rationale."};
    if (id == default_template.id) return default_template;
    throw TemplateError("unknown prompt template '" + id + "'");
}

namespace detail {

inline std::string substitute(const std::string& tmpl,
                              const std::map<std::string, std::string>& vars) {
    std::string out;
    out.reserve(tmpl.size());
    std::size_t i = 0;
    while (i < tmpl.size()) {
        const std::size_t open = tmpl.find("{{", i);
        if (open == std::string::npos) {
            out.append(tmpl, i, std::string::npos);
            break;
        }
        out.append(tmpl, i, open - i);
        const std::size_t close = tmpl.find("}}", open);
        if (close == std::string::npos) throw TemplateError("unterminated template variable");
        const std::string name = tmpl.substr(open + 2, close - open - 2);
        const auto it = vars.find(name);
        if (it == vars.end()) throw TemplateError("template references unknown variable '" + name + "'");
        out += it->second;
        i = close + 2;
    }
    return out;
}

}  // namespace detail

// Renders the batch into the chat request. The ground-truth flag is never
// part of any detector-facing text; in pre mode a blank true_label column is
// added after session_id with instructions to copy it through untouched.
inline ChatRequest build_classification_request(std::span<const SyslogRecord> batch,
                                                LabelInsertion mode,
                                                const std::string& template_id =
                                                    "insider-threat-v1") {
    if (batch.empty()) throw ConfigError("cannot build a request for an empty batch");
    const PromptTemplate& tmpl = get_prompt_template(template_id);

    std::string glossary;
    for (const auto& [name, description] : record_field_glossary()) {
        glossary += "- ";
        glossary += name;
        glossary += ": ";
        glossary += description;
        glossary += '\n';
    }

    std::string batch_csv;
    {
        std::vector<std::string> header;
        for (auto n : record_field_names) {
            header.emplace_back(n);
            if (mode == LabelInsertion::pre && n == "session_id") header.emplace_back("true_label");
        }
        batch_csv = join_fields(header);
        batch_csv.push_back('\n');
        for (const auto& r : batch) {
            auto fields = detail::payload_fields(r);
            if (mode == LabelInsertion::pre)
                fields.insert(fields.begin() + 3, std::string{});  // blank true_label
            batch_csv += join_fields(fields);
            batch_csv.push_back('\n');
        }
    }

    const std::string label_instruction =
        mode == LabelInsertion::pre
            ? "The true_label column is intentionally blank. Copy it to the output file "
              "unchanged and ignore it during analysis.\n"
            : "";

    std::map<std::string, std::string> vars{
        {"row_count", std::to_string(batch.size())},
        {"glossary", glossary},
        {"batch_csv", batch_csv},
        {"label_instruction", label_instruction},
        {"output_columns",
         "session_id, true_label, predicted_label, confidence_score, classification_result"}};
    return ChatRequest{detail::substitute(tmpl.system, vars), detail::substitute(tmpl.user, vars)};
}

// ---------------------------------------------------------------------------
// Response parsing
// ---------------------------------------------------------------------------

struct ResponseFormatError : Error {
    using Error::Error;
};
struct RowCountMismatch : ResponseFormatError {
    RowCountMismatch(std::size_t expected, std::size_t got)
        : ResponseFormatError("expected " + std::to_string(expected) + " response rows, got " +
                              std::to_string(got)) {}
};
struct UnknownSessionId : ResponseFormatError {
    explicit UnknownSessionId(const std::string& id)
        : ResponseFormatError("response row has session_id '" + id + "' not in the batch") {}
};
struct DuplicateSessionId : ResponseFormatError {
    explicit DuplicateSessionId(const std::string& id)
        : ResponseFormatError("response repeats session_id '" + id + "'") {}
};
struct UnparseableLabel : ResponseFormatError {
    UnparseableLabel(const std::string& id, const std::string& text)
        : ResponseFormatError("row for '" + id + "' has unparseable label '" + text + "'") {}
};

namespace detail {

inline std::string strip_code_fences(std::string_view text) {
    std::string out;
    std::size_t i = 0;
    while (i < text.size()) {
        std::size_t eol = text.find('\n', i);
        if (eol == std::string_view::npos) eol = text.size();
        const std::string_view line = text.substr(i, eol - i);
        if (!trim(line).starts_with("```")) {
            out += line;
            out.push_back('\n');
        }
        i = eol + 1;
    }
    return out;
}

inline std::string normalize_ws(std::string s) {
    std::replace(s.begin(), s.end(), '\r', ' ');
    std::replace(s.begin(), s.end(), '\n', ' ');
    return s;
}

}  // namespace detail

// Matches response rows back to the batch by session_id. Output order is the
// batch order regardless of response order. Malformed responses raise
// ResponseFormatError subtypes, which the run loop retries.
inline std::vector<ScoredPrediction> parse_detector_response(std::string_view response_text,
                                                             std::span<const SyslogRecord> batch) {
    auto rows = parse_csv(detail::strip_code_fences(response_text));
    std::erase_if(rows, [](const auto& row) {
        return row.empty() || (row.size() == 1 && trim(row[0]).empty());
    });
    if (!rows.empty() && !rows.front().empty() && to_lower(trim(rows.front()[0])) == "session_id")
        rows.erase(rows.begin());
    if (rows.size() != batch.size()) throw RowCountMismatch(batch.size(), rows.size());

    std::map<std::string, std::size_t> batch_index;
    for (std::size_t i = 0; i < batch.size(); ++i) batch_index[batch[i].session_id] = i;

    std::vector<std::optional<ScoredPrediction>> matched(batch.size());
    for (const auto& row : rows) {
        if (row.size() < 3)
            throw ResponseFormatError("response row has " + std::to_string(row.size()) +
                                      " columns, expected at least 3");
        const std::string id{trim(row[0])};
        const auto it = batch_index.find(id);
        if (it == batch_index.end()) throw UnknownSessionId(id);
        if (matched[it->second]) throw DuplicateSessionId(id);

        ScoredPrediction p;
        p.session_id = id;
        const auto label = parse_label(row[2]);
        if (!label) throw UnparseableLabel(id, row[2]);
        p.predicted_label = *label;
        p.confidence_score = 0.5;
        if (row.size() > 3 && !trim(row[3]).empty()) {
            try {
                p.confidence_score = std::clamp(std::stod(row[3]), 0.0, 1.0);
            } catch (const std::exception&) {
                p.confidence_score = 0.5;
            }
        }
        if (row.size() > 4) p.classification_result = detail::normalize_ws(row[4]);
        matched[it->second] = std::move(p);
    }
    std::vector<ScoredPrediction> out;
    out.reserve(batch.size());
    for (auto& m : matched) out.push_back(std::move(*m));
    return out;
}

// ---------------------------------------------------------------------------
// Baseline detector
// ---------------------------------------------------------------------------

// Shell-spawn / exfiltration command patterns (the hard-tier trigger).
inline const std::vector<std::string>& severe_command_patterns() {
    static const std::vector<std::string> v = {
        "/bin/sh",  "/bin/bash -i", "bash -i",     "nc -e",          "nc -lvp",
        "/dev/tcp/", "scp -r",      "rclone copy", "curl -T ",       "wget --post-file"};
    return v;
}

// Broader suspicious-command patterns (a soft-tier cue).
inline const std::vector<std::string>& suspicious_command_patterns() {
    static const std::vector<std::string> v = {
        "/bin/sh",   "/bin/bash -i", "bash -i",     "nc -e",      "nc -lvp",
        "/dev/tcp/", "scp -r",       "rclone copy", "curl -T ",   "wget --post-file",
        "rm -rf",    "chmod 777",    "sudo ",       "dd if=",     "base64 -d",
        "crontab",   "/etc/shadow",  "history -c"};
    return v;
}

namespace detail {

inline bool matches_any(const std::string& command, const std::vector<std::string>& patterns) {
    for (const auto& p : patterns)
        if (command.find(p) != std::string::npos) return true;
    return false;
}

}  // namespace detail

// Deterministic rule-based detector: the offline stand-in for a remote model.
// Hard tier: unapproved application combined with a shell-spawn/exfiltration
// command. Soft tier: any single cue among {unapproved application, high
// criticality + failure, suspicious command}.
inline ScoredPrediction baseline_detect(const SyslogRecord& r) {
    const bool unapproved = !r.is_approved_application;
    const bool severe = detail::matches_any(r.command, severe_command_patterns());
    const bool suspicious = detail::matches_any(r.command, suspicious_command_patterns());
    const bool critical_failure = r.criticality == "high" && r.status == "failure";

    ScoredPrediction p;
    p.session_id = r.session_id;

    if (unapproved && severe) {
        p.predicted_label = 1;
        p.confidence_score = 0.95;
        p.classification_result =
            "unapproved application executing a shell-spawn/exfiltration command";
        return p;
    }
    int cues = 0;
    std::string why;
    auto cue = [&](bool hit, const char* text) {
        if (!hit) return;
        ++cues;
        if (!why.empty()) why += "; ";
        why += text;
    };
    cue(unapproved, "unapproved application");
    cue(critical_failure, "failure against a high-criticality asset");
    cue(suspicious, "suspicious command pattern");

    if (cues >= 1) {
        p.predicted_label = 1;
        p.confidence_score = 0.6;
        p.classification_result = why;
    } else {
        p.predicted_label = 0;
        p.confidence_score = 1.0 - static_cast<double>(cues) / 3.0;
        p.classification_result = "no risk cues";
    }
    return p;
}

// ---------------------------------------------------------------------------
// Transport
// ---------------------------------------------------------------------------

struct TransportError : Error {
    using Error::Error;
};

class ChatTransport {
  public:
    virtual ~ChatTransport() = default;
    // Returns the assistant's text for one request; throws TransportError.
    virtual std::string complete(const ChatRequest& request) = 0;
};

namespace detail {

struct ParsedUrl {
    bool https = false;
    std::string host;
    int port = 80;
    std::string path = "/";
};

inline ParsedUrl parse_url(const std::string& url) {
    ParsedUrl out;
    std::string rest;
    if (url.starts_with("http://")) {
        rest = url.substr(7);
    } else if (url.starts_with("https://")) {
        out.https = true;
        out.port = 443;
        rest = url.substr(8);
    } else {
        throw ConfigError("endpoint must start with http:// or https://: " + url);
    }
    const std::size_t slash = rest.find('/');
    std::string hostport = slash == std::string::npos ? rest : rest.substr(0, slash);
    if (slash != std::string::npos) out.path = rest.substr(slash);
    const std::size_t colon = hostport.find(':');
    if (colon != std::string::npos) {
        out.host = hostport.substr(0, colon);
        out.port = std::stoi(hostport.substr(colon + 1));
    } else {
        out.host = hostport;
    }
    if (out.host.empty()) throw ConfigError("endpoint has no host: " + url);
    return out;
}

inline std::string extract_assistant_text(const std::string& body) {
    nlohmann::json j = nlohmann::json::parse(body, nullptr, false);
    if (j.is_discarded()) return body;  // plain-text fixture responses
    if (j.contains("choices") && j["choices"].is_array() && !j["choices"].empty()) {
        const auto& c = j["choices"][0];
        if (c.contains("message") && c["message"].contains("content"))
            return c["message"]["content"].get<std::string>();
        if (c.contains("text")) return c["text"].get<std::string>();
    }
    if (j.contains("content") && j["content"].is_array()) {
        std::string out;
        for (const auto& part : j["content"])
            if (part.contains("text")) out += part["text"].get<std::string>();
        if (!out.empty()) return out;
    }
    throw TransportError("response JSON has no assistant content");
}

}  // namespace detail

// Single chat-completion request shape (system + user message, temperature 0)
// posted to the configured endpoint; only the auth headers differ between
// providers. Keys come from the environment, with an interactive prompt as
// the fallback when stdin is a terminal.
class HttpChatTransport : public ChatTransport {
  public:
    explicit HttpChatTransport(const DetectorConfig& config)
        : config_(config), url_(detail::parse_url(config.endpoint)) {
        if (!config.api_key_env.empty()) {
            if (const char* key = std::getenv(config.api_key_env.c_str())) {
                api_key_ = key;
            } else if (::isatty(::fileno(stdin))) {
                std::cerr << "Enter API key for " << config.name << " (" << config.api_key_env
                          << " is unset): ";
                std::getline(std::cin, api_key_);
            }
            if (api_key_.empty())
                throw ConfigError("API key environment variable '" + config.api_key_env +
                                  "' is not set");
        }
    }

    std::string complete(const ChatRequest& request) override {
        nlohmann::json body{
            {"model", config_.model},
            {"temperature", 0},
            {"max_tokens", 8192},
            {"messages",
             {{{"role", "system"}, {"content", request.system}},
              {{"role", "user"}, {"content", request.user}}}}};

        httplib::Headers headers;
        Provider p = config_.provider;
        if (p == Provider::auto_detect)
            p = config_.model.starts_with("claude") ? Provider::anthropic_style
                                                    : Provider::openai_style;
        if (!api_key_.empty()) {
            if (p == Provider::anthropic_style) {
                headers.emplace("x-api-key", api_key_);
                headers.emplace("anthropic-version", "2023-06-01");
            } else {
                headers.emplace("Authorization", "Bearer " + api_key_);
            }
        }

        auto post = [&](auto& client) {
            client.set_read_timeout(120, 0);
            return client.Post(url_.path, headers, body.dump(), "application/json");
        };
        httplib::Result res = [&] {
            if (url_.https) {
#ifdef CPPHTTPLIB_OPENSSL_SUPPORT
                httplib::SSLClient client(url_.host, url_.port);
                return post(client);
#else
                throw ConfigError("built without TLS support; use an http:// endpoint");
#endif
            }
            httplib::Client client(url_.host, url_.port);
            return post(client);
        }();
        if (!res)
            throw TransportError("request to " + config_.endpoint + " failed: " +
                                 httplib::to_string(res.error()));
        if (res->status != 200)
            throw TransportError("endpoint returned HTTP " + std::to_string(res->status) + ": " +
                                 res->body.substr(0, 200));
        return detail::extract_assistant_text(res->body);
    }

  private:
    DetectorConfig config_;
    detail::ParsedUrl url_;
    std::string api_key_;
};

// ---------------------------------------------------------------------------
// Run loop
// ---------------------------------------------------------------------------

struct DetectionAborted : Error {
    DetectionAborted(std::size_t batch_index, const std::string& cause)
        : Error("detection aborted at batch " + std::to_string(batch_index) + ": " + cause),
          batch_index(batch_index) {}
    std::size_t batch_index;
};

// Runs one detector over one dataset. Batches are dispatched in order; failed
// batches are retried with exponential backoff, and exhausting the retries
// persists what succeeded so far under out_csv_path + ".partial" before
// aborting. In post mode the true_label column is filled from ground truth
// only after every response is parsed; in pre mode it is written blank.
inline ScoredRun run_detection(const std::vector<SyslogRecord>& dataset,
                               const DetectorConfig& config, const std::string& run_label,
                               const std::string& out_csv_path = {},
                               ChatTransport* transport = nullptr) {
    if (dataset.empty()) throw ConfigError("detection input dataset is empty");

    std::unique_ptr<ChatTransport> owned;
    if (config.kind == DetectorKind::remote_llm && transport == nullptr) {
        owned = std::make_unique<HttpChatTransport>(config);
        transport = owned.get();
    }

    ScoredRun run{run_label, config.name, {}};
    run.predictions.reserve(dataset.size());
    const auto batches = chunk(dataset, config.batch_size);

    for (std::size_t b = 0; b < batches.size(); ++b) {
        const auto& batch = batches[b];
        if (config.kind == DetectorKind::baseline) {
            for (const auto& r : batch) run.predictions.push_back(baseline_detect(r));
            continue;
        }
        const ChatRequest request =
            build_classification_request(batch, config.label_insertion, config.prompt_template);
        std::vector<ScoredPrediction> parsed;
        std::string last_error;
        bool ok = false;
        for (int attempt = 0; attempt <= config.max_retries; ++attempt) {
            try {
                parsed = parse_detector_response(transport->complete(request), batch);
                ok = true;
                break;
            } catch (const ResponseFormatError& e) {
                last_error = e.what();
            } catch (const TransportError& e) {
                last_error = e.what();
            }
            if (attempt < config.max_retries) {
                double ms = static_cast<double>(config.backoff.base.count()) *
                            std::pow(config.backoff.factor, attempt);
                SplitMix64 j(static_cast<std::uint64_t>(b * 31 + attempt));
                ms *= 1.0 + config.backoff.jitter_fraction * j.unit();
                std::this_thread::sleep_for(
                    std::chrono::milliseconds(static_cast<std::int64_t>(ms)));
            }
        }
        if (!ok) {
            if (!out_csv_path.empty())
                write_scored_csv(out_csv_path + ".partial", run.predictions);
            throw DetectionAborted(b, last_error);
        }
        for (auto& p : parsed) run.predictions.push_back(std::move(p));
    }

    if (config.label_insertion == LabelInsertion::post) {
        for (std::size_t i = 0; i < dataset.size(); ++i)
            run.predictions[i].true_label = dataset[i].is_threat ? 1 : 0;
    }
    if (!out_csv_path.empty()) write_scored_csv(out_csv_path, run.predictions);
    return run;
}

}  // namespace synlog
