#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "synlog/csv.hpp"
#include "synlog/error.hpp"
#include "synlog/labels.hpp"
#include "synlog/prediction.hpp"

namespace synlog {

// ---------------------------------------------------------------------------
// Layout
// ---------------------------------------------------------------------------

// Column plan for the joined table: four identity/truth columns followed by
// one predicted-label column per (detector alias, run), grouped by detector.
struct AggregateLayout {
    std::vector<std::string> detector_aliases{"claude", "gpt4o"};
    std::string control_run = "control";
    std::vector<std::string> treatment_runs{"int_run1", "int_run2", "int_run3"};

    std::vector<std::string> run_names() const {
        std::vector<std::string> out{control_run};
        out.insert(out.end(), treatment_runs.begin(), treatment_runs.end());
        return out;
    }

    std::vector<std::string> prediction_columns() const {
        std::vector<std::string> out;
        for (const auto& alias : detector_aliases)
            for (const auto& run : run_names()) out.push_back(alias + "_predicted_" + run);
        return out;
    }

    std::vector<std::string> header() const {
        std::vector<std::string> out{"control_session_id", "control_true_label",
                                     "treatment_session_id", "treatment_true_label"};
        auto preds = prediction_columns();
        out.insert(out.end(), preds.begin(), preds.end());
        return out;
    }
};

struct AggregatedRow {
    std::string control_session_id;
    std::optional<int> control_true_label;
    std::string treatment_session_id;
    std::optional<int> treatment_true_label;
    std::vector<std::optional<int>> predictions;  // aligned with prediction_columns()

    bool operator==(const AggregatedRow&) const = default;
};

struct AggregatedTable {
    AggregateLayout layout;
    std::vector<AggregatedRow> rows;
};

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

struct AggregationError : Error {
    using Error::Error;
};
struct MissingRun : AggregationError {
    MissingRun(const std::string& detector, const std::string& run)
        : AggregationError("no scored run for detector '" + detector + "', run '" + run + "'") {}
};
struct SessionIdMismatch : AggregationError {
    using AggregationError::AggregationError;
};

// ---------------------------------------------------------------------------
// Join
// ---------------------------------------------------------------------------

namespace detail {

inline const ScoredRun& find_run(const std::vector<ScoredRun>& runs, const std::string& detector,
                                 const std::string& run) {
    const ScoredRun* found = nullptr;
    for (const auto& candidate : runs) {
        if (candidate.detector != detector || candidate.run_label != run) continue;
        if (found)
            throw AggregationError("detector '" + detector + "', run '" + run +
                                   "' appears more than once");
        found = &candidate;
    }
    if (!found) throw MissingRun(detector, run);
    return *found;
}

// Maps session_id -> position, rejecting duplicates within one run.
inline std::map<std::string, std::size_t> index_by_session(const ScoredRun& run) {
    std::map<std::string, std::size_t> out;
    for (std::size_t i = 0; i < run.predictions.size(); ++i) {
        if (!out.emplace(run.predictions[i].session_id, i).second)
            throw SessionIdMismatch("run '" + run.run_label + "' (" + run.detector +
                                    ") repeats session_id '" + run.predictions[i].session_id + "'");
    }
    return out;
}

inline void check_same_sessions(const ScoredRun& reference,
                                const std::map<std::string, std::size_t>& reference_index,
                                const ScoredRun& candidate) {
    if (candidate.predictions.size() != reference.predictions.size())
        throw SessionIdMismatch("run '" + candidate.run_label + "' (" + candidate.detector +
                                ") has " + std::to_string(candidate.predictions.size()) +
                                " rows but run '" + reference.run_label + "' (" +
                                reference.detector + ") has " +
                                std::to_string(reference.predictions.size()));
    for (const auto& p : candidate.predictions) {
        const auto it = reference_index.find(p.session_id);
        if (it == reference_index.end())
            throw SessionIdMismatch("run '" + candidate.run_label + "' (" + candidate.detector +
                                    ") has session_id '" + p.session_id +
                                    "' absent from run '" + reference.run_label + "' (" +
                                    reference.detector + ")");
        const auto& ref = reference.predictions[it->second];
        if (ref.true_label && p.true_label && *ref.true_label != *p.true_label)
            throw AggregationError("session '" + p.session_id +
                                   "' has conflicting true labels across runs");
    }
}

}  // namespace detail

// Joins scored runs into one table. Rows pair the i-th control session with
// the i-th treatment session (both in the order of the first detector's
// runs); every detector's runs must cover the same session sets.
inline AggregatedTable aggregate_runs(const std::vector<ScoredRun>& runs,
                                      const AggregateLayout& layout = {}) {
    if (layout.detector_aliases.empty()) throw ConfigError("no detector aliases configured");
    AggregatedTable table{layout, {}};

    const ScoredRun& control_ref = detail::find_run(runs, layout.detector_aliases.front(),
                                                    layout.control_run);
    const ScoredRun& treatment_ref =
        layout.treatment_runs.empty()
            ? control_ref
            : detail::find_run(runs, layout.detector_aliases.front(), layout.treatment_runs.front());
    const auto control_index = detail::index_by_session(control_ref);
    const auto treatment_index = detail::index_by_session(treatment_ref);
    if (control_ref.predictions.size() != treatment_ref.predictions.size())
        throw SessionIdMismatch("control and treatment runs have different row counts (" +
                                std::to_string(control_ref.predictions.size()) + " vs " +
                                std::to_string(treatment_ref.predictions.size()) + ")");

    // Validate coverage and collect per-column lookup tables.
    std::vector<const ScoredRun*> column_runs;
    std::vector<std::map<std::string, std::size_t>> column_index;
    std::vector<bool> column_is_control;
    for (const auto& alias : layout.detector_aliases) {
        for (const auto& run_name : layout.run_names()) {
            const ScoredRun& run = detail::find_run(runs, alias, run_name);
            const bool is_control = run_name == layout.control_run;
            detail::check_same_sessions(is_control ? control_ref : treatment_ref,
                                        is_control ? control_index : treatment_index, run);
            column_runs.push_back(&run);
            column_index.push_back(detail::index_by_session(run));
            column_is_control.push_back(is_control);
        }
    }

    const std::size_t n = control_ref.predictions.size();
    table.rows.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        AggregatedRow row;
        row.control_session_id = control_ref.predictions[i].session_id;
        row.control_true_label = control_ref.predictions[i].true_label;
        row.treatment_session_id = treatment_ref.predictions[i].session_id;
        row.treatment_true_label = treatment_ref.predictions[i].true_label;
        for (std::size_t c = 0; c < column_runs.size(); ++c) {
            const std::string& id = column_is_control[c] ? row.control_session_id
                                                         : row.treatment_session_id;
            const auto& pred = column_runs[c]->predictions[column_index[c].at(id)];
            row.predictions.emplace_back(pred.predicted_label);
            // Prefer a truth value from any run that carries one.
            auto& truth = column_is_control[c] ? row.control_true_label : row.treatment_true_label;
            if (!truth && pred.true_label) truth = pred.true_label;
        }
        table.rows.push_back(std::move(row));
    }
    return table;
}

// ---------------------------------------------------------------------------
// Extraction
// ---------------------------------------------------------------------------

// Pulls one prediction column back out as a scored run. The table keeps only
// labels, so confidences come back as 1.0.
inline ScoredRun extract_run(const AggregatedTable& table, const std::string& detector_alias,
                             const std::string& run_name) {
    const auto columns = table.layout.prediction_columns();
    const std::string wanted = detector_alias + "_predicted_" + run_name;
    const auto it = std::find(columns.begin(), columns.end(), wanted);
    if (it == columns.end()) throw MissingRun(detector_alias, run_name);
    const std::size_t col = static_cast<std::size_t>(it - columns.begin());
    const bool is_control = run_name == table.layout.control_run;

    ScoredRun out{run_name, detector_alias, {}};
    out.predictions.reserve(table.rows.size());
    for (const auto& row : table.rows) {
        if (!row.predictions[col])
            throw AggregationError("row for session '" +
                                   (is_control ? row.control_session_id : row.treatment_session_id) +
                                   "' has no prediction in column '" + wanted + "'");
        ScoredPrediction p;
        p.session_id = is_control ? row.control_session_id : row.treatment_session_id;
        p.true_label = is_control ? row.control_true_label : row.treatment_true_label;
        p.predicted_label = *row.predictions[col];
        p.confidence_score = 1.0;
        out.predictions.push_back(std::move(p));
    }
    return out;
}

// ---------------------------------------------------------------------------
// CSV round trip
// ---------------------------------------------------------------------------

namespace detail {

inline std::string label_cell(const std::optional<int>& label) {
    return label ? std::to_string(*label) : std::string{};
}

}  // namespace detail

inline std::string aggregated_csv_text(const AggregatedTable& table) {
    std::string out = join_fields(table.layout.header());
    out.push_back('\n');
    for (const auto& row : table.rows) {
        std::vector<std::string> cells{row.control_session_id,
                                       detail::label_cell(row.control_true_label),
                                       row.treatment_session_id,
                                       detail::label_cell(row.treatment_true_label)};
        for (const auto& p : row.predictions) cells.push_back(detail::label_cell(p));
        out += join_fields(cells);
        out.push_back('\n');
    }
    return out;
}

inline void write_aggregated_csv(const std::string& path, const AggregatedTable& table) {
    write_text_file(path, aggregated_csv_text(table));
}

// Rebuilds the layout from the header: four fixed identity columns, then
// alias_predicted_run columns where every alias lists the same runs in the
// same order and the first run is the control.
inline AggregatedTable read_aggregated_csv(const std::string& path) {
    const auto rows = parse_csv(read_text_file(path));
    if (rows.empty()) throw IoError(path, "empty aggregated table");
    const auto& header = rows.front();
    const std::vector<std::string> fixed{"control_session_id", "control_true_label",
                                         "treatment_session_id", "treatment_true_label"};
    if (header.size() < fixed.size() + 1)
        throw IoError(path, "aggregated header has too few columns");
    for (std::size_t i = 0; i < fixed.size(); ++i)
        if (trim(header[i]) != fixed[i])
            throw IoError(path, "column " + std::to_string(i + 1) + " should be '" + fixed[i] +
                                    "', found '" + std::string(trim(header[i])) + "'");

    AggregateLayout layout;
    layout.detector_aliases.clear();
    layout.treatment_runs.clear();
    std::vector<std::vector<std::string>> runs_per_alias;
    for (std::size_t i = fixed.size(); i < header.size(); ++i) {
        const std::string name{trim(header[i])};
        const std::size_t sep = name.find("_predicted_");
        if (sep == std::string::npos || sep == 0 || sep + 11 >= name.size())
            throw IoError(path, "column '" + name + "' is not of the form alias_predicted_run");
        const std::string alias = name.substr(0, sep);
        const std::string run = name.substr(sep + 11);
        if (layout.detector_aliases.empty() || layout.detector_aliases.back() != alias) {
            if (std::find(layout.detector_aliases.begin(), layout.detector_aliases.end(), alias) !=
                layout.detector_aliases.end())
                throw IoError(path, "columns for detector '" + alias + "' are not contiguous");
            layout.detector_aliases.push_back(alias);
            runs_per_alias.emplace_back();
        }
        runs_per_alias.back().push_back(run);
    }
    for (const auto& runs : runs_per_alias)
        if (runs != runs_per_alias.front())
            throw IoError(path, "detectors list different runs in the header");
    if (runs_per_alias.front().empty()) throw IoError(path, "no prediction columns");
    layout.control_run = runs_per_alias.front().front();
    layout.treatment_runs.assign(runs_per_alias.front().begin() + 1, runs_per_alias.front().end());

    AggregatedTable table{layout, {}};
    const std::size_t want = layout.header().size();
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& cells = rows[r];
        if (cells.size() == 1 && trim(cells[0]).empty()) continue;
        if (cells.size() != want)
            throw IoError(path, "row " + std::to_string(r + 1) + " has " +
                                    std::to_string(cells.size()) + " cells, expected " +
                                    std::to_string(want));
        auto label_at = [&](std::size_t i) -> std::optional<int> {
            if (trim(cells[i]).empty()) return std::nullopt;
            const auto label = parse_label(cells[i]);
            if (!label)
                throw IoError(path, "row " + std::to_string(r + 1) + ": unparseable label '" +
                                        cells[i] + "'");
            return label;
        };
        AggregatedRow row;
        row.control_session_id = trim(cells[0]);
        row.control_true_label = label_at(1);
        row.treatment_session_id = trim(cells[2]);
        row.treatment_true_label = label_at(3);
        for (std::size_t i = fixed.size(); i < want; ++i) row.predictions.push_back(label_at(i));
        table.rows.push_back(std::move(row));
    }
    return table;
}

}  // namespace synlog
