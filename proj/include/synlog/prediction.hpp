#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "synlog/csv.hpp"
#include "synlog/error.hpp"
#include "synlog/labels.hpp"

namespace synlog {

// One detector verdict for one record. true_label stays empty in pre-insertion
// mode (the ground truth is only merged in after analysis). score is derived
// from the label and confidence at statistics time and is not persisted.
struct ScoredPrediction {
    std::string session_id;
    std::optional<int> true_label;
    int predicted_label = 0;
    double confidence_score = 0.0;  // in [0, 1]
    std::string classification_result;
    std::optional<double> score;

    friend bool operator==(const ScoredPrediction& a, const ScoredPrediction& b) {
        return a.session_id == b.session_id && a.true_label == b.true_label &&
               a.predicted_label == b.predicted_label &&
               a.confidence_score == b.confidence_score &&
               a.classification_result == b.classification_result;
    }
};

struct ScoredRun {
    std::string run_label;  // control, int_run1, ...
    std::string detector;
    std::vector<ScoredPrediction> predictions;
};

inline constexpr std::string_view scored_csv_header =
    "session_id,true_label,predicted_label,confidence_score,classification_result";

inline std::string scored_csv_text(std::span<const ScoredPrediction> predictions) {
    std::string out{scored_csv_header};
    out.push_back('\n');
    for (const auto& p : predictions) {
        out += join_fields({p.session_id,
                            p.true_label ? std::to_string(*p.true_label) : std::string{},
                            std::to_string(p.predicted_label),
                            format_double(p.confidence_score),
                            p.classification_result});
        out.push_back('\n');
    }
    return out;
}

inline void write_scored_csv(const std::string& path,
                             std::span<const ScoredPrediction> predictions) {
    write_text_file(path, scored_csv_text(predictions));
}

inline std::vector<ScoredPrediction> read_scored_csv(const std::string& path) {
    const auto rows = parse_csv(read_text_file(path));
    if (rows.empty()) throw IoError(path, "empty file, expected a header row");
    if (rows.front().size() < 4 || rows.front()[0] != "session_id")
        throw IoError(path, "unexpected header");
    std::vector<ScoredPrediction> out;
    out.reserve(rows.size() - 1);
    for (std::size_t n = 1; n < rows.size(); ++n) {
        const auto& row = rows[n];
        if (row.size() == 1 && row[0].empty()) continue;
        if (row.size() < 4) throw IoError(path, "row " + std::to_string(n + 1) + ": too few columns");
        ScoredPrediction p;
        p.session_id = row[0];
        if (!trim(row[1]).empty()) {
            auto t = parse_label(row[1]);
            if (!t) throw IoError(path, "row " + std::to_string(n + 1) + ": bad true_label '" + row[1] + "'");
            p.true_label = *t;
        }
        auto pred = parse_label(row[2]);
        if (!pred)
            throw IoError(path, "row " + std::to_string(n + 1) + ": bad predicted_label '" + row[2] + "'");
        p.predicted_label = *pred;
        try {
            p.confidence_score = std::stod(row[3]);
        } catch (const std::exception&) {
            throw IoError(path, "row " + std::to_string(n + 1) + ": bad confidence '" + row[3] + "'");
        }
        if (row.size() > 4) p.classification_result = row[4];
        out.push_back(std::move(p));
    }
    return out;
}

}  // namespace synlog
