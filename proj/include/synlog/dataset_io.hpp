#pragma once

#include <span>
#include <string>
#include <vector>

#include "synlog/codec.hpp"
#include "synlog/csv.hpp"
#include "synlog/error.hpp"
#include "synlog/record.hpp"

namespace synlog {

struct ExportReport {
    std::size_t csv_rows = 0;
    std::size_t raw_lines = 0;
};

inline std::string dataset_csv_header(bool with_truth = true) {
    std::vector<std::string> names;
    names.reserve(record_field_names.size() + 1);
    for (auto n : record_field_names) names.emplace_back(n);
    if (with_truth) names.emplace_back("is_threat");
    return join_fields(names);
}

// The collector writes this flavor: identical schema minus the ground-truth
// column, which the wire never carries.
inline std::string records_csv_text(std::span<const SyslogRecord> records,
                                    bool with_truth = true) {
    std::string csv = dataset_csv_header(with_truth);
    csv.push_back('\n');
    for (const auto& r : records) {
        auto fields = detail::payload_fields(r);
        if (with_truth) fields.push_back(detail::bool_text(r.is_threat));
        csv += join_fields(fields);
        csv.push_back('\n');
    }
    return csv;
}

// Structured CSV export: the 22 payload fields plus the ground-truth
// is_threat column. The raw export is one rendered syslog line per record.
// Pass an empty raw_path to skip the raw file.
inline ExportReport export_dataset(std::span<const SyslogRecord> records,
                                   const std::string& csv_path, const std::string& raw_path,
                                   PayloadStyle style = PayloadStyle::flat_csv,
                                   bool with_pri = false) {
    ExportReport report;
    write_text_file(csv_path, records_csv_text(records, true));
    report.csv_rows = records.size();

    if (!raw_path.empty()) {
        std::string raw;
        for (const auto& r : records) {
            raw += render_rfc3164(r, style, with_pri);
            raw.push_back('\n');
            ++report.raw_lines;
        }
        write_text_file(raw_path, raw);
    }
    return report;
}

// Reads a dataset CSV produced by export_dataset or by the collector (the
// collector's copy has no is_threat column; those records come back with the
// flag false).
inline std::vector<SyslogRecord> read_dataset_csv(const std::string& path) {
    const auto rows = parse_csv(read_text_file(path));
    if (rows.empty()) throw IoError(path, "empty file, expected a header row");
    const auto& header = rows.front();
    if (header.size() < record_field_names.size())
        throw IoError(path, "header has " + std::to_string(header.size()) + " columns, expected >= " +
                                std::to_string(record_field_names.size()));
    for (std::size_t i = 0; i < record_field_names.size(); ++i) {
        if (header[i] != record_field_names[i])
            throw IoError(path, "unexpected column '" + header[i] + "' at position " +
                                    std::to_string(i));
    }
    const bool has_truth =
        header.size() > record_field_names.size() && header[record_field_names.size()] == "is_threat";

    std::vector<SyslogRecord> out;
    out.reserve(rows.size() - 1);
    for (std::size_t n = 1; n < rows.size(); ++n) {
        const auto& row = rows[n];
        if (row.size() == 1 && row[0].empty()) continue;  // trailing blank line
        std::vector<std::string> payload(row.begin(),
                                         row.begin() + static_cast<std::ptrdiff_t>(
                                                           std::min(row.size(), record_field_names.size())));
        SyslogRecord r;
        try {
            r = detail::record_from_fields(payload);
        } catch (const MalformedLine& e) {
            throw IoError(path, "row " + std::to_string(n + 1) + ": " + e.what());
        }
        if (has_truth && row.size() > record_field_names.size())
            r.is_threat = detail::parse_bool_field(row[record_field_names.size()],
                                                   record_field_names.size(), "is_threat");
        out.push_back(std::move(r));
    }
    return out;
}

}  // namespace synlog
