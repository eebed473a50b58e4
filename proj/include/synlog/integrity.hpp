#pragma once

#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "synlog/codec.hpp"
#include "synlog/net.hpp"
#include "synlog/record.hpp"

namespace synlog {

struct ParsedLine {
    std::string line;
    std::optional<SyslogRecord> record;
    std::string error;  // set when record is empty
};

inline ParsedLine try_parse_line(std::string line) {
    ParsedLine out{std::move(line), std::nullopt, {}};
    if (out.line.size() > max_datagram_bytes) {
        out.error = "oversized datagram";
        return out;
    }
    try {
        out.record = parse_syslog_line(out.line);
    } catch (const MalformedLine& e) {
        out.error = e.what();
    }
    return out;
}

inline std::vector<ParsedLine> parse_lines(std::span<const std::string> lines) {
    std::vector<ParsedLine> out;
    out.reserve(lines.size());
    for (const auto& l : lines) out.push_back(try_parse_line(l));
    return out;
}

// Session-id bookkeeping for one delivery: which expected ids never arrived,
// which arrived more than once, and how many lines would not parse at all.
struct IntegrityReport {
    std::size_t expected = 0;
    std::size_t received = 0;                       // datagrams/lines seen
    std::set<std::string> missing_ids;
    std::map<std::string, std::size_t> duplicate_ids;  // id -> occurrences (>1)
    std::size_t malformed = 0;
    std::vector<std::string> malformed_samples;     // up to 5 verbatim lines

    bool clean() const { return missing_ids.empty() && duplicate_ids.empty() && malformed == 0; }
};

// Integrity is set-based on session_id: UDP arrival order is not assumed to
// match send order.
inline IntegrityReport verify_integrity(const std::set<std::string>& expected_ids,
                                        std::span<const ParsedLine> received) {
    IntegrityReport report;
    report.expected = expected_ids.size();
    report.received = received.size();

    std::map<std::string, std::size_t> seen;
    for (const auto& p : received) {
        if (!p.record) {
            ++report.malformed;
            if (report.malformed_samples.size() < 5) report.malformed_samples.push_back(p.line);
            continue;
        }
        ++seen[p.record->session_id];
    }
    for (const auto& id : expected_ids)
        if (!seen.contains(id)) report.missing_ids.insert(id);
    for (const auto& [id, count] : seen)
        if (count > 1) report.duplicate_ids[id] = count;
    return report;
}

}  // namespace synlog
