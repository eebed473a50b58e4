#pragma once

#include <array>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "synlog/labels.hpp"

namespace synlog {

// ---------------------------------------------------------------------------
// Timestamp
// ---------------------------------------------------------------------------

// Calendar timestamp without a year, rendered "Apr 01 19:37:41" (day is
// zero-padded). Arithmetic assumes a non-leap year and wraps Dec 31 to Jan 01.
struct SyslogTimestamp {
    int month = 1;  // 1..12
    int day = 1;    // 1..31
    int hour = 0;
    int minute = 0;
    int second = 0;

    static constexpr std::array<std::string_view, 12> month_names = {
        "Jan", "Feb", "Mar", "Apr", "May", "Jun",
        "Jul", "Aug", "Sep", "Oct", "Nov", "Dec"};
    static constexpr std::array<int, 12> month_days = {31, 28, 31, 30, 31, 30,
                                                       31, 31, 30, 31, 30, 31};

    bool valid() const {
        return month >= 1 && month <= 12 && day >= 1 &&
               day <= month_days[static_cast<std::size_t>(month - 1)] && hour >= 0 &&
               hour <= 23 && minute >= 0 && minute <= 59 && second >= 0 && second <= 59;
    }

    // Seconds since Jan 01 00:00:00 of the (unnamed) year.
    std::int64_t to_seconds() const {
        std::int64_t days = day - 1;
        for (int m = 1; m < month; ++m) days += month_days[static_cast<std::size_t>(m - 1)];
        return ((days * 24 + hour) * 60 + minute) * 60 + second;
    }

    static SyslogTimestamp from_seconds(std::int64_t total) {
        constexpr std::int64_t year_seconds = 365LL * 24 * 3600;
        total %= year_seconds;
        if (total < 0) total += year_seconds;
        SyslogTimestamp t;
        std::int64_t days = total / 86400;
        std::int64_t rem = total % 86400;
        t.month = 1;
        while (days >= month_days[static_cast<std::size_t>(t.month - 1)]) {
            days -= month_days[static_cast<std::size_t>(t.month - 1)];
            ++t.month;
        }
        t.day = static_cast<int>(days) + 1;
        t.hour = static_cast<int>(rem / 3600);
        t.minute = static_cast<int>((rem % 3600) / 60);
        t.second = static_cast<int>(rem % 60);
        return t;
    }

    SyslogTimestamp plus_seconds(std::int64_t delta) const {
        return from_seconds(to_seconds() + delta);
    }

    std::string render() const {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%s %02d %02d:%02d:%02d",
                      std::string(month_names[static_cast<std::size_t>(month - 1)]).c_str(),
                      day, hour, minute, second);
        return buf;
    }

    static std::optional<SyslogTimestamp> parse(std::string_view text) {
        // "Mon DD HH:MM:SS" — 15 characters.
        if (text.size() != 15 || text[3] != ' ' || text[6] != ' ' || text[9] != ':' ||
            text[12] != ':')
            return std::nullopt;
        SyslogTimestamp t;
        t.month = 0;
        for (std::size_t m = 0; m < month_names.size(); ++m) {
            if (text.substr(0, 3) == month_names[m]) {
                t.month = static_cast<int>(m) + 1;
                break;
            }
        }
        auto two = [&](std::size_t at) -> int {
            char a = text[at], b = text[at + 1];
            if (a < '0' || a > '9' || b < '0' || b > '9') return -1;
            return (a - '0') * 10 + (b - '0');
        };
        t.day = two(4);
        t.hour = two(7);
        t.minute = two(10);
        t.second = two(13);
        if (t.month == 0 || !t.valid()) return std::nullopt;
        return t;
    }

    friend bool operator==(const SyslogTimestamp&, const SyslogTimestamp&) = default;
    friend auto operator<=>(const SyslogTimestamp& a, const SyslogTimestamp& b) {
        return a.to_seconds() <=> b.to_seconds();
    }
};

// ---------------------------------------------------------------------------
// Record
// ---------------------------------------------------------------------------

// Value pools for the closed (enum-like) fields. Kept as strings so that
// out-of-pool values can be represented and reported by validate_record.
inline const std::array<std::string_view, 5>& auth_method_pool() {
    static const std::array<std::string_view, 5> v = {"password", "certificate", "kerberos",
                                                      "mfa", "sso"};
    return v;
}
inline const std::array<std::string_view, 7>& action_pool() {
    static const std::array<std::string_view, 7> v = {"access", "create", "modify", "delete",
                                                      "execute", "login", "logout"};
    return v;
}
inline const std::array<std::string_view, 2>& status_pool() {
    static const std::array<std::string_view, 2> v = {"success", "failure"};
    return v;
}
inline const std::array<std::string_view, 3>& network_zone_pool() {
    static const std::array<std::string_view, 3> v = {"internal", "dmz", "external"};
    return v;
}
inline const std::array<std::string_view, 3>& criticality_pool() {
    static const std::array<std::string_view, 3> v = {"low", "medium", "high"};
    return v;
}

// One synthetic log event. is_threat is ground truth only; it is written to
// the structured CSV export but never to any detector-facing rendering.
struct SyslogRecord {
    SyslogTimestamp timestamp;
    std::string username;
    std::string session_id;  // UUIDv4 text
    std::string auth_method;
    std::string src_ip;
    std::string src_hostname;
    std::string action;
    std::string object;
    std::string resource;
    std::string command;  // free text, may contain commas/quotes
    std::string status;
    std::uint64_t bytes = 0;
    std::string app_name;
    std::string dst_ip;
    int dst_port = 1;
    std::string protocol;
    std::uint64_t duration = 0;  // seconds
    std::string network_zone;
    std::string location_category;
    std::string criticality;
    bool is_approved_application = true;
    std::uint64_t previous_occurrence_count = 0;
    bool is_threat = false;

    friend bool operator==(const SyslogRecord&, const SyslogRecord&) = default;
};

// The 22 transmitted fields, in payload order.
inline constexpr std::array<std::string_view, 22> record_field_names = {
    "timestamp",    "username",  "session_id",   "auth_method",
    "src_ip",       "src_hostname", "action",    "object",
    "resource",     "command",   "status",       "bytes",
    "app_name",     "dst_ip",    "dst_port",     "protocol",
    "duration",     "network_zone", "location_category", "criticality",
    "is_approved_application", "previous_occurrence_count"};

// Short field glossary included in detector prompts.
inline const std::array<std::pair<std::string_view, std::string_view>, 22>& record_field_glossary() {
    static const std::array<std::pair<std::string_view, std::string_view>, 22> g = {{
        {"timestamp", "event time, Mon DD HH:MM:SS"},
        {"username", "account that performed the action"},
        {"session_id", "unique UUID for this log entry"},
        {"auth_method", "password|certificate|kerberos|mfa|sso"},
        {"src_ip", "source IPv4 address"},
        {"src_hostname", "source host name"},
        {"action", "access|create|modify|delete|execute|login|logout"},
        {"object", "path or name acted upon"},
        {"resource", "resource class, e.g. file-system, database"},
        {"command", "command line executed, free text"},
        {"status", "success|failure"},
        {"bytes", "bytes transferred"},
        {"app_name", "application that generated the event"},
        {"dst_ip", "destination IPv4 address"},
        {"dst_port", "destination port 1-65535"},
        {"protocol", "transport/application protocol, e.g. SFTP, HTTPS, SSH"},
        {"duration", "session duration in seconds"},
        {"network_zone", "internal|dmz|external"},
        {"location_category", "where the user was, e.g. office, remote"},
        {"criticality", "low|medium|high asset criticality"},
        {"is_approved_application", "True if the application is sanctioned"},
        {"previous_occurrence_count", "times this pattern was seen before"},
    }};
    return g;
}

// ---------------------------------------------------------------------------
// Field validators
// ---------------------------------------------------------------------------

inline bool is_valid_ipv4(std::string_view s) {
    int octets = 0;
    std::size_t i = 0;
    while (i <= s.size()) {
        std::size_t start = i;
        int value = 0;
        while (i < s.size() && s[i] >= '0' && s[i] <= '9') {
            value = value * 10 + (s[i] - '0');
            if (value > 255) return false;
            ++i;
        }
        if (i == start || i - start > 3) return false;
        if (i - start > 1 && s[start] == '0') return false;  // no leading zeros
        ++octets;
        if (i == s.size()) break;
        if (s[i] != '.') return false;
        ++i;
    }
    return octets == 4;
}

inline bool is_valid_uuid(std::string_view s) {
    if (s.size() != 36) return false;
    for (std::size_t i = 0; i < 36; ++i) {
        if (i == 8 || i == 13 || i == 18 || i == 23) {
            if (s[i] != '-') return false;
        } else {
            const char c = s[i];
            const bool hex = (c >= '0' && c <= '9') || (c >= 'a' && c <= 'f') || (c >= 'A' && c <= 'F');
            if (!hex) return false;
        }
    }
    return true;
}

// Tokens are short printable values without separators or control characters.
inline bool is_token(std::string_view s) {
    if (s.empty()) return false;
    for (char c : s) {
        if (c == ',' || c == '"' || c == '\r' || c == '\n') return false;
        if (static_cast<unsigned char>(c) < 0x20) return false;
        if (c == ' ') return false;
    }
    return true;
}

inline bool is_free_text(std::string_view s) {
    for (char c : s) {
        if (c == '\r' || c == '\n') return false;
        if (static_cast<unsigned char>(c) < 0x20) return false;
    }
    return true;
}

template <typename Pool>
bool in_pool(const Pool& pool, std::string_view value) {
    for (auto v : pool)
        if (v == value) return true;
    return false;
}

// ---------------------------------------------------------------------------
// validate_record
// ---------------------------------------------------------------------------

struct FieldViolation {
    std::string field;
    std::string detail;
};

struct ValidationVerdict {
    std::vector<FieldViolation> violations;
    bool ok() const { return violations.empty(); }
};

inline ValidationVerdict validate_record(const SyslogRecord& r) {
    ValidationVerdict v;
    auto fail = [&](std::string_view field, std::string detail) {
        v.violations.push_back({std::string(field), std::move(detail)});
    };
    if (!r.timestamp.valid()) fail("timestamp", "out-of-range calendar value");
    if (!is_token(r.username)) fail("username", "not a token");
    if (!is_valid_uuid(r.session_id)) fail("session_id", "not a UUID");
    if (!in_pool(auth_method_pool(), r.auth_method))
        fail("auth_method", "'" + r.auth_method + "' not in enum pool");
    if (!is_valid_ipv4(r.src_ip)) fail("src_ip", "not an IPv4 address");
    if (!is_token(r.src_hostname)) fail("src_hostname", "not a token");
    if (!in_pool(action_pool(), r.action)) fail("action", "'" + r.action + "' not in enum pool");
    if (!is_free_text(r.object) || r.object.empty()) fail("object", "empty or control characters");
    if (!is_token(r.resource)) fail("resource", "not a token");
    if (!is_free_text(r.command)) fail("command", "control characters");
    if (!in_pool(status_pool(), r.status)) fail("status", "'" + r.status + "' not in enum pool");
    if (!is_valid_ipv4(r.dst_ip)) fail("dst_ip", "not an IPv4 address");
    if (r.dst_port < 1 || r.dst_port > 65535) fail("dst_port", "out of range [1, 65535]");
    if (!is_token(r.app_name)) fail("app_name", "not a token");
    if (!is_token(r.protocol)) fail("protocol", "not a token");
    if (!in_pool(network_zone_pool(), r.network_zone))
        fail("network_zone", "'" + r.network_zone + "' not in enum pool");
    if (!is_token(r.location_category)) fail("location_category", "not a token");
    if (!in_pool(criticality_pool(), r.criticality))
        fail("criticality", "'" + r.criticality + "' not in enum pool");
    return v;
}

}  // namespace synlog
