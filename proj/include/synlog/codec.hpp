#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "synlog/csv.hpp"
#include "synlog/error.hpp"
#include "synlog/record.hpp"

#include "json.hpp"

namespace synlog {

enum class PayloadStyle { flat_csv, structured };

inline PayloadStyle payload_style_from_string(std::string_view s) {
    if (s == "flat" || s == "flat_csv") return PayloadStyle::flat_csv;
    if (s == "structured") return PayloadStyle::structured;
    throw ConfigError("unknown payload style '" + std::string(s) + "' (flat|structured)");
}

// Parse failure; field_index is the position of the first violated field
// (22 == structural problem such as a wrong field count).
struct MalformedLine : Error {
    MalformedLine(std::size_t field_index, const std::string& detail)
        : Error("malformed line (field " + std::to_string(field_index) + "): " + detail),
          field_index(field_index) {}
    std::size_t field_index;
};

namespace detail {

inline std::string bool_text(bool b) { return b ? "True" : "False"; }

inline std::vector<std::string> payload_fields(const SyslogRecord& r) {
    return {r.timestamp.render(),
            r.username,
            r.session_id,
            r.auth_method,
            r.src_ip,
            r.src_hostname,
            r.action,
            r.object,
            r.resource,
            r.command,
            r.status,
            format_u64(r.bytes),
            r.app_name,
            r.dst_ip,
            std::to_string(r.dst_port),
            r.protocol,
            format_u64(r.duration),
            r.network_zone,
            r.location_category,
            r.criticality,
            bool_text(r.is_approved_application),
            format_u64(r.previous_occurrence_count)};
}

}  // namespace detail

// Renders one record as a single syslog line. The flat style is the
// comma-separated 22-field payload with quote-doubling for fields containing
// commas or quotes; the structured style keeps the timestamp/hostname header
// and carries the remaining fields as an embedded JSON object. The ground
// truth flag is never rendered. with_pri prepends the legacy <14> priority
// tag (user.info), which the default output omits.
inline std::string render_rfc3164(const SyslogRecord& r,
                                  PayloadStyle style = PayloadStyle::flat_csv,
                                  bool with_pri = false) {
    std::string out;
    if (with_pri) out += "<14>";
    if (style == PayloadStyle::flat_csv) {
        out += join_fields(detail::payload_fields(r), ", ");
        return out;
    }
    nlohmann::ordered_json j;
    j["username"] = r.username;
    j["session_id"] = r.session_id;
    j["auth_method"] = r.auth_method;
    j["src_ip"] = r.src_ip;
    j["action"] = r.action;
    j["object"] = r.object;
    j["resource"] = r.resource;
    j["command"] = r.command;
    j["status"] = r.status;
    j["bytes"] = r.bytes;
    j["app_name"] = r.app_name;
    j["dst_ip"] = r.dst_ip;
    j["dst_port"] = r.dst_port;
    j["protocol"] = r.protocol;
    j["duration"] = r.duration;
    j["network_zone"] = r.network_zone;
    j["location_category"] = r.location_category;
    j["criticality"] = r.criticality;
    j["is_approved_application"] = r.is_approved_application;
    j["previous_occurrence_count"] = r.previous_occurrence_count;
    out += r.timestamp.render();
    out += ' ';
    out += r.src_hostname;
    out += ' ';
    out += j.dump();
    return out;
}

namespace detail {

inline std::uint64_t parse_u64_field(const std::string& text, std::size_t index,
                                     std::string_view name) {
    if (text.empty()) throw MalformedLine(index, std::string(name) + " is empty");
    std::uint64_t value = 0;
    for (char c : text) {
        if (c < '0' || c > '9')
            throw MalformedLine(index, std::string(name) + " '" + text + "' is not a non-negative integer");
        value = value * 10 + static_cast<std::uint64_t>(c - '0');
    }
    return value;
}

inline bool parse_bool_field(const std::string& text, std::size_t index, std::string_view name) {
    if (text == "True" || text == "true") return true;
    if (text == "False" || text == "false") return false;
    throw MalformedLine(index, std::string(name) + " '" + text + "' is not True/False");
}

inline SyslogRecord record_from_fields(const std::vector<std::string>& f) {
    if (f.size() != record_field_names.size())
        throw MalformedLine(record_field_names.size(),
                            "expected " + std::to_string(record_field_names.size()) +
                                " fields, got " + std::to_string(f.size()));
    SyslogRecord r;
    auto ts = SyslogTimestamp::parse(f[0]);
    if (!ts) throw MalformedLine(0, "bad timestamp '" + f[0] + "'");
    r.timestamp = *ts;
    if (!is_token(f[1])) throw MalformedLine(1, "bad username");
    r.username = f[1];
    if (!is_valid_uuid(f[2])) throw MalformedLine(2, "bad UUID '" + f[2] + "'");
    r.session_id = f[2];
    if (!in_pool(auth_method_pool(), f[3])) throw MalformedLine(3, "bad auth_method '" + f[3] + "'");
    r.auth_method = f[3];
    if (!is_valid_ipv4(f[4])) throw MalformedLine(4, "bad src_ip '" + f[4] + "'");
    r.src_ip = f[4];
    if (!is_token(f[5])) throw MalformedLine(5, "bad src_hostname");
    r.src_hostname = f[5];
    if (!in_pool(action_pool(), f[6])) throw MalformedLine(6, "bad action '" + f[6] + "'");
    r.action = f[6];
    if (f[7].empty()) throw MalformedLine(7, "empty object");
    r.object = f[7];
    if (!is_token(f[8])) throw MalformedLine(8, "bad resource");
    r.resource = f[8];
    r.command = f[9];
    if (!in_pool(status_pool(), f[10])) throw MalformedLine(10, "bad status '" + f[10] + "'");
    r.status = f[10];
    r.bytes = parse_u64_field(f[11], 11, "bytes");
    if (!is_token(f[12])) throw MalformedLine(12, "bad app_name");
    r.app_name = f[12];
    if (!is_valid_ipv4(f[13])) throw MalformedLine(13, "bad dst_ip '" + f[13] + "'");
    r.dst_ip = f[13];
    const std::uint64_t port = parse_u64_field(f[14], 14, "dst_port");
    if (port < 1 || port > 65535) throw MalformedLine(14, "dst_port " + f[14] + " out of range");
    r.dst_port = static_cast<int>(port);
    if (!is_token(f[15])) throw MalformedLine(15, "bad protocol");
    r.protocol = f[15];
    r.duration = parse_u64_field(f[16], 16, "duration");
    if (!in_pool(network_zone_pool(), f[17]))
        throw MalformedLine(17, "bad network_zone '" + f[17] + "'");
    r.network_zone = f[17];
    if (!is_token(f[18])) throw MalformedLine(18, "bad location_category");
    r.location_category = f[18];
    if (!in_pool(criticality_pool(), f[19])) throw MalformedLine(19, "bad criticality '" + f[19] + "'");
    r.criticality = f[19];
    r.is_approved_application = parse_bool_field(f[20], 20, "is_approved_application");
    r.previous_occurrence_count = parse_u64_field(f[21], 21, "previous_occurrence_count");
    return r;
}

inline SyslogRecord parse_structured(std::string_view line) {
    auto ts = SyslogTimestamp::parse(line.substr(0, 15));
    if (!ts) throw MalformedLine(0, "bad timestamp header");
    std::size_t i = 15;
    if (i >= line.size() || line[i] != ' ') throw MalformedLine(0, "missing header separator");
    ++i;
    const std::size_t host_start = i;
    while (i < line.size() && line[i] != ' ') ++i;
    std::string host(line.substr(host_start, i - host_start));
    if (!is_token(host)) throw MalformedLine(5, "bad src_hostname in header");
    while (i < line.size() && line[i] == ' ') ++i;
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(line.substr(i));
    } catch (const nlohmann::json::exception& e) {
        throw MalformedLine(22, std::string("bad JSON payload: ") + e.what());
    }
    // Rebuild the flat field list and reuse the field-level validation.
    std::vector<std::string> f(record_field_names.size());
    f[0] = ts->render();
    f[5] = host;
    try {
        f[1] = j.at("username").get<std::string>();
        f[2] = j.at("session_id").get<std::string>();
        f[3] = j.at("auth_method").get<std::string>();
        f[4] = j.at("src_ip").get<std::string>();
        f[6] = j.at("action").get<std::string>();
        f[7] = j.at("object").get<std::string>();
        f[8] = j.at("resource").get<std::string>();
        f[9] = j.at("command").get<std::string>();
        f[10] = j.at("status").get<std::string>();
        f[11] = format_u64(j.at("bytes").get<std::uint64_t>());
        f[12] = j.at("app_name").get<std::string>();
        f[13] = j.at("dst_ip").get<std::string>();
        f[14] = std::to_string(j.at("dst_port").get<std::int64_t>());
        f[15] = j.at("protocol").get<std::string>();
        f[16] = format_u64(j.at("duration").get<std::uint64_t>());
        f[17] = j.at("network_zone").get<std::string>();
        f[18] = j.at("location_category").get<std::string>();
        f[19] = j.at("criticality").get<std::string>();
        f[20] = bool_text(j.at("is_approved_application").get<bool>());
        f[21] = format_u64(j.at("previous_occurrence_count").get<std::uint64_t>());
    } catch (const nlohmann::json::exception& e) {
        throw MalformedLine(22, std::string("JSON payload field: ") + e.what());
    }
    return record_from_fields(f);
}

}  // namespace detail

// Parses one rendered line (either payload style) back into a record.
// is_threat is never on the wire, so it comes back false. Throws
// MalformedLine on the first violated field.
inline SyslogRecord parse_syslog_line(std::string_view line) {
    if (line.starts_with('<')) {  // optional <PRI> tag
        const std::size_t close = line.find('>');
        if (close == std::string_view::npos || close == 1 || close > 4)
            throw MalformedLine(0, "bad priority tag");
        line.remove_prefix(close + 1);
    }
    // A structured line has a '{' before any comma; a flat line leads with the
    // comma-separated field list.
    const std::size_t brace = line.find('{');
    const std::size_t comma = line.find(',');
    if (brace != std::string_view::npos && (comma == std::string_view::npos || brace < comma))
        return detail::parse_structured(line);
    return detail::record_from_fields(split_fields(line));
}

}  // namespace synlog
