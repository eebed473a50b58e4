#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <unordered_set>
#include <vector>

#include "synlog/codec.hpp"
#include "synlog/error.hpp"
#include "synlog/pools.hpp"
#include "synlog/record.hpp"
#include "synlog/rng.hpp"
#include "synlog/scenario.hpp"

namespace synlog {

enum class ThreatPlacement { uniform, append };

inline ThreatPlacement threat_placement_from_string(std::string_view s) {
    if (s == "uniform") return ThreatPlacement::uniform;
    if (s == "append") return ThreatPlacement::append;
    throw ConfigError("unknown threat placement '" + std::string(s) + "' (uniform|append)");
}

struct GenerationSpec {
    std::uint64_t standard_count = 0;
    std::uint64_t threat_count = 0;
    std::uint64_t seed = 0;
    std::string server_host = "127.0.0.1";
    int server_port = 514;
    SyslogTimestamp base_timestamp{4, 1, 19, 30, 0};
    std::uint32_t min_jitter_seconds = 1;   // inter-record gap, inclusive
    std::uint32_t max_jitter_seconds = 30;
    std::string output_csv_path;
    std::string output_raw_path;
    PayloadStyle payload = PayloadStyle::flat_csv;
    ThreatPlacement placement = ThreatPlacement::uniform;
    std::optional<std::string> pools_path;
};

namespace detail {

// Stream indices reserved for draws that are not tied to a record position.
inline constexpr std::uint64_t placement_stream_index = 0xFFFFFFFF00000001ull;

inline std::string random_pool_ip(SplitMix64& g) {
    // 192.168/16, 172.16/12, 10/8 — the standard private ranges.
    const std::uint64_t family = g.below(3);
    const int o4 = static_cast<int>(1 + g.below(254));
    const int o3 = static_cast<int>(g.below(256));
    if (family == 0)
        return "192.168." + std::to_string(o3) + "." + std::to_string(o4);
    if (family == 1)
        return "172." + std::to_string(16 + g.below(16)) + "." + std::to_string(o3) + "." +
               std::to_string(o4);
    return "10." + std::to_string(g.below(256)) + "." + std::to_string(o3) + "." +
           std::to_string(o4);
}

inline std::string random_external_ip(SplitMix64& g) {
    // TEST-NET-3, safe for documentation and synthetic data.
    return "203.0.113." + std::to_string(1 + g.below(254));
}

inline std::string weighted_pick3(SplitMix64& g, const std::vector<std::uint32_t>& weights,
                                  const std::array<std::string_view, 3>& values) {
    const std::uint64_t total = weights[0] + weights[1] + weights[2];
    const std::uint64_t roll = g.below(total);
    if (roll < weights[0]) return std::string(values[0]);
    if (roll < weights[0] + weights[1]) return std::string(values[1]);
    return std::string(values[2]);
}

inline std::string fill_template(const std::string& tmpl, const std::string& object,
                                 const std::string& external_ip) {
    std::string out;
    out.reserve(tmpl.size());
    for (std::size_t i = 0; i < tmpl.size();) {
        if (tmpl.compare(i, 8, "{object}") == 0) {
            out += object;
            i += 8;
        } else if (tmpl.compare(i, 13, "{external_ip}") == 0) {
            out += external_ip;
            i += 13;
        } else {
            out.push_back(tmpl[i++]);
        }
    }
    return out;
}

// Field draws shared by standard and threat records. The draw order is fixed;
// changing it changes every generated dataset.
inline void draw_common_front(SyslogRecord& r, SplitMix64& g, const FieldPools& pools) {
    r.username = g.pick(pools.usernames);
    r.src_hostname = g.pick(pools.hostnames);
    r.auth_method = std::string(g.pick(auth_method_pool()));
    r.src_ip = random_pool_ip(g);
    r.object = g.pick(pools.objects);
    r.resource = g.pick(pools.resources);
}

inline void draw_common_back(SyslogRecord& r, SplitMix64& g, const FieldPools& pools) {
    r.dst_ip = random_pool_ip(g);
    r.dst_port = static_cast<int>(1024 + g.below(65535 - 1024 + 1));
    r.protocol = g.pick(pools.protocols);
    r.duration = g.below(4000);
    r.network_zone =
        weighted_pick3(g, pools.zone_weights, {"internal", "dmz", "external"});
    r.location_category = g.pick(pools.locations);
}

inline SyslogRecord draw_standard(SplitMix64& g, const FieldPools& pools) {
    SyslogRecord r;
    draw_common_front(r, g, pools);
    r.action = std::string(g.pick(action_pool()));
    r.command = g.pick(pools.commands);
    r.status = g.below(1000) < pools.failure_permille ? "failure" : "success";
    r.bytes = g.below(100000);
    r.app_name = g.pick(pools.app_names);
    draw_common_back(r, g, pools);
    r.criticality = weighted_pick3(g, pools.criticality_weights, {"low", "medium", "high"});
    r.is_approved_application = g.below(1000) < pools.approved_permille;
    r.previous_occurrence_count = g.below(30);
    r.is_threat = false;
    return r;
}

inline SyslogRecord draw_threat(SplitMix64& g, const FieldPools& pools,
                                const ThreatScenario& sc) {
    SyslogRecord r;
    draw_common_front(r, g, pools);
    r.action = sc.action.empty() ? std::string(g.pick(action_pool())) : sc.action;
    r.command = fill_template(sc.command_template, r.object, random_external_ip(g));
    r.status = sc.status.empty()
                   ? (g.below(1000) < pools.failure_permille ? "failure" : "success")
                   : sc.status;
    r.bytes = std::max<std::uint64_t>(g.below(100000), sc.min_bytes);
    r.app_name = g.pick(sc.app_pool);
    draw_common_back(r, g, pools);
    r.criticality = sc.criticality.empty()
                        ? weighted_pick3(g, pools.criticality_weights, {"low", "medium", "high"})
                        : sc.criticality;
    r.is_approved_application = g.below(1000) < sc.approved_permille;
    r.previous_occurrence_count =
        std::max<std::uint64_t>(g.below(30), sc.min_previous_occurrences);
    r.is_threat = true;
    return r;
}

inline std::set<std::uint64_t> draw_threat_positions(std::uint64_t seed, std::uint64_t total,
                                                     std::uint64_t count,
                                                     ThreatPlacement placement) {
    std::set<std::uint64_t> positions;
    if (placement == ThreatPlacement::append) {
        for (std::uint64_t i = total - count; i < total; ++i) positions.insert(i);
        return positions;
    }
    SplitMix64 g = SplitMix64::stream(seed, placement_stream_index);
    while (positions.size() < count) positions.insert(g.below(total));
    return positions;
}

}  // namespace detail

// Deterministic synthesis: the full dataset is a pure function of the spec
// (seed included) and the scenario list. Each record index draws from its own
// RNG stream, so the records at non-threat indices are identical whether or
// not threats are planted elsewhere.
inline std::vector<SyslogRecord> synthesize_dataset(const GenerationSpec& spec,
                                                    const std::vector<ThreatScenario>& scenarios,
                                                    const FieldPools& pools) {
    if (spec.threat_count > 0 && scenarios.empty())
        throw ConfigError("threat_count > 0 but the scenario list is empty");
    if (spec.min_jitter_seconds > spec.max_jitter_seconds)
        throw ConfigError("jitter range inverted");
    pools.validate();

    const std::uint64_t total = spec.standard_count + spec.threat_count;
    std::vector<SyslogRecord> out;
    out.reserve(total);
    if (total == 0) return out;

    const std::set<std::uint64_t> threat_at = detail::draw_threat_positions(
        spec.seed, total, spec.threat_count, spec.placement);

    std::unordered_set<std::string> seen_ids;
    seen_ids.reserve(total * 2);
    SyslogTimestamp ts = spec.base_timestamp;
    std::uint64_t threat_rank = 0;

    for (std::uint64_t i = 0; i < total; ++i) {
        SplitMix64 g = SplitMix64::stream(spec.seed, i);
        const std::uint64_t span = spec.max_jitter_seconds - spec.min_jitter_seconds + 1;
        ts = ts.plus_seconds(static_cast<std::int64_t>(spec.min_jitter_seconds + g.below(span)));

        std::string id = uuid4(g);
        while (!seen_ids.insert(id).second) id = uuid4(g);

        SyslogRecord r;
        if (threat_at.contains(i)) {
            const ThreatScenario& sc = scenarios[threat_rank % scenarios.size()];
            ++threat_rank;
            r = detail::draw_threat(g, pools, sc);
        } else {
            r = detail::draw_standard(g, pools);
        }
        r.timestamp = ts;
        r.session_id = std::move(id);

        if (auto verdict = validate_record(r); !verdict.ok())
            throw ConfigError("generated record violates '" + verdict.violations.front().field +
                              "': " + verdict.violations.front().detail +
                              " (check the value pools)");
        out.push_back(std::move(r));
    }
    return out;
}

inline std::vector<SyslogRecord> synthesize_dataset(const GenerationSpec& spec,
                                                    const std::vector<ThreatScenario>& scenarios) {
    const FieldPools pools =
        spec.pools_path ? load_pools(*spec.pools_path) : default_pools();
    return synthesize_dataset(spec, scenarios, pools);
}

}  // namespace synlog
