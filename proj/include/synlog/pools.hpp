#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "synlog/csv.hpp"
#include "synlog/error.hpp"

#include "json.hpp"

namespace synlog {

// Default value pools for standard (non-threat) records. The defaults are a
// fixed corpus so that a given seed always reproduces the same dataset; they
// can be replaced wholesale by loading an edited JSON copy (see
// assets/pools.json).
//
// Standard commands are deliberately mundane: none of them may match the
// baseline detector's suspicious-command patterns, and in particular none may
// match the severe shell-spawn/exfiltration tier.
struct FieldPools {
    std::vector<std::string> usernames;
    std::vector<std::string> hostnames;
    std::vector<std::string> app_names;
    std::vector<std::string> objects;
    std::vector<std::string> resources;
    std::vector<std::string> commands;  // benign only
    std::vector<std::string> protocols;
    std::vector<std::string> locations;

    // Weighted draws for standard records, expressed in 1/1000ths.
    std::uint32_t approved_permille = 920;          // is_approved_application = True
    std::uint32_t failure_permille = 200;           // status = failure
    std::vector<std::uint32_t> criticality_weights = {500, 300, 200};  // low, medium, high
    std::vector<std::uint32_t> zone_weights = {700, 200, 100};         // internal, dmz, external

    void validate() const {
        auto nonempty = [](const auto& pool, const char* name) {
            if (pool.empty()) throw ConfigError(std::string("pools: empty pool '") + name + "'");
        };
        nonempty(usernames, "usernames");
        nonempty(hostnames, "hostnames");
        nonempty(app_names, "app_names");
        nonempty(objects, "objects");
        nonempty(resources, "resources");
        nonempty(commands, "commands");
        nonempty(protocols, "protocols");
        nonempty(locations, "locations");
        if (criticality_weights.size() != 3) throw ConfigError("pools: criticality_weights needs 3 entries");
        if (zone_weights.size() != 3) throw ConfigError("pools: zone_weights needs 3 entries");
        if (approved_permille > 1000 || failure_permille > 1000)
            throw ConfigError("pools: permille values must be <= 1000");
    }
};

inline FieldPools default_pools() {
    FieldPools p;
    p.usernames = {"apache",  "rbrown",   "jsmith", "mjones",  "lchen",
                   "akhan",   "dwilliams", "tnguyen", "svc-backup", "svc-report"};
    p.hostnames = {"thin-client01", "tablet01",  "ws-eng-04",  "laptop07",
                   "vdi-23",        "kiosk-03",  "build-srv02", "jump-host01"};
    p.app_names = {"named",  "oracle",  "sshd",   "nginx", "postgres",
                   "chrome", "excel",   "slack",  "backup-agent", "rsyslogd"};
    p.objects = {"/var/www/html/index.php",
                 "/etc/config.xml",
                 "/home/shared/q3-report.xlsx",
                 "/var/log/auth.log",
                 "customers.db",
                 "/opt/app/settings.yaml",
                 "/srv/share/designs/blueprint.cad",
                 "/var/spool/mail/ops",
                 "system"};
    p.resources = {"file-system", "database", "web-service", "directory-service", "message-queue"};
    p.commands = {"chmod 644 /etc/config.xml",
                  "systemctl status nginx",
                  "SELECT count(*) FROM orders WHERE region = 'east'",
                  "cp /srv/share/report.pdf /home/jsmith/",
                  "ls -la /var/www",
                  "grep -c error /var/log/syslog",
                  "df -h /srv",
                  "git pull origin main",
                  "echo \"rotate, archive\" >> /var/log/ops.log",
                  "ping -c 1 10.0.0.5"};
    p.protocols = {"SFTP", "HTTPS", "SSH", "SMB", "LDAP", "RDP"};
    p.locations = {"office", "remote", "datacenter", "branch"};
    return p;
}

inline void to_json(nlohmann::json& j, const FieldPools& p) {
    j = nlohmann::json{{"usernames", p.usernames},
                       {"hostnames", p.hostnames},
                       {"app_names", p.app_names},
                       {"objects", p.objects},
                       {"resources", p.resources},
                       {"commands", p.commands},
                       {"protocols", p.protocols},
                       {"locations", p.locations},
                       {"approved_permille", p.approved_permille},
                       {"failure_permille", p.failure_permille},
                       {"criticality_weights", p.criticality_weights},
                       {"zone_weights", p.zone_weights}};
}

inline void from_json(const nlohmann::json& j, FieldPools& p) {
    j.at("usernames").get_to(p.usernames);
    j.at("hostnames").get_to(p.hostnames);
    j.at("app_names").get_to(p.app_names);
    j.at("objects").get_to(p.objects);
    j.at("resources").get_to(p.resources);
    j.at("commands").get_to(p.commands);
    j.at("protocols").get_to(p.protocols);
    j.at("locations").get_to(p.locations);
    if (j.contains("approved_permille")) j.at("approved_permille").get_to(p.approved_permille);
    if (j.contains("failure_permille")) j.at("failure_permille").get_to(p.failure_permille);
    if (j.contains("criticality_weights")) j.at("criticality_weights").get_to(p.criticality_weights);
    if (j.contains("zone_weights")) j.at("zone_weights").get_to(p.zone_weights);
}

inline FieldPools load_pools(const std::string& path) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_text_file(path));
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(path + ": " + e.what());
    }
    FieldPools p = j.get<FieldPools>();
    p.validate();
    return p;
}

}  // namespace synlog
