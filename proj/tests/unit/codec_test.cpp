#include <catch2/catch_amalgamated.hpp>

#include <string>

#include "synlog/codec.hpp"
#include "synlog/generator.hpp"

using namespace synlog;

namespace {

// A raw control-dataset line in the documented wire format.
const std::string kControlLine =
    "Apr 01 19:37:41, apache, c43c337e-7de9-4e6a-aace-325c5a004ea6, certificate, "
    "192.168.252.72, thin-client01, access, /var/www/html/index.php, file-system, "
    "chmod 644 /etc/config.xml, failure, 38775, named, 172.16.229.198, 58449,SFTP, "
    "716, internal, office, low, True, 19";

// A raw threat line: quoted command with embedded doubled quotes.
const std::string kThreatLine =
    "Apr 01 19:47:59, rbrown, a230d494-1647-4e50-ab74-7605d20439ac, kerberos, "
    "172.16.41.101, tablet01, access,system,file-system, "
    "\"perl -e 'exec \"\"/bin/sh\"\";'\", success, 2491, oracle,10.0.138.167, 7523, "
    "SFTP, 1732, internal, office, high, False, 4";

SyslogRecord sample_record() {
    SyslogRecord r;
    r.timestamp = {4, 1, 19, 37, 41};
    r.username = "apache";
    r.session_id = "c43c337e-7de9-4e6a-aace-325c5a004ea6";
    r.auth_method = "certificate";
    r.src_ip = "192.168.252.72";
    r.src_hostname = "thin-client01";
    r.action = "access";
    r.object = "/var/www/html/index.php";
    r.resource = "file-system";
    r.command = "chmod 644 /etc/config.xml";
    r.status = "failure";
    r.bytes = 38775;
    r.app_name = "named";
    r.dst_ip = "172.16.229.198";
    r.dst_port = 58449;
    r.protocol = "SFTP";
    r.duration = 716;
    r.network_zone = "internal";
    r.location_category = "office";
    r.criticality = "low";
    r.is_approved_application = true;
    r.previous_occurrence_count = 19;
    return r;
}

}  // namespace

TEST_CASE("parses a documented benign raw line field by field", "[codec]") {
    const auto r = parse_syslog_line(kControlLine);
    CHECK(r.timestamp.render() == "Apr 01 19:37:41");
    CHECK(r.username == "apache");
    CHECK(r.session_id == "c43c337e-7de9-4e6a-aace-325c5a004ea6");
    CHECK(r.auth_method == "certificate");
    CHECK(r.src_ip == "192.168.252.72");
    CHECK(r.src_hostname == "thin-client01");
    CHECK(r.action == "access");
    CHECK(r.object == "/var/www/html/index.php");
    CHECK(r.command == "chmod 644 /etc/config.xml");
    CHECK(r.status == "failure");
    CHECK(r.bytes == 38775);
    CHECK(r.app_name == "named");
    CHECK(r.dst_port == 58449);
    CHECK(r.protocol == "SFTP");
    CHECK(r.duration == 716);
    CHECK(r.criticality == "low");
    CHECK(r.is_approved_application == true);
    CHECK(r.previous_occurrence_count == 19);
    CHECK(r.is_threat == false);  // truth never rides the wire
}

TEST_CASE("parses a documented threat raw line with quoted shell command", "[codec]") {
    const auto r = parse_syslog_line(kThreatLine);
    CHECK(r.username == "rbrown");
    CHECK(r.auth_method == "kerberos");
    CHECK(r.object == "system");
    CHECK(r.command == "perl -e 'exec \"/bin/sh\";'");
    CHECK(r.status == "success");
    CHECK(r.app_name == "oracle");
    CHECK(r.criticality == "high");
    CHECK(r.is_approved_application == false);
    CHECK(r.previous_occurrence_count == 4);
}

TEST_CASE("flat render parses back to an identical record", "[codec]") {
    const auto r = sample_record();
    const auto line = render_rfc3164(r);
    CHECK(line.starts_with("Apr 01 19:37:41, apache, "));
    CHECK(parse_syslog_line(line) == r);
}

TEST_CASE("commands with commas survive the quote-doubling round trip", "[codec]") {
    auto r = sample_record();
    r.command = "find /data -name \"*.db\" -exec cp {} /tmp/out \\;, then tar";
    const auto line = render_rfc3164(r);
    CHECK(parse_syslog_line(line) == r);
}

TEST_CASE("priority tag is opt-in and accepted on parse", "[codec]") {
    const auto r = sample_record();
    const auto plain = render_rfc3164(r);
    const auto tagged = render_rfc3164(r, PayloadStyle::flat_csv, true);
    CHECK(!plain.starts_with("<"));
    CHECK(tagged == "<14>" + plain);
    CHECK(parse_syslog_line(tagged) == r);
}

TEST_CASE("structured render keeps the header and embeds ordered JSON", "[codec]") {
    const auto r = sample_record();
    const auto line = render_rfc3164(r, PayloadStyle::structured);
    CHECK(line.starts_with("Apr 01 19:37:41 thin-client01 {\"username\":\"apache\""));
    CHECK(line.find("\"is_threat\"") == std::string::npos);
    CHECK(parse_syslog_line(line) == r);
    // With the priority tag as well.
    const auto tagged = render_rfc3164(r, PayloadStyle::structured, true);
    CHECK(tagged.starts_with("<14>Apr 01"));
    CHECK(parse_syslog_line(tagged) == r);
}

TEST_CASE("render never leaks ground truth in either style", "[codec]") {
    auto r = sample_record();
    r.is_threat = true;
    auto flagged = r;
    flagged.is_threat = false;
    CHECK(render_rfc3164(r) == render_rfc3164(flagged));
    CHECK(render_rfc3164(r, PayloadStyle::structured) ==
          render_rfc3164(flagged, PayloadStyle::structured));
}

TEST_CASE("malformed lines report the first violated field", "[codec]") {
    auto fields_line = [&](std::size_t index, const std::string& bad) {
        auto r = sample_record();
        auto line = render_rfc3164(r);
        auto fields = split_fields(line);
        fields[index] = bad;
        return join_fields(fields, ", ");
    };

    auto field_of = [](const std::string& line) -> std::size_t {
        try {
            parse_syslog_line(line);
        } catch (const MalformedLine& e) {
            return e.field_index;
        }
        return static_cast<std::size_t>(-1);
    };

    CHECK(field_of("just,two") == 22);                       // wrong field count
    CHECK(field_of(fields_line(0, "Apr 1 19:37:41")) == 0);  // unpadded day
    CHECK(field_of(fields_line(2, "not-a-uuid")) == 2);
    CHECK(field_of(fields_line(3, "voodoo")) == 3);
    CHECK(field_of(fields_line(4, "300.1.2.3")) == 4);
    CHECK(field_of(fields_line(10, "meh")) == 10);
    CHECK(field_of(fields_line(11, "-5")) == 11);
    CHECK(field_of(fields_line(14, "70000")) == 14);
    CHECK(field_of(fields_line(19, "extreme")) == 19);
    CHECK(field_of(fields_line(20, "yes")) == 20);
    CHECK(field_of("<9999>" + render_rfc3164(sample_record())) == 0);
    CHECK(field_of("Apr 01 19:37:41 host {broken") == 22);  // structured, bad JSON
}

TEST_CASE("all generated records round-trip in both payload styles", "[codec][property]") {
    GenerationSpec spec;
    spec.standard_count = 381;
    spec.threat_count = 4;
    spec.seed = 4242;
    const auto records = synthesize_dataset(spec, default_scenarios());
    REQUIRE(records.size() == 385);
    for (const auto& rec : records) {
        auto flat = parse_syslog_line(render_rfc3164(rec));
        auto structured = parse_syslog_line(render_rfc3164(rec, PayloadStyle::structured));
        // Ground truth is not transported, so compare with it cleared.
        auto expect = rec;
        expect.is_threat = false;
        CHECK(flat == expect);
        CHECK(structured == expect);
    }
}
