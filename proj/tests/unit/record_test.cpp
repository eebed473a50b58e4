#include <catch2/catch_amalgamated.hpp>

#include "synlog/record.hpp"
#include "synlog/rng.hpp"

using namespace synlog;

namespace {

SyslogRecord plausible_record() {
    SyslogRecord r;
    r.timestamp = {4, 1, 19, 37, 41};
    r.username = "jdoe";
    r.session_id = "f47ac10b-58cc-4372-a567-0e02b2c3d479";
    r.auth_method = "certificate";
    r.src_ip = "10.20.30.40";
    r.src_hostname = "ws-042";
    r.action = "access";
    r.object = "/var/www/html/index.html";
    r.resource = "file-system";
    r.command = "cat /var/www/html/index.html";
    r.status = "success";
    r.bytes = 38775;
    r.app_name = "apache";
    r.dst_ip = "192.168.1.9";
    r.dst_port = 443;
    r.protocol = "HTTPS";
    r.duration = 12;
    r.network_zone = "internal";
    r.location_category = "office";
    r.criticality = "low";
    r.is_approved_application = true;
    r.previous_occurrence_count = 19;
    return r;
}

}  // namespace

TEST_CASE("timestamp renders with zero-padded day", "[record]") {
    CHECK(SyslogTimestamp{4, 1, 19, 37, 41}.render() == "Apr 01 19:37:41");
    CHECK(SyslogTimestamp{12, 31, 0, 0, 0}.render() == "Dec 31 00:00:00");
    CHECK(SyslogTimestamp{1, 9, 5, 3, 7}.render() == "Jan 09 05:03:07");
}

TEST_CASE("timestamp parse inverts render", "[record]") {
    SplitMix64 rng(77);
    for (int i = 0; i < 1000; ++i) {
        SyslogTimestamp t;
        t.month = static_cast<int>(rng.below(12)) + 1;
        t.day = static_cast<int>(rng.below(
                    static_cast<std::uint64_t>(SyslogTimestamp::month_days[static_cast<std::size_t>(t.month - 1)]))) +
                1;
        t.hour = static_cast<int>(rng.below(24));
        t.minute = static_cast<int>(rng.below(60));
        t.second = static_cast<int>(rng.below(60));
        auto back = SyslogTimestamp::parse(t.render());
        REQUIRE(back.has_value());
        REQUIRE(*back == t);
    }
}

TEST_CASE("timestamp parse rejects malformed text", "[record]") {
    CHECK(!SyslogTimestamp::parse("Apr 1 19:37:41"));       // unpadded day
    CHECK(!SyslogTimestamp::parse("Apr 01 19:37:4"));       // short
    CHECK(!SyslogTimestamp::parse("Foo 01 19:37:41"));      // bad month
    CHECK(!SyslogTimestamp::parse("Apr 31 19:37:41"));      // no such day
    CHECK(!SyslogTimestamp::parse("Apr 01 24:00:00"));      // bad hour
    CHECK(!SyslogTimestamp::parse("Apr 01 19-37-41"));      // bad separators
    CHECK(!SyslogTimestamp::parse(""));
}

TEST_CASE("timestamp arithmetic wraps the year boundary", "[record]") {
    const SyslogTimestamp eve{12, 31, 23, 59, 30};
    const auto next = eve.plus_seconds(45);
    CHECK(next == SyslogTimestamp{1, 1, 0, 0, 15});
    const auto prev = SyslogTimestamp{1, 1, 0, 0, 10}.plus_seconds(-20);
    CHECK(prev == SyslogTimestamp{12, 31, 23, 59, 50});
    // to_seconds/from_seconds are inverse over the whole year.
    for (std::int64_t s : {0LL, 86399LL, 86400LL, 31535999LL}) {
        CHECK(SyslogTimestamp::from_seconds(s).to_seconds() == s);
    }
}

TEST_CASE("ipv4 validator enforces dotted-quad form", "[record]") {
    CHECK(is_valid_ipv4("0.0.0.0"));
    CHECK(is_valid_ipv4("255.255.255.255"));
    CHECK(is_valid_ipv4("10.20.30.40"));
    CHECK(!is_valid_ipv4("256.1.1.1"));
    CHECK(!is_valid_ipv4("1.2.3"));
    CHECK(!is_valid_ipv4("1.2.3.4.5"));
    CHECK(!is_valid_ipv4("01.2.3.4"));  // leading zero
    CHECK(!is_valid_ipv4("1.2.3."));
    CHECK(!is_valid_ipv4("a.b.c.d"));
    CHECK(!is_valid_ipv4(""));
}

TEST_CASE("uuid validator accepts both cases but fixed shape", "[record]") {
    CHECK(is_valid_uuid("f47ac10b-58cc-4372-a567-0e02b2c3d479"));
    CHECK(is_valid_uuid("F47AC10B-58CC-4372-A567-0E02B2C3D479"));
    CHECK(!is_valid_uuid("f47ac10b58cc4372a5670e02b2c3d479"));
    CHECK(!is_valid_uuid("f47ac10b-58cc-4372-a567-0e02b2c3d47"));
    CHECK(!is_valid_uuid("g47ac10b-58cc-4372-a567-0e02b2c3d479"));
}

TEST_CASE("validate_record passes a plausible record", "[record]") {
    CHECK(validate_record(plausible_record()).ok());
}

TEST_CASE("validate_record reports each broken field", "[record]") {
    auto r = plausible_record();
    r.auth_method = "telepathy";
    r.src_ip = "999.1.1.1";
    r.dst_port = 0;
    r.status = "maybe";
    const auto verdict = validate_record(r);
    REQUIRE(verdict.violations.size() == 4);
    CHECK(verdict.violations[0].field == "auth_method");
    CHECK(verdict.violations[1].field == "src_ip");
    CHECK(verdict.violations[2].field == "status");
    CHECK(verdict.violations[3].field == "dst_port");
}

TEST_CASE("record field name table has 22 entries matching the glossary", "[record]") {
    REQUIRE(record_field_names.size() == 22);
    const auto& glossary = record_field_glossary();
    REQUIRE(glossary.size() == 22);
    for (std::size_t i = 0; i < 22; ++i) {
        CHECK(glossary[i].first == record_field_names[i]);
    }
    CHECK(record_field_names.front() == "timestamp");
    CHECK(record_field_names.back() == "previous_occurrence_count");
}
