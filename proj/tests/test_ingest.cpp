#include <doctest.h>

#include <cmath>
#include <sstream>

#include "pass2d/ingest.hpp"
#include "test_support.hpp"

using namespace p2d;

namespace {

EventLog sample_log(int n, std::uint64_t seed = 5) {
    EventLog log;
    log.header.source = "test";
    Rng rng(seed);
    for (int i = 0; i < n; ++i) log.events.push_back(test::random_event(rng));
    return log;
}

std::string to_bytes(const EventLog& log) {
    std::ostringstream out;
    write_event_log(log, out);
    return out.str();
}

bool events_close(const PassEvent& a, const PassEvent& b, double tol) {
    if (a.snapshot.cycle != b.snapshot.cycle) return false;
    if (a.snapshot.kicker_unum != b.snapshot.kicker_unum) return false;
    if (a.receiver_unum != b.receiver_unum) return false;
    auto close = [tol](double x, double y) { return std::fabs(x - y) <= tol * std::max(1.0, std::fabs(x)); };
    if (!close(a.snapshot.ball.pos.x, b.snapshot.ball.pos.x)) return false;
    if (!close(a.snapshot.ball.vel.y, b.snapshot.ball.vel.y)) return false;
    for (int i = 0; i < kTeamSize; ++i) {
        const auto& ta = a.snapshot.teammates[static_cast<std::size_t>(i)];
        const auto& tb = b.snapshot.teammates[static_cast<std::size_t>(i)];
        if (ta.unum != tb.unum) return false;
        if (!close(ta.pos.x, tb.pos.x) || !close(ta.pos.y, tb.pos.y)) return false;
        if (!close(ta.body.degree(), tb.body.degree())) return false;
        for (int j = 0; j < PlayerTypeAttrs::kCount; ++j)
            if (!close(ta.ptype.to_array()[static_cast<std::size_t>(j)],
                       tb.ptype.to_array()[static_cast<std::size_t>(j)]))
                return false;
    }
    return true;
}

} // namespace

TEST_CASE("write then parse reproduces the log at declared precision") {
    const EventLog log = sample_log(20);
    std::istringstream in(to_bytes(log));
    const EventLog back = parse_event_log(in);
    CHECK(back.header.source == "test");
    REQUIRE(back.events.size() == log.events.size());
    for (std::size_t i = 0; i < log.events.size(); ++i)
        CHECK(events_close(log.events[i], back.events[i], 1e-8));
}

TEST_CASE("write-parse-write is byte identical") {
    const std::string first = to_bytes(sample_log(25, 17));
    std::istringstream in(first);
    const std::string second = to_bytes(parse_event_log(in));
    CHECK(first == second);
}

TEST_CASE("empty log is a single header line; one event is two lines") {
    EventLog log;
    log.header.source = "empty";
    std::string bytes = to_bytes(log);
    CHECK(std::count(bytes.begin(), bytes.end(), '\n') == 1);

    log.events.push_back(test::make_basic_event());
    bytes = to_bytes(log);
    CHECK(std::count(bytes.begin(), bytes.end(), '\n') == 2);
}

TEST_CASE("byte count matches what was written") {
    const EventLog log = sample_log(3);
    std::ostringstream out;
    const std::size_t n = write_event_log(log, out);
    CHECK(n == out.str().size());
}

TEST_CASE("unknown format version is rejected on line 1") {
    std::istringstream in(R"({"format_version":"9","source":"x","frame":"left"})");
    try {
        parse_event_log(in);
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line() == 1);
        CHECK(std::string(e.what()).find("format_version") != std::string::npos);
    }
}

TEST_CASE("malformed record reports its line number") {
    const EventLog log = sample_log(2);
    std::string bytes = to_bytes(log);
    bytes += "{not json\n";
    std::istringstream in(bytes);
    try {
        parse_event_log(in);
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line() == 4);
    }
}

TEST_CASE("a missing player is identified by side and unum") {
    EventLog log;
    log.events.push_back(test::make_basic_event());
    std::string bytes = to_bytes(log);
    // drop opponent 11 from line 2
    const std::string needle = ",{\"unum\":11";
    const std::size_t opp11 = bytes.rfind(needle);
    REQUIRE(opp11 != std::string::npos);
    const std::size_t end = bytes.find("}]", opp11);
    REQUIRE(end != std::string::npos);
    bytes.erase(opp11, end + 1 - opp11);
    std::istringstream in(bytes);
    try {
        parse_event_log(in);
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line() == 2);
        CHECK(std::string(e.what()).find("MissingPlayer(theirs,11)") != std::string::npos);
    }
}

TEST_CASE("a self pass is rejected with its line number and code") {
    EventLog log;
    log.events.push_back(test::make_basic_event());
    log.events.push_back(test::make_basic_event());
    log.events[1].receiver_unum = log.events[1].snapshot.kicker_unum;
    std::ostringstream out;
    // bypass validation by writing records directly
    write_event_log(log, out);
    std::istringstream in(out.str());
    try {
        parse_event_log(in);
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line() == 3);
        CHECK(std::string(e.what()).find("SelfPass") != std::string::npos);
    }
}

TEST_CASE("mirroring is an involution") {
    Rng rng(31);
    for (int i = 0; i < 50; ++i) {
        const PassEvent e = test::random_event(rng);
        const PassEvent back = mirror_event(mirror_event(e));
        CHECK(std::fabs(back.snapshot.ball.pos.x - e.snapshot.ball.pos.x) < 1e-9);
        CHECK(std::fabs(back.snapshot.ball.pos.y - e.snapshot.ball.pos.y) < 1e-9);
        for (int j = 0; j < kTeamSize; ++j) {
            const auto& pa = e.snapshot.teammates[static_cast<std::size_t>(j)];
            const auto& pb = back.snapshot.teammates[static_cast<std::size_t>(j)];
            CHECK(std::fabs(pa.pos.x - pb.pos.x) < 1e-9);
            CHECK(std::fabs(pa.pos.y - pb.pos.y) < 1e-9);
            CHECK(angle_diff(pa.body, pb.body) < 1e-9);
        }
    }
}

TEST_CASE("right-frame logs are mirrored into the canonical frame") {
    EventLog log = sample_log(4, 41);
    std::string bytes = to_bytes(log);
    const std::size_t pos = bytes.find("\"frame\":\"left\"");
    REQUIRE(pos != std::string::npos);
    bytes.replace(pos, std::string("\"frame\":\"left\"").size(), "\"frame\":\"right\"");
    std::istringstream in(bytes);
    const EventLog back = parse_event_log(in);
    CHECK(back.header.frame == Frame::Left);
    for (std::size_t i = 0; i < log.events.size(); ++i) {
        CHECK(back.events[i].snapshot.ball.pos.x ==
              doctest::Approx(-log.events[i].snapshot.ball.pos.x).epsilon(1e-7));
        CHECK(back.events[i].snapshot.teammates[0].pos.y ==
              doctest::Approx(-log.events[i].snapshot.teammates[0].pos.y).epsilon(1e-7));
    }
}

TEST_CASE("parser never accepts an event that validation rejects") {
    // corrupt a valid line at the JSON level: receiver equal to kicker
    EventLog log;
    PassEvent e = test::make_basic_event();
    log.events.push_back(e);
    std::string bytes = to_bytes(log);
    const std::size_t pos = bytes.find("\"receiver_unum\":9");
    REQUIRE(pos != std::string::npos);
    bytes.replace(pos, std::string("\"receiver_unum\":9").size(), "\"receiver_unum\":7");
    std::istringstream in(bytes);
    CHECK_THROWS_AS(parse_event_log(in), ParseError);
}
