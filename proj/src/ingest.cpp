#include "pass2d/ingest.hpp"

#include <fstream>
#include <ostream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "pass2d/common.hpp"

namespace p2d {

namespace {

using nlohmann::json;

void append_vec(std::string& out, const Vec2& v) {
    out += '[';
    out += format_g9(v.x);
    out += ',';
    out += format_g9(v.y);
    out += ']';
}

void append_player(std::string& out, const PlayerState& p) {
    out += "{\"unum\":";
    out += std::to_string(p.unum);
    out += ",\"pos\":";
    append_vec(out, p.pos);
    out += ",\"vel\":";
    append_vec(out, p.vel);
    out += ",\"body\":";
    out += format_g9(p.body.degree());
    out += ",\"ptype\":[";
    const auto attrs = p.ptype.to_array();
    for (int i = 0; i < PlayerTypeAttrs::kCount; ++i) {
        if (i) out += ',';
        out += format_g9(attrs[static_cast<std::size_t>(i)]);
    }
    out += "]}";
}

std::string event_line(const PassEvent& e) {
    std::string out;
    out.reserve(1600);
    out += "{\"cycle\":";
    out += std::to_string(e.snapshot.cycle);
    out += ",\"ball\":{\"pos\":";
    append_vec(out, e.snapshot.ball.pos);
    out += ",\"vel\":";
    append_vec(out, e.snapshot.ball.vel);
    out += "},\"teammates\":[";
    for (int i = 0; i < kTeamSize; ++i) {
        if (i) out += ',';
        append_player(out, e.snapshot.teammates[static_cast<std::size_t>(i)]);
    }
    out += "],\"opponents\":[";
    for (int i = 0; i < kTeamSize; ++i) {
        if (i) out += ',';
        append_player(out, e.snapshot.opponents[static_cast<std::size_t>(i)]);
    }
    out += "],\"kicker_unum\":";
    out += std::to_string(e.snapshot.kicker_unum);
    out += ",\"receiver_unum\":";
    out += std::to_string(e.receiver_unum);
    out += '}';
    return out;
}

std::string header_line(const LogHeader& h) {
    json j; // header has no floats, so library escaping/serialization is fine
    std::string out = "{\"format_version\":";
    out += json(h.format_version).dump();
    out += ",\"source\":";
    out += json(h.source).dump();
    out += ",\"frame\":\"";
    out += (h.frame == Frame::Left ? "left" : "right");
    out += "\"}";
    return out;
}

const json& require_key(const json& j, const char* key, std::size_t line) {
    auto it = j.find(key);
    if (it == j.end()) throw ParseError(line, std::string("missing key '") + key + "'");
    return *it;
}

void reject_unknown(const json& j, const std::set<std::string>& allowed, std::size_t line) {
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!allowed.count(it.key()))
            throw ParseError(line, "unknown key '" + it.key() + "'");
}

Vec2 parse_vec(const json& j, const char* what, std::size_t line) {
    if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
        throw ParseError(line, std::string(what) + " must be a [x,y] number pair");
    return {j[0].get<double>(), j[1].get<double>()};
}

PlayerState parse_player(const json& j, Side side, std::size_t line) {
    if (!j.is_object()) throw ParseError(line, "player record must be an object");
    reject_unknown(j, {"unum", "pos", "vel", "body", "ptype"}, line);
    PlayerState p;
    p.side = side;
    const json& unum = require_key(j, "unum", line);
    if (!unum.is_number_integer()) throw ParseError(line, "unum must be an integer");
    p.unum = unum.get<int>();
    p.pos = parse_vec(require_key(j, "pos", line), "pos", line);
    p.vel = parse_vec(require_key(j, "vel", line), "vel", line);
    const json& body = require_key(j, "body", line);
    if (!body.is_number()) throw ParseError(line, "body must be a number");
    p.body = AngleDeg(body.get<double>());
    const json& pt = require_key(j, "ptype", line);
    if (!pt.is_array() || pt.size() != PlayerTypeAttrs::kCount)
        throw ParseError(line, "ptype must be an array of 9 numbers");
    std::array<double, PlayerTypeAttrs::kCount> attrs{};
    for (int i = 0; i < PlayerTypeAttrs::kCount; ++i) {
        if (!pt[static_cast<std::size_t>(i)].is_number())
            throw ParseError(line, "ptype must be an array of 9 numbers");
        attrs[static_cast<std::size_t>(i)] = pt[static_cast<std::size_t>(i)].get<double>();
    }
    p.ptype = PlayerTypeAttrs::from_array(attrs);
    return p;
}

void parse_side(const json& arr, Side side, std::array<PlayerState, kTeamSize>& out,
                std::size_t line) {
    if (!arr.is_array()) throw ParseError(line, "player list must be an array");
    if (arr.size() != kTeamSize) {
        // identify the absent unums for the error message
        std::set<int> present;
        for (const auto& pj : arr)
            if (pj.is_object() && pj.contains("unum") && pj["unum"].is_number_integer())
                present.insert(pj["unum"].get<int>());
        for (int u = 1; u <= kTeamSize; ++u)
            if (!present.count(u))
                throw ParseError(line, std::string("MissingPlayer(") + side_name(side) + "," +
                                           std::to_string(u) + ")");
        throw ParseError(line, std::string("expected 11 players for ") + side_name(side));
    }
    for (int i = 0; i < kTeamSize; ++i)
        out[static_cast<std::size_t>(i)] = parse_player(arr[static_cast<std::size_t>(i)], side, line);
}

PassEvent parse_event(const json& j, std::size_t line) {
    if (!j.is_object()) throw ParseError(line, "event record must be an object");
    reject_unknown(j, {"cycle", "ball", "teammates", "opponents", "kicker_unum", "receiver_unum"},
                   line);
    PassEvent e;
    const json& cycle = require_key(j, "cycle", line);
    if (!cycle.is_number_integer()) throw ParseError(line, "cycle must be an integer");
    e.snapshot.cycle = cycle.get<int>();
    const json& ball = require_key(j, "ball", line);
    if (!ball.is_object()) throw ParseError(line, "ball must be an object");
    reject_unknown(ball, {"pos", "vel"}, line);
    e.snapshot.ball.pos = parse_vec(require_key(ball, "pos", line), "ball.pos", line);
    e.snapshot.ball.vel = parse_vec(require_key(ball, "vel", line), "ball.vel", line);
    parse_side(require_key(j, "teammates", line), Side::Ours, e.snapshot.teammates, line);
    parse_side(require_key(j, "opponents", line), Side::Theirs, e.snapshot.opponents, line);
    const json& ku = require_key(j, "kicker_unum", line);
    const json& ru = require_key(j, "receiver_unum", line);
    if (!ku.is_number_integer() || !ru.is_number_integer())
        throw ParseError(line, "kicker_unum/receiver_unum must be integers");
    e.snapshot.kicker_unum = ku.get<int>();
    e.receiver_unum = ru.get<int>();
    return e;
}

} // namespace

PassEvent mirror_event(const PassEvent& e) {
    PassEvent m = e;
    auto flip_player = [](PlayerState& p) {
        p.pos = {-p.pos.x, -p.pos.y};
        p.vel = {-p.vel.x, -p.vel.y};
        p.body = AngleDeg(p.body.degree() + 180.0);
    };
    m.snapshot.ball.pos = {-e.snapshot.ball.pos.x, -e.snapshot.ball.pos.y};
    m.snapshot.ball.vel = {-e.snapshot.ball.vel.x, -e.snapshot.ball.vel.y};
    for (auto& p : m.snapshot.teammates) flip_player(p);
    for (auto& p : m.snapshot.opponents) flip_player(p);
    return m;
}

EventLog parse_event_log(std::istream& in) {
    std::string line;
    std::size_t lineno = 0;

    if (!std::getline(in, line)) throw ParseError(1, "empty input: missing header record");
    ++lineno;

    json hj;
    try {
        hj = json::parse(line);
    } catch (const json::exception& ex) {
        throw ParseError(lineno, std::string("malformed header: ") + ex.what());
    }
    if (!hj.is_object()) throw ParseError(lineno, "header must be an object");
    reject_unknown(hj, {"format_version", "source", "frame"}, lineno);
    EventLog log;
    const json& ver = require_key(hj, "format_version", lineno);
    if (!ver.is_string() || ver.get<std::string>() != "1")
        throw ParseError(lineno, "unknown format_version " + ver.dump());
    log.header.format_version = "1";
    const json& src = require_key(hj, "source", lineno);
    if (!src.is_string()) throw ParseError(lineno, "source must be a string");
    log.header.source = src.get<std::string>();
    const json& fr = require_key(hj, "frame", lineno);
    if (!fr.is_string() || (fr.get<std::string>() != "left" && fr.get<std::string>() != "right"))
        throw ParseError(lineno, "frame must be \"left\" or \"right\"");
    const bool mirror = fr.get<std::string>() == "right";
    log.header.frame = Frame::Left; // canonical in memory

    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        json ej;
        try {
            ej = json::parse(line);
        } catch (const json::exception& ex) {
            throw ParseError(lineno, std::string("malformed record: ") + ex.what());
        }
        PassEvent e = parse_event(ej, lineno);
        if (mirror) e = mirror_event(e);
        const auto violations = validate_event(e);
        if (!violations.empty()) {
            std::string msg = "invalid event:";
            for (const auto& v : violations) msg += " " + v.detail;
            throw ParseError(lineno, msg);
        }
        log.events.push_back(std::move(e));
    }
    return log;
}

EventLog parse_event_log_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    return parse_event_log(in);
}

std::size_t write_event_log(const EventLog& log, std::ostream& out) {
    std::size_t bytes = 0;
    auto put = [&](const std::string& s) {
        out.write(s.data(), static_cast<std::streamsize>(s.size()));
        out.put('\n');
        bytes += s.size() + 1;
    };
    put(header_line(log.header));
    for (const auto& e : log.events) put(event_line(e));
    if (!out) throw IoError("event log write failed");
    return bytes;
}

std::size_t write_event_log_file(const EventLog& log, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path + " for writing");
    return write_event_log(log, out);
}

} // namespace p2d
