#include "pass2d/model.hpp"

#include <cmath>
#include <set>

namespace p2d {

const PlayerState* WorldSnapshot::teammate(int unum) const {
    for (const auto& p : teammates)
        if (p.unum == unum) return &p;
    return nullptr;
}

const char* violation_code_name(ViolationCode c) {
    switch (c) {
    case ViolationCode::BadCycle: return "BadCycle";
    case ViolationCode::NonFinite: return "NonFinite";
    case ViolationCode::OutOfBounds: return "OutOfBounds";
    case ViolationCode::BallTooFast: return "BallTooFast";
    case ViolationCode::PlayerTooFast: return "PlayerTooFast";
    case ViolationCode::BadUnum: return "BadUnum";
    case ViolationCode::DuplicateUnum: return "DuplicateUnum";
    case ViolationCode::WrongSide: return "WrongSide";
    case ViolationCode::BadPlayerType: return "BadPlayerType";
    case ViolationCode::KickerMissing: return "KickerMissing";
    case ViolationCode::KickerFarFromBall: return "KickerFarFromBall";
    case ViolationCode::SelfPass: return "SelfPass";
    case ViolationCode::ReceiverMissing: return "ReceiverMissing";
    }
    return "?";
}

namespace {

bool in_field(const Vec2& p) {
    return std::fabs(p.x) <= kFieldHalfLength + kFieldTolerance &&
           std::fabs(p.y) <= kFieldHalfWidth + kFieldTolerance;
}

void add(std::vector<Violation>& out, ViolationCode code, const std::string& detail) {
    out.push_back({code, std::string(violation_code_name(code)) + "(" + detail + ")"});
}

void check_players(std::vector<Violation>& out, const std::array<PlayerState, kTeamSize>& players,
                   Side expected) {
    std::set<int> seen;
    for (const auto& p : players) {
        const std::string who = std::string(side_name(expected)) + "," + std::to_string(p.unum);
        if (p.side != expected) add(out, ViolationCode::WrongSide, who);
        if (p.unum < 1 || p.unum > kTeamSize) {
            add(out, ViolationCode::BadUnum, who);
        } else if (!seen.insert(p.unum).second) {
            add(out, ViolationCode::DuplicateUnum, who);
        }
        if (!p.pos.finite() || !p.vel.finite() || !std::isfinite(p.body.degree())) {
            add(out, ViolationCode::NonFinite, who);
            continue;
        }
        if (!in_field(p.pos)) add(out, ViolationCode::OutOfBounds, who);
        if (p.vel.norm() > kMaxPlayerSpeed) add(out, ViolationCode::PlayerTooFast, who);
        bool ptype_ok = true;
        for (double v : p.ptype.to_array())
            if (!std::isfinite(v)) ptype_ok = false;
        if (p.ptype.size <= 0.0 || p.ptype.kickable_area <= 0.0 || p.ptype.max_speed <= 0.0)
            ptype_ok = false;
        if (!ptype_ok) add(out, ViolationCode::BadPlayerType, who);
    }
}

} // namespace

std::vector<Violation> validate_event(const PassEvent& e) {
    std::vector<Violation> out;
    const WorldSnapshot& s = e.snapshot;

    if (s.cycle < 0 || s.cycle > kMaxCycle)
        add(out, ViolationCode::BadCycle, std::to_string(s.cycle));

    if (!s.ball.pos.finite() || !s.ball.vel.finite()) {
        add(out, ViolationCode::NonFinite, "ball");
    } else {
        if (!in_field(s.ball.pos)) add(out, ViolationCode::OutOfBounds, "ball");
        if (s.ball.vel.norm() > kMaxBallSpeed) add(out, ViolationCode::BallTooFast, "ball");
    }

    check_players(out, s.teammates, Side::Ours);
    check_players(out, s.opponents, Side::Theirs);

    const PlayerState* kicker = s.teammate(s.kicker_unum);
    if (s.kicker_unum < 1 || s.kicker_unum > kTeamSize || kicker == nullptr) {
        add(out, ViolationCode::KickerMissing, std::to_string(s.kicker_unum));
    } else if (kicker->pos.finite() && s.ball.pos.finite() &&
               kicker->pos.dist(s.ball.pos) > kBallHolderDist) {
        add(out, ViolationCode::KickerFarFromBall, std::to_string(s.kicker_unum));
    }

    if (e.receiver_unum == s.kicker_unum) {
        add(out, ViolationCode::SelfPass, std::to_string(e.receiver_unum));
    } else if (e.receiver_unum < 1 || e.receiver_unum > kTeamSize ||
               s.teammate(e.receiver_unum) == nullptr) {
        add(out, ViolationCode::ReceiverMissing, std::to_string(e.receiver_unum));
    }

    return out;
}

} // namespace p2d
