#ifndef PASS2D_MODEL_HPP
#define PASS2D_MODEL_HPP

#include <array>
#include <string>
#include <vector>

#include "pass2d/geometry.hpp"

namespace p2d {

constexpr double kFieldHalfLength = 52.5;
constexpr double kFieldHalfWidth = 34.0;
constexpr double kFieldTolerance = 5.0;
constexpr double kMaxPlayerSpeed = 3.0; // m/cycle
constexpr double kMaxBallSpeed = 4.0;   // m/cycle
constexpr double kBallHolderDist = 1.5; // kicker must hold the ball
constexpr int kMaxCycle = 6000;
constexpr int kTeamSize = 11;
inline const Vec2 kOpponentGoal{kFieldHalfLength, 0.0};

enum class Side { Ours, Theirs };

inline const char* side_name(Side s) { return s == Side::Ours ? "ours" : "theirs"; }

// The nine server-assigned player attributes.
struct PlayerTypeAttrs {
    double max_speed = 1.05;
    double decay = 0.4;
    double size = 0.3;
    double effort_max = 1.0;
    double effort_min = 0.6;
    double kickable_area = 1.085;
    double kick_power = 1.0;
    double margin = 0.7;
    double dash_rate = 0.006;

    static constexpr int kCount = 9;
    std::array<double, kCount> to_array() const {
        return {max_speed, decay,      size,       effort_max, effort_min,
                kickable_area, kick_power, margin, dash_rate};
    }
    static PlayerTypeAttrs from_array(const std::array<double, kCount>& a) {
        return {a[0], a[1], a[2], a[3], a[4], a[5], a[6], a[7], a[8]};
    }
};

struct PlayerState {
    Side side = Side::Ours;
    int unum = 0; // 1..11
    Vec2 pos;
    Vec2 vel;
    AngleDeg body;
    PlayerTypeAttrs ptype;
};

struct BallState {
    Vec2 pos;
    Vec2 vel;
};

struct WorldSnapshot {
    int cycle = 0;
    BallState ball;
    std::array<PlayerState, kTeamSize> teammates;
    std::array<PlayerState, kTeamSize> opponents;
    int kicker_unum = 0;

    const PlayerState* teammate(int unum) const;
    const PlayerState* kicker() const { return teammate(kicker_unum); }
};

struct PassEvent {
    WorldSnapshot snapshot;
    int receiver_unum = 0;

    const PlayerState* receiver() const { return snapshot.teammate(receiver_unum); }
};

enum class ViolationCode {
    BadCycle,
    NonFinite,
    OutOfBounds,
    BallTooFast,
    PlayerTooFast,
    BadUnum,
    DuplicateUnum,
    WrongSide,
    BadPlayerType,
    KickerMissing,
    KickerFarFromBall,
    SelfPass,
    ReceiverMissing,
};

const char* violation_code_name(ViolationCode c);

struct Violation {
    ViolationCode code;
    std::string detail; // e.g. "DuplicateUnum(ours,5)"
};

// Returns every invariant violation; empty means the event is well formed.
// Violations are data, not errors.
std::vector<Violation> validate_event(const PassEvent& e);

} // namespace p2d

#endif
