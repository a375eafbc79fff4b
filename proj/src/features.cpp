#include "pass2d/features.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>

#include "pass2d/common.hpp"

namespace p2d {

namespace {

const char* const kPtypeNames[PlayerTypeAttrs::kCount] = {
    "max_speed", "decay", "size", "effort_max", "effort_min",
    "kickable_area", "kick_power", "margin", "dash_rate"};

void push_polar_block(std::vector<ColumnDef>& cols, const std::string& prefix,
                      FeatureGroup group, const std::string& subject) {
    for (const char* c : {"x", "y", "r", "t"})
        cols.push_back({prefix + "_" + c, group, subject});
}

void append_polar(std::vector<double>& out, const Vec2& v) {
    const Polar p = to_polar(v);
    out.push_back(v.x);
    out.push_back(v.y);
    out.push_back(p.r);
    out.push_back(p.theta.degree());
}

struct RiskRank {
    double angle;
    double dist_ball;
    int unum;
    std::size_t idx;
};

// Pass line given as the ball position plus a second point; callers
// guarantee line_point != ball.
std::vector<RiskiestOppFeatures> riskiest_along(const PassEvent& e, const Vec2& line_point,
                                                int k) {
    const Vec2& ball = e.snapshot.ball.pos;
    const AngleDeg pass_dir = direction_of(ball, line_point);
    std::vector<RiskRank> ranks;
    ranks.reserve(kTeamSize);
    for (std::size_t i = 0; i < kTeamSize; ++i) {
        const PlayerState& opp = e.snapshot.opponents[i];
        ranks.push_back({angle_diff(direction_of(ball, opp.pos), pass_dir),
                         opp.pos.dist(ball), opp.unum, i});
    }
    std::sort(ranks.begin(), ranks.end(), [](const RiskRank& a, const RiskRank& b) {
        if (a.angle != b.angle) return a.angle < b.angle;
        if (a.dist_ball != b.dist_ball) return a.dist_ball < b.dist_ball;
        return a.unum < b.unum;
    });

    const AngleDeg perp(pass_dir.degree() + 90.0);
    std::vector<RiskiestOppFeatures> out;
    out.reserve(static_cast<std::size_t>(k));
    for (int j = 0; j < k; ++j) {
        const PlayerState& opp = e.snapshot.opponents[ranks[static_cast<std::size_t>(j)].idx];
        const LineProjection proj = project_to_line(opp.pos, ball, line_point);
        RiskiestOppFeatures f;
        f.dist_ball = ranks[static_cast<std::size_t>(j)].dist_ball;
        f.dist_pass_line = proj.perp_dist;
        f.angle_to_pass_line = ranks[static_cast<std::size_t>(j)].angle;
        double body_sep = angle_diff(opp.body, perp);
        if (body_sep > 90.0) body_sep = 180.0 - body_sep;
        f.body_vs_perp = body_sep;
        f.proj_dist_from_kicker = proj.along_dist;
        f.opp_unum = opp.unum;
        out.push_back(f);
    }
    return out;
}

void check_k(int k) {
    if (k < 1 || k > kTeamSize) throw InvalidInput("k must be in [1, 11]");
}

void append_teammate_extras(std::vector<double>& out, const PassEvent& e,
                            const PlayerState& t, int k) {
    const Vec2& ball = e.snapshot.ball.pos;
    Vec2 line_point = t.pos;
    if (t.unum == e.snapshot.kicker_unum && line_point.dist(ball) < 1e-9) {
        // the holder's own block: no real pass line exists, fall back to the
        // attack direction through the ball
        line_point = ball + Vec2{1.0, 0.0};
    }
    if (line_point.dist(ball) == 0.0)
        throw DegenerateGeometry("pass target coincides with the ball");
    for (const auto& f : riskiest_along(e, line_point, k)) {
        out.push_back(f.dist_ball);
        out.push_back(f.dist_pass_line);
        out.push_back(f.angle_to_pass_line);
        out.push_back(f.body_vs_perp);
        out.push_back(f.proj_dist_from_kicker);
    }
    for (const auto& f : nearest_opponents(t, e.snapshot.opponents, k)) {
        out.push_back(f.dist);
        out.push_back(f.angle);
        out.push_back(f.opp_body);
    }
    const auto [gd, ga] = goal_features(t);
    out.push_back(gd);
    out.push_back(ga);
}

} // namespace

const char* feature_group_name(FeatureGroup g) {
    switch (g) {
    case FeatureGroup::Position: return "Position";
    case FeatureGroup::Kicker: return "Kicker";
    case FeatureGroup::Velocity: return "Velocity";
    case FeatureGroup::Body: return "Body";
    case FeatureGroup::Team: return "Team";
    case FeatureGroup::PlayerType: return "PlayerType";
    case FeatureGroup::Riskiest: return "Riskiest";
    case FeatureGroup::Nearest: return "Nearest";
    case FeatureGroup::Goal: return "Goal";
    }
    return "?";
}

FeatureGroup feature_group_from_name(const std::string& name) {
    for (FeatureGroup g : {FeatureGroup::Position, FeatureGroup::Kicker, FeatureGroup::Velocity,
                           FeatureGroup::Body, FeatureGroup::Team, FeatureGroup::PlayerType,
                           FeatureGroup::Riskiest, FeatureGroup::Nearest, FeatureGroup::Goal})
        if (name == feature_group_name(g)) return g;
    throw InvalidInput("unknown feature group '" + name + "'");
}

FeatureSchema FeatureSchema::make(int k) {
    check_k(k);
    FeatureSchema s;
    s.k_ = k;
    auto& cols = s.cols_;
    cols.reserve(expected_size(k));

    push_polar_block(cols, "ball_pos", FeatureGroup::Position, "ball");
    push_polar_block(cols, "ball_kicker", FeatureGroup::Kicker, "ball");
    push_polar_block(cols, "ball_vel", FeatureGroup::Velocity, "ball");

    auto push_common = [&](const std::string& p, const std::string& subject) {
        push_polar_block(cols, p + "_pos", FeatureGroup::Position, subject);
        push_polar_block(cols, p + "_kicker", FeatureGroup::Kicker, subject);
        push_polar_block(cols, p + "_vel", FeatureGroup::Velocity, subject);
        cols.push_back({p + "_body", FeatureGroup::Body, subject});
        cols.push_back({p + "_unum", FeatureGroup::Team, subject});
        cols.push_back({p + "_is_kicker", FeatureGroup::Team, subject});
        for (const char* a : kPtypeNames)
            cols.push_back({p + "_ptype_" + a, FeatureGroup::PlayerType, subject});
    };

    for (int i = 1; i <= kTeamSize; ++i) {
        const std::string p = "tm" + std::to_string(i);
        push_common(p, p);
        for (int j = 1; j <= k; ++j) {
            const std::string r = p + "_risk" + std::to_string(j);
            for (const char* c : {"dist_ball", "dist_line", "angle", "body_perp", "proj_dist"})
                cols.push_back({r + "_" + c, FeatureGroup::Riskiest, p});
        }
        for (int j = 1; j <= k; ++j) {
            const std::string n = p + "_near" + std::to_string(j);
            for (const char* c : {"dist", "angle", "body"})
                cols.push_back({n + "_" + c, FeatureGroup::Nearest, p});
        }
        cols.push_back({p + "_goal_dist", FeatureGroup::Goal, p});
        cols.push_back({p + "_goal_angle", FeatureGroup::Goal, p});
    }
    for (int i = 1; i <= kTeamSize; ++i) {
        const std::string p = "opp" + std::to_string(i);
        push_common(p, p);
    }
    return s;
}

std::vector<std::size_t> FeatureSchema::group_columns(FeatureGroup g) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < cols_.size(); ++i)
        if (cols_[i].group == g) out.push_back(i);
    return out;
}

void FeatureSchema::write_csv(std::ostream& out) const {
    out << "index,name,group,subject\n";
    for (std::size_t i = 0; i < cols_.size(); ++i)
        out << i << ',' << cols_[i].name << ',' << feature_group_name(cols_[i].group) << ','
            << cols_[i].subject << '\n';
}

std::vector<double> ball_features(const PassEvent& e) {
    std::vector<double> out;
    out.reserve(12);
    append_polar(out, e.snapshot.ball.pos);
    append_polar(out, e.snapshot.ball.pos - e.snapshot.ball.pos); // holder-relative, zero
    append_polar(out, e.snapshot.ball.vel);
    return out;
}

std::vector<double> player_common_features(const PlayerState& p, const PassEvent& e) {
    std::vector<double> out;
    out.reserve(24);
    append_polar(out, p.pos);
    append_polar(out, p.pos - e.snapshot.ball.pos);
    append_polar(out, p.vel);
    out.push_back(p.body.degree());
    out.push_back(static_cast<double>(p.unum));
    const bool is_kicker = p.side == Side::Ours && p.unum == e.snapshot.kicker_unum;
    out.push_back(is_kicker ? 1.0 : 0.0);
    for (double v : p.ptype.to_array()) out.push_back(v);
    return out;
}

std::vector<RiskiestOppFeatures> riskiest_opponents(const PassEvent& e, const PlayerState& target,
                                                    int k) {
    check_k(k);
    if (target.pos.dist(e.snapshot.ball.pos) < 1e-9)
        throw DegenerateGeometry("riskiest_opponents: target sits on the ball");
    return riskiest_along(e, target.pos, k);
}

std::vector<NearestOppFeatures> nearest_opponents(const PlayerState& target,
                                                  std::span<const PlayerState> opponents, int k) {
    if (k < 1 || static_cast<std::size_t>(k) > opponents.size())
        throw InvalidInput("nearest_opponents: bad k");
    std::vector<std::size_t> order(opponents.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const double da = opponents[a].pos.dist(target.pos);
        const double db = opponents[b].pos.dist(target.pos);
        if (da != db) return da < db;
        return opponents[a].unum < opponents[b].unum;
    });
    std::vector<NearestOppFeatures> out;
    out.reserve(static_cast<std::size_t>(k));
    for (int j = 0; j < k; ++j) {
        const PlayerState& opp = opponents[order[static_cast<std::size_t>(j)]];
        NearestOppFeatures f;
        f.dist = opp.pos.dist(target.pos);
        f.angle = direction_of(target.pos, opp.pos).degree();
        f.opp_body = opp.body.degree();
        f.opp_unum = opp.unum;
        out.push_back(f);
    }
    return out;
}

std::pair<double, double> goal_features(const PlayerState& target) {
    const Polar p = to_polar(kOpponentGoal - target.pos);
    return {p.r, p.theta.degree()};
}

FeatureVector extract_event(const PassEvent& e, std::span<const int> tm_order,
                            std::span<const int> opp_order, int k) {
    check_k(k);
    if (tm_order.size() != kTeamSize || opp_order.size() != kTeamSize)
        throw InvalidInput("extract_event: orderings must list 11 slots per side");
    FeatureVector out;
    out.reserve(FeatureSchema::expected_size(k));

    for (double v : ball_features(e)) out.push_back(v);
    for (int idx : tm_order) {
        const PlayerState& t = e.snapshot.teammates[static_cast<std::size_t>(idx)];
        for (double v : player_common_features(t, e)) out.push_back(v);
        append_teammate_extras(out, e, t, k);
    }
    for (int idx : opp_order) {
        const PlayerState& o = e.snapshot.opponents[static_cast<std::size_t>(idx)];
        for (double v : player_common_features(o, e)) out.push_back(v);
    }
    return out;
}

FeatureVector extract_event(const PassEvent& e, int k) {
    std::array<int, kTeamSize> order{};
    std::iota(order.begin(), order.end(), 0);
    return extract_event(e, order, order, k);
}

} // namespace p2d
