#include "pass2d/synthgen.hpp"

#include <cmath>
#include <stdexcept>

#include "pass2d/common.hpp"
#include "pass2d/parallel.hpp"
#include "pass2d/rng.hpp"

namespace p2d {

namespace {

// 4-3-3 base formation, attacking +x.
constexpr double kFormation[kTeamSize][2] = {
    {-49.0, 0.0},  // GK
    {-30.0, -16.0}, {-32.0, -5.0}, {-32.0, 5.0}, {-30.0, 16.0},
    {-18.0, 0.0},  {-12.0, -12.0}, {-12.0, 12.0},
    {2.0, 0.0},    {-2.0, -18.0},  {-2.0, 18.0},
};

constexpr double kXKeep = 52.0, kYKeep = 33.5; // keep players inside the pitch
constexpr double kMinMateBallDist = 1.2;

double fold(double v, double lo, double hi) {
    const double span = 2.0 * (hi - lo);
    double t = std::fmod(v - lo, span);
    if (t < 0) t += span;
    return lo + (t <= hi - lo ? t : span - t);
}

Vec2 fold_into_field(const Vec2& p) {
    return {fold(p.x, -kXKeep, kXKeep), fold(p.y, -kYKeep, kYKeep)};
}

Vec2 polar_draw(Rng& rng, double max_r) {
    const double r = rng.uniform(0.0, max_r);
    const double th = rng.uniform(-3.14159265358979323846, 3.14159265358979323846);
    return {r * std::cos(th), r * std::sin(th)};
}

PlayerTypeAttrs draw_ptype(Rng& rng) {
    PlayerTypeAttrs t;
    t.max_speed = rng.uniform(1.0, 1.2);
    t.decay = rng.uniform(0.3, 0.5);
    t.size = rng.uniform(0.28, 0.33);
    t.effort_max = rng.uniform(0.8, 1.0);
    t.effort_min = rng.uniform(0.5, 0.7);
    t.kickable_area = rng.uniform(1.0, 1.2);
    t.kick_power = rng.uniform(0.8, 1.2);
    t.margin = rng.uniform(0.6, 0.8);
    t.dash_rate = rng.uniform(0.005, 0.007);
    return t;
}

PassEvent make_event(const GenConfig& cfg, std::size_t index) {
    Rng rng(derive_seed(cfg.seed, index));
    PassEvent e;
    WorldSnapshot& s = e.snapshot;
    s.cycle = static_cast<int>(index % (kMaxCycle + 1));

    // Both teams drift with the play focus; defenders track it less tightly.
    const Vec2 shift{rng.uniform(-12.0, 20.0), rng.uniform(-12.0, 12.0)};
    for (int i = 0; i < kTeamSize; ++i) {
        PlayerState& p = s.teammates[static_cast<std::size_t>(i)];
        p.side = Side::Ours;
        p.unum = i + 1;
        Vec2 base{kFormation[i][0], kFormation[i][1]};
        p.pos = fold_into_field(base + shift +
                                Vec2{rng.gaussian() * cfg.noise_sigma,
                                     rng.gaussian() * cfg.noise_sigma});
    }
    for (int i = 0; i < kTeamSize; ++i) {
        PlayerState& p = s.opponents[static_cast<std::size_t>(i)];
        p.side = Side::Theirs;
        p.unum = i + 1;
        Vec2 base{-kFormation[i][0], kFormation[i][1]};
        p.pos = fold_into_field(base + shift * 0.8 +
                                Vec2{rng.gaussian() * cfg.noise_sigma,
                                     rng.gaussian() * cfg.noise_sigma});
    }

    s.kicker_unum = rng.uniform_int(1, kTeamSize);
    PlayerState& kicker = s.teammates[static_cast<std::size_t>(s.kicker_unum - 1)];
    s.ball.pos = fold_into_field(kicker.pos + polar_draw(rng, 0.7));
    // the kicker must stay in holding range after the fold
    if (kicker.pos.dist(s.ball.pos) > kBallHolderDist) kicker.pos = s.ball.pos;

    // keep other teammates off the ball so every pass line is well defined
    for (auto& p : s.teammates) {
        if (p.unum == s.kicker_unum) continue;
        const double d = p.pos.dist(s.ball.pos);
        if (d < kMinMateBallDist) {
            Vec2 dir = d > 1e-9 ? Vec2{(p.pos.x - s.ball.pos.x) / d, (p.pos.y - s.ball.pos.y) / d}
                                : polar_draw(rng, 1.0);
            const double dn = dir.norm() > 1e-12 ? dir.norm() : 1.0;
            const double push = kMinMateBallDist + rng.uniform(0.0, 0.5);
            p.pos = {s.ball.pos.x + dir.x / dn * push, s.ball.pos.y + dir.y / dn * push};
        }
    }

    s.ball.vel = polar_draw(rng, 0.5);
    for (auto& p : s.teammates) p.vel = polar_draw(rng, 0.7);
    for (auto& p : s.opponents) p.vel = polar_draw(rng, 0.7);
    for (auto& p : s.teammates) p.body = AngleDeg(rng.uniform(-180.0, 180.0));
    for (auto& p : s.opponents) p.body = AngleDeg(rng.uniform(-180.0, 180.0));
    for (auto& p : s.teammates) p.ptype = draw_ptype(rng);
    for (auto& p : s.opponents) p.ptype = draw_ptype(rng);

    e.receiver_unum = receiver_policy(s, cfg.weights);
    return e;
}

} // namespace

void GenConfig::validate() const {
    if (n_events == 0) throw InvalidInput("GenConfig: n_events must be > 0");
    if (!(noise_sigma >= 0.0) || !std::isfinite(noise_sigma))
        throw InvalidInput("GenConfig: noise_sigma must be finite and >= 0");
    if (!std::isfinite(weights.w_risk) || !std::isfinite(weights.w_dist) ||
        !std::isfinite(weights.w_goal))
        throw InvalidInput("GenConfig: policy weights must be finite");
}

int receiver_policy(const WorldSnapshot& s, const PolicyWeights& w) {
    double best = -std::numeric_limits<double>::infinity();
    int best_unum = -1;
    for (int u = 1; u <= kTeamSize; ++u) { // ascending unum = tie-break order
        if (u == s.kicker_unum) continue;
        const PlayerState* t = s.teammate(u);
        if (t == nullptr) continue;
        const AngleDeg pass_dir = direction_of(s.ball.pos, t->pos);
        double min_risk = 180.0;
        for (const auto& opp : s.opponents)
            min_risk = std::min(min_risk,
                                angle_diff(direction_of(s.ball.pos, opp.pos), pass_dir));
        const double score = w.w_risk * min_risk - w.w_dist * t->pos.dist(s.ball.pos) +
                             w.w_goal / (1.0 + t->pos.dist(kOpponentGoal));
        if (score > best) {
            best = score;
            best_unum = u;
        }
    }
    if (best_unum < 0) throw InvalidInput("receiver_policy: no candidate teammate");
    return best_unum;
}

EventLog generate_events(const GenConfig& cfg, int workers) {
    cfg.validate();
    EventLog log;
    log.header.source = "synthgen:seed=" + std::to_string(cfg.seed);
    log.header.frame = Frame::Left;
    log.events.resize(cfg.n_events);
    parallel_for(cfg.n_events, workers,
                 [&](std::size_t i) { log.events[i] = make_event(cfg, i); });
    for (std::size_t i = 0; i < log.events.size(); ++i) {
        if (!validate_event(log.events[i]).empty())
            throw std::logic_error("synthgen produced an invalid event at index " +
                                   std::to_string(i));
    }
    return log;
}

} // namespace p2d
