#include <doctest.h>

#include <set>
#include <sstream>

#include "pass2d/synthgen.hpp"
#include "test_support.hpp"

using namespace p2d;

TEST_CASE("generation is deterministic and byte identical") {
    GenConfig cfg;
    cfg.seed = 12345;
    cfg.n_events = 50;
    std::ostringstream a, b;
    write_event_log(generate_events(cfg), a);
    write_event_log(generate_events(cfg, 4), b); // worker count must not matter
    CHECK(a.str() == b.str());
}

TEST_CASE("zero events is rejected at config validation") {
    GenConfig cfg;
    cfg.n_events = 0;
    CHECK_THROWS_AS(cfg.validate(), InvalidInput);
    CHECK_THROWS_AS(generate_events(cfg), InvalidInput);
}

TEST_CASE("non-finite weights and negative sigma are rejected") {
    GenConfig cfg;
    cfg.noise_sigma = -1.0;
    CHECK_THROWS_AS(cfg.validate(), InvalidInput);
    cfg = GenConfig{};
    cfg.weights.w_risk = std::nan("");
    CHECK_THROWS_AS(cfg.validate(), InvalidInput);
}

TEST_CASE("every generated event is valid and the receiver classes spread") {
    GenConfig cfg;
    cfg.seed = 777;
    cfg.n_events = 1000;
    const EventLog log = generate_events(cfg);
    REQUIRE(log.events.size() == 1000);
    std::set<int> classes;
    for (const auto& e : log.events) {
        CHECK(validate_event(e).empty());
        classes.insert(e.receiver_unum);
    }
    CHECK(classes.size() >= 8); // guards against a degenerate policy
}

TEST_CASE("policy picks the lone sensible candidate") {
    PassEvent e = test::make_basic_event();
    // push everyone except unum 9 far away with hostile angles; unum 9 close
    // and open
    PolicyWeights w{1.0, 1.0, 0.0};
    const int receiver = receiver_policy(e.snapshot, w);
    // brute-force oracle: score every candidate independently
    double best = -1e300;
    int best_u = -1;
    for (int u = 1; u <= kTeamSize; ++u) {
        if (u == e.snapshot.kicker_unum) continue;
        const PlayerState* t = e.snapshot.teammate(u);
        double risk = 180.0;
        for (const auto& opp : e.snapshot.opponents)
            risk = std::min(risk, angle_diff(direction_of(e.snapshot.ball.pos, opp.pos),
                                             direction_of(e.snapshot.ball.pos, t->pos)));
        const double score = w.w_risk * risk - w.w_dist * t->pos.dist(e.snapshot.ball.pos) +
                             w.w_goal / (1.0 + t->pos.dist(kOpponentGoal));
        if (score > best) {
            best = score;
            best_u = u;
        }
    }
    CHECK(receiver == best_u);
}

TEST_CASE("with only the distance term the nearest teammate wins") {
    Rng rng(3);
    for (int i = 0; i < 100; ++i) {
        const PassEvent e = test::random_event(rng);
        PolicyWeights w{0.0, 1.0, 0.0};
        const int receiver = receiver_policy(e.snapshot, w);
        double best = 1e300;
        int nearest = -1;
        for (int u = 1; u <= kTeamSize; ++u) {
            if (u == e.snapshot.kicker_unum) continue;
            const double d = e.snapshot.teammate(u)->pos.dist(e.snapshot.ball.pos);
            if (d < best) {
                best = d;
                nearest = u;
            }
        }
        CHECK(receiver == nearest);
    }
}

TEST_CASE("policy equals exhaustive scoring on random snapshots") {
    Rng rng(29);
    PolicyWeights w{1.3, 0.7, 25.0};
    for (int i = 0; i < 300; ++i) {
        const PassEvent e = test::random_event(rng);
        double best = -1e300;
        int best_u = -1;
        for (int u = 1; u <= kTeamSize; ++u) { // ascending = tie-break order
            if (u == e.snapshot.kicker_unum) continue;
            const PlayerState* t = e.snapshot.teammate(u);
            double risk = 180.0;
            for (const auto& opp : e.snapshot.opponents)
                risk = std::min(risk, angle_diff(direction_of(e.snapshot.ball.pos, opp.pos),
                                                 direction_of(e.snapshot.ball.pos, t->pos)));
            const double score = w.w_risk * risk - w.w_dist * t->pos.dist(e.snapshot.ball.pos) +
                                 w.w_goal / (1.0 + t->pos.dist(kOpponentGoal));
            if (score > best) {
                best = score;
                best_u = u;
            }
        }
        CHECK(receiver_policy(e.snapshot, w) == best_u);
    }
}

TEST_CASE("scaling all weights never changes the argmax") {
    Rng rng(59);
    for (int i = 0; i < 100; ++i) {
        const PassEvent e = test::random_event(rng);
        PolicyWeights w{1.0, 2.0, 15.0};
        PolicyWeights scaled{3.0, 6.0, 45.0};
        CHECK(receiver_policy(e.snapshot, w) == receiver_policy(e.snapshot, scaled));
    }
}
