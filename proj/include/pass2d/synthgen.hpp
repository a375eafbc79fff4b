#ifndef PASS2D_SYNTHGEN_HPP
#define PASS2D_SYNTHGEN_HPP

#include <cstdint>

#include "pass2d/ingest.hpp"
#include "pass2d/model.hpp"

namespace p2d {

struct PolicyWeights {
    double w_risk = 1.0;
    double w_dist = 1.2;
    double w_goal = 30.0;
};

struct GenConfig {
    std::uint64_t seed = 1;
    std::size_t n_events = 1000;
    PolicyWeights weights;
    double noise_sigma = 6.0; // formation jitter, meters

    void validate() const; // throws InvalidInput
};

// Deterministic receiver choice: argmax over teammates (kicker excluded) of
//   w_risk * min_opp angle_diff(dir(ball->opp), dir(ball->tm))
// - w_dist * |tm - ball| + w_goal / (1 + |tm - goal|),
// ties broken by lowest unum.
int receiver_policy(const WorldSnapshot& s, const PolicyWeights& w);

// Each event is a pure function of (cfg.seed, event index), so any worker
// count produces the same log.
EventLog generate_events(const GenConfig& cfg, int workers = 1);

} // namespace p2d

#endif
