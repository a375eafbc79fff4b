#ifndef PASS2D_FEATURES_HPP
#define PASS2D_FEATURES_HPP

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "pass2d/model.hpp"

namespace p2d {

enum class FeatureGroup { Position, Kicker, Velocity, Body, Team, PlayerType, Riskiest, Nearest, Goal };

const char* feature_group_name(FeatureGroup g);
FeatureGroup feature_group_from_name(const std::string& name); // throws InvalidInput

// One vector per pass event; for k = 2 the layout is 12 ball columns,
// 42 per teammate and 24 per opponent, 738 in total.
using FeatureVector = std::vector<double>;

struct ColumnDef {
    std::string name;
    FeatureGroup group;
    std::string subject; // "ball", "tm1".."tm11", "opp1".."opp11"
};

class FeatureSchema {
public:
    static FeatureSchema make(int k); // throws InvalidInput unless 1 <= k <= 11

    int k() const { return k_; }
    std::size_t size() const { return cols_.size(); }
    const std::vector<ColumnDef>& columns() const { return cols_; }
    const ColumnDef& at(std::size_t i) const { return cols_[i]; }
    std::vector<std::size_t> group_columns(FeatureGroup g) const;

    // CSV export: index,name,group,subject
    void write_csv(std::ostream& out) const;

    static std::size_t expected_size(int k) {
        const std::size_t tm = 24 + 5 * static_cast<std::size_t>(k) + 3 * static_cast<std::size_t>(k) + 2;
        return 12 + kTeamSize * tm + kTeamSize * 24;
    }

private:
    int k_ = 2;
    std::vector<ColumnDef> cols_;
};

// The five pass-line measurements for one opponent (ranked by how sharply
// it cuts the pass direction). proj_dist_from_kicker is signed along the
// line from the ball holder toward the target.
struct RiskiestOppFeatures {
    double dist_ball = 0;
    double dist_pass_line = 0;
    double angle_to_pass_line = 0; // [0, 180]
    double body_vs_perp = 0;       // [0, 90]
    double proj_dist_from_kicker = 0;
    int opp_unum = 0; // selection identity, not a feature column
};

struct NearestOppFeatures {
    double dist = 0;
    double angle = 0;    // direction of (opp - target), signed
    double opp_body = 0; // opponent's absolute body direction
    int opp_unum = 0;
};

// Ball block: position x,y,r,t; holder-relative x,y,r,t; velocity x,y,speed,dir.
// The holder-relative block is measured against the ball itself (kicker
// position is defined as the ball position), so it is identically zero.
std::vector<double> ball_features(const PassEvent& e);

// Position 4, holder-relative 4, velocity 4, body, unum, is_kicker, ptype 9.
std::vector<double> player_common_features(const PlayerState& p, const PassEvent& e);

// Opponents ranked ascending by angular separation from the pass direction;
// ties by distance to ball, then unum. Throws DegenerateGeometry when the
// target sits on the ball.
std::vector<RiskiestOppFeatures> riskiest_opponents(const PassEvent& e, const PlayerState& target,
                                                    int k);

std::vector<NearestOppFeatures> nearest_opponents(const PlayerState& target,
                                                  std::span<const PlayerState> opponents, int k);

// distance and signed angle to the opponent goal center
std::pair<double, double> goal_features(const PlayerState& target);

// Slots follow the given orderings (indices into the snapshot arrays);
// sorting is owned by the dataset module.
FeatureVector extract_event(const PassEvent& e, std::span<const int> tm_order,
                            std::span<const int> opp_order, int k = 2);
FeatureVector extract_event(const PassEvent& e, int k = 2); // natural slot order

} // namespace p2d

#endif
