#ifndef PASS2D_RF_HPP
#define PASS2D_RF_HPP

#include <array>

#include "pass2d/predictor.hpp"

namespace p2d {

struct RFConfig {
    int n_trees = 100;
    int max_depth = 1000000; // effectively unbounded
    int min_samples_split = 2;
    int features_per_split = 0; // 0 = floor(sqrt(column count))
    bool bootstrap = true;
    std::uint64_t seed = 1;

    void validate() const; // throws InvalidInput
};

struct TreeNode {
    int feature = -1; // -1 marks a leaf
    double threshold = 0;
    std::int32_t left = -1;
    std::int32_t right = -1;
    std::int32_t dist = -1; // leaf distribution index
};

struct Tree {
    std::vector<TreeNode> nodes;
    std::vector<std::array<double, kNumClasses>> dists;
};

// Axis-aligned Gini-split forest. Tree i derives its randomness from
// (seed, i), so training reproduces at any worker count. Splits send
// x[feature] <= threshold left; best split maximizes impurity decrease
// with ties broken by lower feature index, then lower threshold.
class RFModel : public Predictor {
public:
    RFConfig config;
    LabelKind target = LabelKind::Index;
    std::uint64_t schema = 0;
    std::size_t n_columns = 0;
    std::vector<Tree> trees;
    std::vector<double> raw_importance; // summed weighted impurity decrease per column

    std::array<double, kNumClasses> predict_dist(std::span<const double> row) const;
    int predict_class(std::span<const double> row) const override;
    std::uint64_t schema_hash() const override { return schema; }
    LabelKind label_kind() const override { return target; }
    std::string kind() const override { return "rf"; }

    void save(const std::string& path) const;
    static RFModel load(const std::string& path);
};

RFModel rf_train(const Table& table, const RFConfig& cfg, int workers = 1);

// Normalized total Gini impurity reduction per column (sums to 1 when the
// forest split at all).
std::vector<double> gini_importance(const RFModel& m);

} // namespace p2d

#endif
