#include <doctest.h>

#include <cmath>
#include <numeric>

#include "pass2d/rf.hpp"
#include "pass2d/rng.hpp"

using namespace p2d;

namespace {

Table toy_table(int cols, const std::vector<std::vector<double>>& rows,
                const std::vector<int>& labels) {
    Table t;
    for (int c = 0; c < cols; ++c) t.columns.push_back("c" + std::to_string(c));
    for (const auto& r : rows) t.values.insert(t.values.end(), r.begin(), r.end());
    t.label_unum = labels;
    t.label_index = labels;
    t.config.label_kind = LabelKind::Index;
    t.schema_hash = 0xbeef;
    return t;
}

// ---- exhaustive split oracle (test-only re-implementation) ----------------

double oracle_gini(const std::vector<int>& labels, const std::vector<std::size_t>& idx) {
    std::array<double, 11> cnt{};
    for (std::size_t i : idx) cnt[static_cast<std::size_t>(labels[i] - 1)] += 1;
    double s = 0;
    for (double c : cnt) s += (c / idx.size()) * (c / idx.size());
    return 1.0 - s;
}

struct OracleSplit {
    bool found = false;
    int feature = -1;
    double threshold = 0;
    double decrease = 0;
};

OracleSplit oracle_best_split(const Table& t, const std::vector<std::size_t>& idx) {
    OracleSplit best;
    const double parent = oracle_gini(t.label_index, idx);
    for (int f = 0; f < static_cast<int>(t.cols()); ++f) {
        std::vector<double> vals;
        for (std::size_t i : idx) vals.push_back(t.row(i)[static_cast<std::size_t>(f)]);
        std::sort(vals.begin(), vals.end());
        vals.erase(std::unique(vals.begin(), vals.end()), vals.end());
        for (std::size_t v = 0; v + 1 < vals.size(); ++v) {
            const double thr = (vals[v] + vals[v + 1]) / 2.0;
            std::vector<std::size_t> left, right;
            for (std::size_t i : idx)
                (t.row(i)[static_cast<std::size_t>(f)] <= thr ? left : right).push_back(i);
            const double weighted = (left.size() * oracle_gini(t.label_index, left) +
                                     right.size() * oracle_gini(t.label_index, right)) /
                                    idx.size();
            const double dec = parent - weighted;
            const bool better =
                !best.found || dec > best.decrease ||
                (dec == best.decrease &&
                 (f < best.feature || (f == best.feature && thr < best.threshold)));
            if (dec > 0 && better) {
                best.found = true;
                best.feature = f;
                best.threshold = thr;
                best.decrease = dec;
            }
        }
    }
    return best;
}

} // namespace

TEST_CASE("config validation") {
    RFConfig cfg;
    cfg.n_trees = 0;
    CHECK_THROWS_AS(cfg.validate(), InvalidInput);
    cfg = RFConfig{};
    cfg.max_depth = 0;
    CHECK_THROWS_AS(cfg.validate(), InvalidInput);
}

TEST_CASE("a one-threshold dataset is solved by a depth-1 tree") {
    std::vector<std::vector<double>> rows;
    std::vector<int> labels;
    for (int i = 0; i < 30; ++i) {
        const double v = (i % 2 == 0) ? static_cast<double>(i) : -static_cast<double>(i) - 1.0;
        rows.push_back({v, 0.5});
        labels.push_back(v >= 0 ? 2 : 7);
    }
    const Table t = toy_table(2, rows, labels);
    RFConfig cfg;
    cfg.n_trees = 1;
    cfg.max_depth = 1;
    cfg.bootstrap = false;
    cfg.features_per_split = 2;
    const RFModel m = rf_train(t, cfg);
    for (std::size_t i = 0; i < t.rows(); ++i)
        CHECK(m.predict_class(t.row(i)) + 1 == labels[i]);
}

TEST_CASE("tiny trees equal the exhaustive Gini enumeration") {
    Rng rng(71);
    for (int iter = 0; iter < 60; ++iter) {
        const std::size_t n = 6 + rng.below(11); // up to 16 rows
        const int cols = 1 + static_cast<int>(rng.below(3));
        std::vector<std::vector<double>> rows;
        std::vector<int> labels;
        for (std::size_t i = 0; i < n; ++i) {
            std::vector<double> r;
            for (int c = 0; c < cols; ++c) r.push_back(rng.uniform_int(0, 4));
            rows.push_back(r);
            labels.push_back(rng.uniform_int(1, 4));
        }
        const Table t = toy_table(cols, rows, labels);
        RFConfig cfg;
        cfg.n_trees = 1;
        cfg.max_depth = 2;
        cfg.bootstrap = false;
        cfg.features_per_split = cols;
        const RFModel m = rf_train(t, cfg);
        const Tree& tree = m.trees[0];

        std::vector<std::size_t> all(n);
        std::iota(all.begin(), all.end(), 0);
        const OracleSplit root = oracle_best_split(t, all);
        const TreeNode& root_node = tree.nodes[0];
        if (!root.found) {
            CHECK(root_node.feature == -1);
            continue;
        }
        REQUIRE(root_node.feature == root.feature);
        CHECK(root_node.threshold == doctest::Approx(root.threshold).epsilon(1e-12));

        // second level must also match the oracle on each side
        std::vector<std::size_t> left, right;
        for (std::size_t i : all)
            (t.row(i)[static_cast<std::size_t>(root.feature)] <= root.threshold ? left : right)
                .push_back(i);
        for (const auto& [idx, child] :
             {std::pair{left, root_node.left}, std::pair{right, root_node.right}}) {
            const TreeNode& node = tree.nodes[static_cast<std::size_t>(child)];
            const OracleSplit want = oracle_best_split(t, idx);
            const bool oracle_splits =
                want.found && idx.size() >= static_cast<std::size_t>(cfg.min_samples_split) &&
                oracle_gini(t.label_index, idx) > 0;
            if (!oracle_splits) {
                CHECK(node.feature == -1);
            } else {
                CHECK(node.feature == want.feature);
                CHECK(node.threshold == doctest::Approx(want.threshold).epsilon(1e-12));
            }
        }

        // and the tree's training predictions match majority leaves of the oracle
        for (std::size_t i = 0; i < n; ++i) {
            const auto dist = m.predict_dist(t.row(i));
            double sum = 0;
            for (double d : dist) sum += d;
            CHECK(std::fabs(sum - 1.0) < 1e-9);
        }
    }
}

TEST_CASE("training is deterministic and worker-count independent") {
    Rng rng(73);
    std::vector<std::vector<double>> rows;
    std::vector<int> labels;
    for (int i = 0; i < 300; ++i) {
        rows.push_back({rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1),
                        rng.uniform(-1, 1)});
        labels.push_back(rng.uniform_int(1, 11));
    }
    const Table t = toy_table(4, rows, labels);
    RFConfig cfg;
    cfg.n_trees = 12;
    cfg.max_depth = 6;
    cfg.seed = 99;
    const RFModel a = rf_train(t, cfg, 1);
    const RFModel b = rf_train(t, cfg, 8);
    REQUIRE(a.trees.size() == b.trees.size());
    for (std::size_t i = 0; i < a.trees.size(); ++i) {
        REQUIRE(a.trees[i].nodes.size() == b.trees[i].nodes.size());
        for (std::size_t j = 0; j < a.trees[i].nodes.size(); ++j) {
            CHECK(a.trees[i].nodes[j].feature == b.trees[i].nodes[j].feature);
            CHECK(a.trees[i].nodes[j].threshold == b.trees[i].nodes[j].threshold);
        }
        CHECK(a.trees[i].dists == b.trees[i].dists);
    }
    CHECK(a.raw_importance == b.raw_importance);
}

TEST_CASE("prediction composes leaf distributions") {
    std::vector<std::vector<double>> rows;
    std::vector<int> labels;
    for (int i = 0; i < 40; ++i) { // every bootstrap sample sees both classes
        rows.push_back({static_cast<double>(i)});
        labels.push_back(i < 20 ? 1 : 5);
    }
    const Table t = toy_table(1, rows, labels);
    RFConfig cfg;
    cfg.n_trees = 1;
    cfg.bootstrap = false;
    cfg.features_per_split = 1;
    const RFModel single = rf_train(t, cfg);
    const auto d = single.predict_dist(rows[0]);
    CHECK(d[0] == doctest::Approx(1.0)); // pure leaf
    CHECK(single.predict_class(rows[30]) == 4);

    cfg.n_trees = 7; // all trees agree on this trivially separable data
    cfg.bootstrap = true;
    const RFModel many = rf_train(t, cfg);
    const auto d2 = many.predict_dist(rows[39]);
    CHECK(d2[4] == doctest::Approx(1.0));
}

TEST_CASE("gini importance: unused columns score zero, sums to one") {
    Rng rng(79);
    std::vector<std::vector<double>> rows;
    std::vector<int> labels;
    for (int i = 0; i < 200; ++i) {
        const int label = rng.uniform_int(1, 3);
        // column 0 encodes the label perfectly; column 1 is noise
        rows.push_back({static_cast<double>(label), rng.uniform(-1, 1)});
        labels.push_back(label);
    }
    const Table t = toy_table(2, rows, labels);
    RFConfig cfg;
    cfg.n_trees = 10;
    cfg.features_per_split = 2; // both columns always visible
    cfg.seed = 7;
    const RFModel m = rf_train(t, cfg);
    const auto imp = gini_importance(m);
    REQUIRE(imp.size() == 2);
    CHECK(std::fabs(imp[0] + imp[1] - 1.0) < 1e-9);
    CHECK(imp[0] == doctest::Approx(1.0)); // the perfect splitter takes all of it
    CHECK(imp[1] == doctest::Approx(0.0));
}

TEST_CASE("monotone rescaling of a column preserves predictions") {
    Rng rng(83);
    std::vector<std::vector<double>> rows;
    std::vector<int> labels;
    for (int i = 0; i < 400; ++i) {
        rows.push_back({rng.uniform(-3, 3), rng.uniform(-3, 3), rng.uniform(-3, 3)});
        const double s = rows.back()[0] + 0.5 * rows.back()[1];
        labels.push_back(s < -1 ? 1 : s < 1 ? 2 : 3);
    }
    const Table orig = toy_table(3, rows, labels);

    auto scaled_rows = rows;
    for (auto& r : scaled_rows) r[1] = 13.0 * r[1] + 7.0; // a > 0 affine map
    const Table scaled = toy_table(3, scaled_rows, labels);

    RFConfig cfg;
    cfg.n_trees = 15;
    cfg.max_depth = 8;
    cfg.features_per_split = 2;
    cfg.seed = 31;
    const RFModel a = rf_train(orig, cfg);
    const RFModel b = rf_train(scaled, cfg);
    for (std::size_t i = 0; i < orig.rows(); ++i)
        CHECK(a.predict_class(orig.row(i)) == b.predict_class(scaled.row(i)));
}

TEST_CASE("model files round trip exactly") {
    Rng rng(89);
    std::vector<std::vector<double>> rows;
    std::vector<int> labels;
    for (int i = 0; i < 100; ++i) {
        rows.push_back({rng.uniform(-1, 1), rng.uniform(-1, 1)});
        labels.push_back(rng.uniform_int(1, 4));
    }
    const Table t = toy_table(2, rows, labels);
    RFConfig cfg;
    cfg.n_trees = 5;
    cfg.max_depth = 4;
    const RFModel m = rf_train(t, cfg);
    const std::string path = "/tmp/p2d_test_rf.json";
    m.save(path);
    const RFModel back = RFModel::load(path);
    CHECK(back.schema == m.schema);
    CHECK(back.n_columns == m.n_columns);
    CHECK(back.raw_importance == m.raw_importance);
    REQUIRE(back.trees.size() == m.trees.size());
    for (std::size_t i = 0; i < t.rows(); ++i)
        CHECK(back.predict_class(t.row(i)) == m.predict_class(t.row(i)));
}

TEST_CASE("empty tables and bad labels are rejected") {
    Table t = toy_table(2, {}, {});
    RFConfig cfg;
    CHECK_THROWS_AS(rf_train(t, cfg), InvalidInput);
    t = toy_table(1, {{0.5}}, {12});
    CHECK_THROWS_AS(rf_train(t, cfg), InvalidInput);
}
