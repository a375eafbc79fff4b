#include "pass2d/rf.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include <json.hpp>

#include "pass2d/common.hpp"
#include "pass2d/parallel.hpp"
#include "pass2d/rng.hpp"

namespace p2d {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

double gini(const std::array<std::size_t, kNumClasses>& counts, std::size_t n) {
    if (n == 0) return 0.0;
    double sum = 0;
    for (std::size_t c : counts) {
        const double p = static_cast<double>(c) / static_cast<double>(n);
        sum += p * p;
    }
    return 1.0 - sum;
}

struct SplitChoice {
    double decrease = 0; // parent impurity minus weighted child impurity
    int feature = -1;
    double threshold = 0;

    bool better_than(const SplitChoice& o) const {
        if (decrease != o.decrease) return decrease > o.decrease;
        if (feature != o.feature) return feature < o.feature;
        return threshold < o.threshold;
    }
};

struct TreeBuilder {
    const Table& table;
    std::span<const double> colmajor; // colmajor[f * rows + sample]
    const RFConfig& cfg;
    int mtry;
    std::size_t n_root;
    Rng rng;
    Tree tree;
    std::vector<double> importance;
    const std::vector<int>& labels; // 0-based per table row

    TreeBuilder(const Table& t, std::span<const double> cm, const RFConfig& c, int mtry_,
                std::uint64_t seed, const std::vector<int>& labels_)
        : table(t), colmajor(cm), cfg(c), mtry(mtry_), n_root(0), rng(seed),
          importance(t.cols(), 0.0), labels(labels_) {}

    double value(std::size_t sample, int feature) const {
        return colmajor[static_cast<std::size_t>(feature) * table.rows() + sample];
    }

    std::int32_t make_leaf(const std::vector<std::size_t>& samples) {
        std::array<double, kNumClasses> dist{};
        for (std::size_t s : samples) dist[static_cast<std::size_t>(labels[s])] += 1.0;
        for (double& d : dist) d /= static_cast<double>(samples.size());
        tree.dists.push_back(dist);
        TreeNode node;
        node.dist = static_cast<std::int32_t>(tree.dists.size() - 1);
        tree.nodes.push_back(node);
        return static_cast<std::int32_t>(tree.nodes.size() - 1);
    }

    // distinct candidate features, in draw order
    std::vector<int> draw_features() {
        const int w = static_cast<int>(table.cols());
        if (mtry >= w) {
            std::vector<int> all(static_cast<std::size_t>(w));
            std::iota(all.begin(), all.end(), 0);
            return all;
        }
        std::vector<int> out;
        std::vector<bool> used(static_cast<std::size_t>(w), false);
        out.reserve(static_cast<std::size_t>(mtry));
        while (static_cast<int>(out.size()) < mtry) {
            const int f = static_cast<int>(rng.below(static_cast<std::uint64_t>(w)));
            if (!used[static_cast<std::size_t>(f)]) {
                used[static_cast<std::size_t>(f)] = true;
                out.push_back(f);
            }
        }
        return out;
    }

    std::int32_t build(std::vector<std::size_t>& samples, int depth) {
        const std::size_t n = samples.size();
        std::array<std::size_t, kNumClasses> counts{};
        for (std::size_t s : samples) ++counts[static_cast<std::size_t>(labels[s])];
        const double parent_gini = gini(counts, n);
        const bool pure = parent_gini == 0.0;
        if (pure || depth >= cfg.max_depth || n < static_cast<std::size_t>(cfg.min_samples_split))
            return make_leaf(samples);

        const std::vector<int> candidates = draw_features();
        SplitChoice best;
        std::vector<std::pair<double, int>> vals(n); // (value, class)
        for (int f : candidates) {
            for (std::size_t i = 0; i < n; ++i)
                vals[i] = {value(samples[i], f), labels[samples[i]]};
            std::sort(vals.begin(), vals.end(),
                      [](const auto& a, const auto& b) { return a.first < b.first; });
            std::array<std::size_t, kNumClasses> left{};
            for (std::size_t i = 0; i + 1 < n; ++i) {
                ++left[static_cast<std::size_t>(vals[i].second)];
                if (vals[i].first == vals[i + 1].first) continue;
                const std::size_t nl = i + 1;
                const std::size_t nr = n - nl;
                std::array<std::size_t, kNumClasses> right{};
                for (int c = 0; c < kNumClasses; ++c)
                    right[static_cast<std::size_t>(c)] =
                        counts[static_cast<std::size_t>(c)] - left[static_cast<std::size_t>(c)];
                const double weighted =
                    (static_cast<double>(nl) * gini(left, nl) +
                     static_cast<double>(nr) * gini(right, nr)) /
                    static_cast<double>(n);
                SplitChoice cand;
                cand.decrease = parent_gini - weighted;
                cand.feature = f;
                cand.threshold = (vals[i].first + vals[i + 1].first) / 2.0;
                if (cand.decrease > 0.0 && (best.feature < 0 || cand.better_than(best)))
                    best = cand;
            }
        }
        if (best.feature < 0) return make_leaf(samples);

        importance[static_cast<std::size_t>(best.feature)] +=
            static_cast<double>(n) / static_cast<double>(n_root) * best.decrease;

        std::vector<std::size_t> left_samples, right_samples;
        left_samples.reserve(n);
        right_samples.reserve(n);
        for (std::size_t s : samples)
            if (value(s, best.feature) <= best.threshold)
                left_samples.push_back(s);
            else
                right_samples.push_back(s);
        samples.clear();
        samples.shrink_to_fit();

        TreeNode node;
        node.feature = best.feature;
        node.threshold = best.threshold;
        tree.nodes.push_back(node);
        const std::int32_t self = static_cast<std::int32_t>(tree.nodes.size() - 1);
        const std::int32_t l = build(left_samples, depth + 1);
        const std::int32_t r = build(right_samples, depth + 1);
        tree.nodes[static_cast<std::size_t>(self)].left = l;
        tree.nodes[static_cast<std::size_t>(self)].right = r;
        return self;
    }

    void run() {
        const std::size_t n = table.rows();
        std::vector<std::size_t> samples;
        samples.reserve(n);
        if (cfg.bootstrap) {
            for (std::size_t i = 0; i < n; ++i) samples.push_back(rng.below(n));
        } else {
            samples.resize(n);
            std::iota(samples.begin(), samples.end(), 0);
        }
        n_root = samples.size();
        build(samples, 0);
    }
};

const std::array<double, kNumClasses>& leaf_for(const Tree& t, std::span<const double> row) {
    std::int32_t idx = 0;
    for (;;) {
        const TreeNode& node = t.nodes[static_cast<std::size_t>(idx)];
        if (node.feature < 0) return t.dists[static_cast<std::size_t>(node.dist)];
        idx = row[static_cast<std::size_t>(node.feature)] <= node.threshold ? node.left
                                                                            : node.right;
    }
}

} // namespace

void RFConfig::validate() const {
    if (n_trees <= 0) throw InvalidInput("RFConfig: n_trees must be > 0");
    if (max_depth < 1) throw InvalidInput("RFConfig: max_depth must be >= 1");
    if (min_samples_split < 2) throw InvalidInput("RFConfig: min_samples_split must be >= 2");
    if (features_per_split < 0) throw InvalidInput("RFConfig: features_per_split must be >= 0");
}

RFModel rf_train(const Table& table, const RFConfig& cfg, int workers) {
    cfg.validate();
    if (table.rows() == 0) throw InvalidInput("rf_train: empty table");

    std::vector<int> labels(table.rows());
    for (std::size_t i = 0; i < table.rows(); ++i) {
        const int cls = table.label(i) - 1;
        if (cls < 0 || cls >= kNumClasses)
            throw InvalidInput("rf_train: label out of range at row " + std::to_string(i));
        labels[i] = cls;
    }

    int mtry = cfg.features_per_split;
    if (mtry == 0)
        mtry = std::max(1, static_cast<int>(std::sqrt(static_cast<double>(table.cols()))));
    mtry = std::min(mtry, static_cast<int>(table.cols()));

    RFModel model;
    model.config = cfg;
    model.target = table.config.label_kind;
    model.schema = table.schema_hash;
    model.n_columns = table.cols();
    model.trees.resize(static_cast<std::size_t>(cfg.n_trees));

    // column-major copy keeps split scans cache-friendly
    std::vector<double> colmajor(table.rows() * table.cols());
    for (std::size_t i = 0; i < table.rows(); ++i) {
        const auto row = table.row(i);
        for (std::size_t c = 0; c < table.cols(); ++c)
            colmajor[c * table.rows() + i] = row[c];
    }

    std::vector<std::vector<double>> per_tree_importance(
        static_cast<std::size_t>(cfg.n_trees));
    parallel_for(static_cast<std::size_t>(cfg.n_trees), workers, [&](std::size_t i) {
        TreeBuilder builder(table, colmajor, cfg, mtry, derive_seed(cfg.seed, i), labels);
        builder.run();
        model.trees[i] = std::move(builder.tree);
        per_tree_importance[i] = std::move(builder.importance);
    });

    // reduce in tree order so float accumulation is worker-count independent
    model.raw_importance.assign(table.cols(), 0.0);
    for (const auto& imp : per_tree_importance)
        for (std::size_t c = 0; c < imp.size(); ++c) model.raw_importance[c] += imp[c];
    return model;
}

std::array<double, kNumClasses> RFModel::predict_dist(std::span<const double> row) const {
    if (row.size() != n_columns)
        throw SchemaMismatch("predict: row width " + std::to_string(row.size()) +
                             " does not match model input " + std::to_string(n_columns));
    std::array<double, kNumClasses> acc{};
    for (const Tree& t : trees) {
        const auto& d = leaf_for(t, row);
        for (int c = 0; c < kNumClasses; ++c) acc[static_cast<std::size_t>(c)] += d[static_cast<std::size_t>(c)];
    }
    for (double& v : acc) v /= static_cast<double>(trees.size());
    return acc;
}

int RFModel::predict_class(std::span<const double> row) const {
    const auto dist = predict_dist(row);
    int best = 0;
    for (int c = 1; c < kNumClasses; ++c)
        if (dist[static_cast<std::size_t>(c)] > dist[static_cast<std::size_t>(best)]) best = c;
    return best;
}

std::vector<double> gini_importance(const RFModel& m) {
    std::vector<double> out = m.raw_importance;
    const double total = std::accumulate(out.begin(), out.end(), 0.0);
    if (total > 0)
        for (double& v : out) v /= total;
    return out;
}

void RFModel::save(const std::string& path) const {
    ordered_json j;
    j["kind"] = "rf";
    j["format_version"] = 1;
    j["schema_hash"] = hex64(schema);
    j["label_kind"] = label_kind_name(target);
    j["config"] = {{"n_trees", config.n_trees},
                   {"max_depth", config.max_depth},
                   {"min_samples_split", config.min_samples_split},
                   {"features_per_split", config.features_per_split},
                   {"bootstrap", config.bootstrap},
                   {"seed", config.seed}};
    j["n_columns"] = n_columns;
    j["raw_importance"] = raw_importance;
    ordered_json jtrees = ordered_json::array();
    for (const Tree& t : trees) {
        ordered_json jt;
        ordered_json nodes = ordered_json::array();
        for (const TreeNode& n : t.nodes)
            nodes.push_back({n.feature, n.threshold, n.left, n.right, n.dist});
        jt["nodes"] = std::move(nodes);
        ordered_json dists = ordered_json::array();
        for (const auto& d : t.dists) dists.push_back(d);
        jt["dists"] = std::move(dists);
        jtrees.push_back(std::move(jt));
    }
    j["trees"] = std::move(jtrees);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path + " for writing");
    out << j.dump() << '\n';
    if (!out) throw IoError("model write failed");
}

RFModel RFModel::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& ex) {
        throw IoError("malformed model file " + path + ": " + ex.what());
    }
    if (j.value("kind", "") != "rf") throw IoError(path + ": not an rf model file");
    RFModel m;
    const auto& c = j.at("config");
    m.config.n_trees = c.at("n_trees").get<int>();
    m.config.max_depth = c.at("max_depth").get<int>();
    m.config.min_samples_split = c.at("min_samples_split").get<int>();
    m.config.features_per_split = c.at("features_per_split").get<int>();
    m.config.bootstrap = c.at("bootstrap").get<bool>();
    m.config.seed = c.at("seed").get<std::uint64_t>();
    m.target = label_kind_from_name(j.at("label_kind").get<std::string>());
    m.schema = std::stoull(j.at("schema_hash").get<std::string>(), nullptr, 16);
    m.n_columns = j.at("n_columns").get<std::size_t>();
    m.raw_importance = j.at("raw_importance").get<std::vector<double>>();
    for (const auto& jt : j.at("trees")) {
        Tree t;
        for (const auto& jn : jt.at("nodes")) {
            TreeNode n;
            n.feature = jn.at(0).get<int>();
            n.threshold = jn.at(1).get<double>();
            n.left = jn.at(2).get<std::int32_t>();
            n.right = jn.at(3).get<std::int32_t>();
            n.dist = jn.at(4).get<std::int32_t>();
            t.nodes.push_back(n);
        }
        for (const auto& jd : jt.at("dists"))
            t.dists.push_back(jd.get<std::array<double, kNumClasses>>());
        m.trees.push_back(std::move(t));
    }
    return m;
}

} // namespace p2d
