#include "pass2d/eval.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>

#include "pass2d/common.hpp"
#include "pass2d/rf.hpp"
#include "pass2d/rng.hpp"

namespace p2d {

namespace {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

int row_label(const Predictor& model, const Table& t, std::size_t i) {
    return model.label_kind() == LabelKind::Unum ? t.label_unum[i] : t.label_index[i];
}

void check_schema(const Predictor& model, const Table& t) {
    if (model.schema_hash() != t.schema_hash)
        throw SchemaMismatch("model schema " + hex64(model.schema_hash()) +
                             " does not match data schema " + hex64(t.schema_hash));
}

std::array<int, kTeamSize + 1> identity_map() {
    std::array<int, kTeamSize + 1> m{};
    for (int u = 0; u <= kTeamSize; ++u) m[static_cast<std::size_t>(u)] = u;
    return m;
}

std::array<int, kTeamSize + 1> side_relabeling(double proportion, std::uint64_t seed) {
    auto map = identity_map();
    std::size_t m = static_cast<std::size_t>(
        std::ceil(proportion * static_cast<double>(kTeamSize) - 1e-12));
    if (m > kTeamSize) m = kTeamSize;
    if (m == 1) m = 2; // a one-element subset cannot be deranged
    if (m == 0) return map;

    Rng rng(seed);
    std::vector<int> pool(kTeamSize);
    std::iota(pool.begin(), pool.end(), 1);
    rng.shuffle(pool);
    std::vector<int> subset(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(m));

    std::vector<int> perm = subset;
    for (;;) {
        rng.shuffle(perm);
        bool fixed = false;
        for (std::size_t i = 0; i < m; ++i)
            if (perm[i] == subset[i]) { fixed = true; break; }
        if (!fixed) break;
    }
    for (std::size_t i = 0; i < m; ++i) map[static_cast<std::size_t>(subset[i])] = perm[i];
    return map;
}

ordered_json map_to_json(const std::array<int, kTeamSize + 1>& map) {
    ordered_json j = ordered_json::object();
    for (int u = 1; u <= kTeamSize; ++u)
        if (map[static_cast<std::size_t>(u)] != u)
            j[std::to_string(u)] = map[static_cast<std::size_t>(u)];
    return j;
}

} // namespace

EvalReport accuracy(const Predictor& model, const Table& table) {
    check_schema(model, table);
    if (table.rows() == 0) throw InvalidInput("EmptyTable");
    EvalReport r;
    r.rows = table.rows();
    r.model_kind = model.kind();
    r.model_schema = model.schema_hash();
    r.data_schema = table.schema_hash;
    const std::vector<int> pred = model.predict_classes(table);
    std::size_t hits = 0;
    for (std::size_t i = 0; i < table.rows(); ++i) {
        const int truth = row_label(model, table, i) - 1;
        if (truth < 0 || truth >= kNumClasses)
            throw InvalidInput("label out of range at row " + std::to_string(i));
        ++r.confusion[static_cast<std::size_t>(truth)][static_cast<std::size_t>(pred[i])];
        if (pred[i] == truth) ++hits;
    }
    r.accuracy = static_cast<double>(hits) / static_cast<double>(table.rows());
    return r;
}

UnumRelabeling make_unum_relabeling(double proportion, std::uint64_t seed, bool relabel_ours,
                                    bool relabel_theirs) {
    if (!(proportion >= 0.0 && proportion <= 1.0))
        throw InvalidInput("proportion must be in [0, 1]");
    UnumRelabeling out;
    out.ours = relabel_ours ? side_relabeling(proportion, derive_seed(seed, 1)) : identity_map();
    out.theirs =
        relabel_theirs ? side_relabeling(proportion, derive_seed(seed, 2)) : identity_map();
    return out;
}

EventLog apply_relabeling(const EventLog& log, const UnumRelabeling& map) {
    EventLog out = log;
    for (auto& e : out.events) {
        for (auto& p : e.snapshot.teammates) p.unum = map.ours[static_cast<std::size_t>(p.unum)];
        for (auto& p : e.snapshot.opponents) p.unum = map.theirs[static_cast<std::size_t>(p.unum)];
        e.snapshot.kicker_unum = map.ours[static_cast<std::size_t>(e.snapshot.kicker_unum)];
        e.receiver_unum = map.ours[static_cast<std::size_t>(e.receiver_unum)];
    }
    return out;
}

RobustnessCurve unum_shuffle_robustness(const Predictor& model, const EventLog& log,
                                        const DatasetConfig& cfg,
                                        std::span<const double> proportions, std::uint64_t seed,
                                        int workers) {
    for (std::size_t i = 0; i < proportions.size(); ++i) {
        if (!(proportions[i] >= 0.0 && proportions[i] <= 1.0))
            throw InvalidInput("proportions must lie in [0, 1]");
        if (i > 0 && proportions[i] <= proportions[i - 1])
            throw InvalidInput("proportions must be strictly increasing");
    }
    RobustnessCurve curve;
    curve.seed = seed;
    curve.relabelings = ordered_json::array();

    curve.proportions.push_back(0.0);
    curve.accuracies.push_back(accuracy(model, build_dataset(log, cfg, workers)).accuracy);

    for (std::size_t i = 0; i < proportions.size(); ++i) {
        const double p = proportions[i];
        const UnumRelabeling map = make_unum_relabeling(p, derive_seed(seed, i + 1), true, true);
        const EventLog relabeled = apply_relabeling(log, map);
        const Table t = build_dataset(relabeled, cfg, workers);
        curve.proportions.push_back(p);
        curve.accuracies.push_back(accuracy(model, t).accuracy);
        ordered_json entry;
        entry["proportion"] = p;
        entry["ours"] = map_to_json(map.ours);
        entry["theirs"] = map_to_json(map.theirs);
        curve.relabelings.push_back(std::move(entry));
    }
    return curve;
}

namespace {

std::vector<std::pair<std::string, std::vector<std::size_t>>> importance_groups(
    const Table& t, ImportanceGrouping grouping) {
    std::vector<std::pair<std::string, std::vector<std::size_t>>> groups;
    if (grouping == ImportanceGrouping::ByColumn) {
        for (std::size_t c = 0; c < t.cols(); ++c) groups.push_back({t.columns[c], {c}});
        return groups;
    }
    const FeatureSchema schema = FeatureSchema::make(t.config.k);
    std::map<FeatureGroup, std::vector<std::size_t>> by_group;
    std::size_t tcol = 0;
    for (const auto& col : schema.columns()) {
        if (t.config.feature_set == FeatureSet::PositionOnly &&
            col.group != FeatureGroup::Position)
            continue;
        by_group[col.group].push_back(tcol++);
    }
    if (tcol != t.cols())
        throw SchemaMismatch("table width does not match its declared feature set");
    for (FeatureGroup g : {FeatureGroup::Position, FeatureGroup::Kicker, FeatureGroup::Velocity,
                           FeatureGroup::Body, FeatureGroup::Team, FeatureGroup::PlayerType,
                           FeatureGroup::Riskiest, FeatureGroup::Nearest, FeatureGroup::Goal}) {
        auto it = by_group.find(g);
        if (it != by_group.end()) groups.push_back({feature_group_name(g), it->second});
    }
    return groups;
}

} // namespace

ImportanceTable permutation_importance(const Predictor& model, const Table& table,
                                       ImportanceGrouping grouping, int n_repeats,
                                       std::uint64_t seed) {
    if (n_repeats < 1) throw InvalidInput("n_repeats must be >= 1");
    check_schema(model, table);
    if (table.rows() == 0) throw InvalidInput("EmptyTable");

    ImportanceTable out;
    out.method = "permutation";
    out.n_repeats = n_repeats;
    out.seed = seed;
    out.baseline = accuracy(model, table).accuracy;

    const auto groups = importance_groups(table, grouping);
    Table work = table;
    const std::size_t n = table.rows();
    const std::size_t w = table.cols();
    std::vector<std::size_t> perm(n);
    std::vector<double> saved(n);

    for (std::size_t gi = 0; gi < groups.size(); ++gi) {
        const auto& cols = groups[gi].second;
        std::vector<double> drops;
        drops.reserve(static_cast<std::size_t>(n_repeats));
        for (int rep = 0; rep < n_repeats; ++rep) {
            Rng rng(derive_seed(seed, gi * 1000003ULL + static_cast<std::uint64_t>(rep)));
            std::iota(perm.begin(), perm.end(), 0);
            rng.shuffle(perm);
            for (std::size_t c : cols) {
                for (std::size_t i = 0; i < n; ++i) saved[i] = work.values[i * w + c];
                for (std::size_t i = 0; i < n; ++i)
                    work.values[i * w + c] = table.values[perm[i] * w + c];
            }
            drops.push_back(out.baseline - accuracy(model, work).accuracy);
            for (std::size_t c : cols)
                for (std::size_t i = 0; i < n; ++i)
                    work.values[i * w + c] = table.values[i * w + c];
        }
        double mean = std::accumulate(drops.begin(), drops.end(), 0.0) /
                      static_cast<double>(drops.size());
        double var = 0;
        for (double d : drops) var += (d - mean) * (d - mean);
        const double sd =
            drops.size() > 1 ? std::sqrt(var / static_cast<double>(drops.size() - 1)) : 0.0;
        out.entries.push_back({groups[gi].first, mean, sd});
    }
    return out;
}

ImportanceTable gini_importance_table(const RFModel& model, const Table& reference,
                                      ImportanceGrouping grouping) {
    if (model.schema_hash() != reference.schema_hash)
        throw SchemaMismatch("model schema " + hex64(model.schema_hash()) +
                             " does not match data schema " + hex64(reference.schema_hash));
    const std::vector<double> per_col = gini_importance(model);
    ImportanceTable out;
    out.method = "gini";
    out.n_repeats = 1;
    out.seed = 0;
    out.baseline = 0;
    for (const auto& [name, cols] : importance_groups(reference, grouping)) {
        double score = 0;
        for (std::size_t c : cols) score += per_col[c];
        out.entries.push_back({name, score, 0.0});
    }
    return out;
}

Report report_from_eval(const EvalReport& r, const std::string& name) {
    Report rep;
    rep.name = name;
    rep.columns = {"metric", "value"};
    rep.rows.push_back({"accuracy", format_g9(r.accuracy)});
    rep.rows.push_back({"rows", std::to_string(r.rows)});
    rep.meta["kind"] = "eval";
    rep.meta["model_kind"] = r.model_kind;
    rep.meta["model_schema"] = hex64(r.model_schema);
    rep.meta["data_schema"] = hex64(r.data_schema);
    ordered_json conf = ordered_json::array();
    for (const auto& row : r.confusion) conf.push_back(row);
    rep.meta["confusion"] = std::move(conf);
    return rep;
}

Report report_from_curve(const RobustnessCurve& c, const std::string& name) {
    Report rep;
    rep.name = name;
    rep.columns = {"proportion", "accuracy"};
    for (std::size_t i = 0; i < c.proportions.size(); ++i)
        rep.rows.push_back({format_g9(c.proportions[i]), format_g9(c.accuracies[i])});
    rep.meta["kind"] = "robustness";
    rep.meta["seed"] = c.seed;
    rep.meta["relabelings"] = c.relabelings;
    return rep;
}

Report report_from_importance(const ImportanceTable& t, const std::string& name) {
    Report rep;
    rep.name = name;
    rep.columns = {"name", "score", "stddev"};
    for (const auto& e : t.entries)
        rep.rows.push_back({e.name, format_g9(e.score), format_g9(e.stddev)});
    rep.meta["kind"] = "importance";
    rep.meta["method"] = t.method;
    rep.meta["n_repeats"] = t.n_repeats;
    rep.meta["seed"] = t.seed;
    rep.meta["baseline"] = t.baseline;
    return rep;
}

void write_reports(std::span<const Report> reports, const std::string& dir) {
    fs::create_directories(dir);
    ordered_json manifest;
    ordered_json names = ordered_json::array();
    for (const auto& r : reports) names.push_back(r.name);
    manifest["experiments"] = std::move(names);
    {
        std::ofstream out(fs::path(dir) / "manifest.json", std::ios::binary);
        if (!out) throw IoError("cannot write manifest under " + dir);
        out << manifest.dump(2) << '\n';
    }
    for (const auto& r : reports) {
        const fs::path sub = fs::path(dir) / r.name;
        fs::create_directories(sub);
        std::ofstream csv(sub / "metrics.csv", std::ios::binary);
        if (!csv) throw IoError("cannot write metrics.csv under " + sub.string());
        for (std::size_t c = 0; c < r.columns.size(); ++c)
            csv << r.columns[c] << (c + 1 < r.columns.size() ? "," : "\n");
        for (const auto& row : r.rows)
            for (std::size_t c = 0; c < row.size(); ++c)
                csv << row[c] << (c + 1 < row.size() ? "," : "\n");
        std::ofstream meta(sub / "meta.json", std::ios::binary);
        if (!meta) throw IoError("cannot write meta.json under " + sub.string());
        meta << r.meta.dump(2) << '\n';
        if (!csv || !meta) throw IoError("report write failed under " + sub.string());
    }
}

} // namespace p2d
