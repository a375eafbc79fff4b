#include "pass2d/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <numeric>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "pass2d/common.hpp"
#include "pass2d/parallel.hpp"

namespace p2d {

namespace {

using nlohmann::ordered_json;

std::vector<std::string> schema_column_names(const DatasetConfig& cfg) {
    const FeatureSchema schema = FeatureSchema::make(cfg.k);
    std::vector<std::string> names;
    if (cfg.feature_set == FeatureSet::All) {
        names.reserve(schema.size());
        for (const auto& c : schema.columns()) names.push_back(c.name);
    } else {
        for (const auto& c : schema.columns())
            if (c.group == FeatureGroup::Position) names.push_back(c.name);
    }
    return names;
}

struct Layout {
    std::size_t tm_block;  // teammate block width in the all-features row
    std::size_t opp_base;  // offset of the first opponent block
    std::size_t total;
};

Layout layout_for(int k) {
    Layout l;
    l.tm_block = 24 + 8 * static_cast<std::size_t>(k) + 2;
    l.opp_base = 12 + kTeamSize * l.tm_block;
    l.total = l.opp_base + kTeamSize * 24;
    return l;
}

LabeledRow assemble_from_natural(std::span<const double> natural, const PassEvent& e,
                                 const DatasetConfig& cfg, const FieldEvaluatorFn& evaluator) {
    const Layout lay = layout_for(cfg.k);
    std::vector<int> tm_order = sort_players(e.snapshot.teammates, cfg.sort, evaluator);
    const std::vector<int> opp_order = sort_players(e.snapshot.opponents, cfg.sort, evaluator);

    if (cfg.kicker_first) {
        for (std::size_t j = 0; j < tm_order.size(); ++j) {
            if (e.snapshot.teammates[static_cast<std::size_t>(tm_order[j])].unum ==
                e.snapshot.kicker_unum) {
                std::rotate(tm_order.begin(), tm_order.begin() + static_cast<std::ptrdiff_t>(j),
                            tm_order.begin() + static_cast<std::ptrdiff_t>(j + 1));
                break;
            }
        }
    }

    LabeledRow row;
    row.label_unum = e.receiver_unum;
    row.label_index = 0;
    for (std::size_t j = 0; j < tm_order.size(); ++j) {
        if (e.snapshot.teammates[static_cast<std::size_t>(tm_order[j])].unum == e.receiver_unum) {
            row.label_index = static_cast<int>(j) + 1;
            break;
        }
    }

    if (cfg.feature_set == FeatureSet::All) {
        row.features.resize(lay.total);
        double* dst = row.features.data();
        std::copy_n(natural.data(), 12, dst);
        dst += 12;
        for (int idx : tm_order) {
            std::copy_n(natural.data() + 12 + static_cast<std::size_t>(idx) * lay.tm_block,
                        lay.tm_block, dst);
            dst += lay.tm_block;
        }
        for (int idx : opp_order) {
            std::copy_n(natural.data() + lay.opp_base + static_cast<std::size_t>(idx) * 24, 24,
                        dst);
            dst += 24;
        }
    } else {
        row.features.reserve(4 * (1 + 2 * kTeamSize));
        for (int c = 0; c < 4; ++c) row.features.push_back(natural[static_cast<std::size_t>(c)]);
        for (int idx : tm_order) {
            const double* src = natural.data() + 12 + static_cast<std::size_t>(idx) * lay.tm_block;
            row.features.insert(row.features.end(), src, src + 4);
        }
        for (int idx : opp_order) {
            const double* src = natural.data() + lay.opp_base + static_cast<std::size_t>(idx) * 24;
            row.features.insert(row.features.end(), src, src + 4);
        }
    }
    return row;
}

} // namespace

const char* sort_method_name(SortMethod m) {
    switch (m) {
    case SortMethod::UniformNumber: return "unum";
    case SortMethod::XCoordinate: return "x";
    case SortMethod::FieldEvaluator: return "fe";
    }
    return "?";
}

SortMethod sort_method_from_name(const std::string& s) {
    if (s == "unum" || s == "uniform" || s == "uniform_number") return SortMethod::UniformNumber;
    if (s == "x" || s == "x_coordinate") return SortMethod::XCoordinate;
    if (s == "fe" || s == "field_evaluator") return SortMethod::FieldEvaluator;
    throw InvalidInput("unknown sort method '" + s + "'");
}

const char* label_kind_name(LabelKind k) { return k == LabelKind::Unum ? "unum" : "index"; }

LabelKind label_kind_from_name(const std::string& s) {
    if (s == "unum") return LabelKind::Unum;
    if (s == "index") return LabelKind::Index;
    throw InvalidInput("unknown label kind '" + s + "'");
}

const char* feature_set_name(FeatureSet f) {
    return f == FeatureSet::All ? "all" : "position";
}

FeatureSet feature_set_from_name(const std::string& s) {
    if (s == "all") return FeatureSet::All;
    if (s == "position" || s == "position_only") return FeatureSet::PositionOnly;
    throw InvalidInput("unknown feature set '" + s + "'");
}

std::string DatasetConfig::variant_name() const {
    std::string n = sort_method_name(sort);
    n += kicker_first ? "_kf1" : "_kf0";
    if (feature_set == FeatureSet::PositionOnly) n += "_pos";
    return n;
}

double field_evaluate(const Vec2& pos) {
    return pos.x + std::max(0.0, 40.0 - pos.dist(kOpponentGoal));
}

std::vector<int> sort_players(std::span<const PlayerState> players, SortMethod method,
                              const FieldEvaluatorFn& evaluator) {
    std::vector<int> order(players.size());
    std::iota(order.begin(), order.end(), 0);
    switch (method) {
    case SortMethod::UniformNumber:
        std::sort(order.begin(), order.end(),
                  [&](int a, int b) { return players[static_cast<std::size_t>(a)].unum <
                                             players[static_cast<std::size_t>(b)].unum; });
        break;
    case SortMethod::XCoordinate:
        std::sort(order.begin(), order.end(), [&](int a, int b) {
            const auto& pa = players[static_cast<std::size_t>(a)];
            const auto& pb = players[static_cast<std::size_t>(b)];
            if (pa.pos.x != pb.pos.x) return pa.pos.x > pb.pos.x;
            return pa.unum < pb.unum;
        });
        break;
    case SortMethod::FieldEvaluator: {
        const FieldEvaluatorFn& ev = evaluator ? evaluator : field_evaluate;
        std::vector<double> score(players.size());
        for (std::size_t i = 0; i < players.size(); ++i) score[i] = ev(players[i].pos);
        std::sort(order.begin(), order.end(), [&](int a, int b) {
            const double sa = score[static_cast<std::size_t>(a)];
            const double sb = score[static_cast<std::size_t>(b)];
            if (sa != sb) return sa > sb;
            return players[static_cast<std::size_t>(a)].unum <
                   players[static_cast<std::size_t>(b)].unum;
        });
        break;
    }
    }
    return order;
}

LabeledRow assemble_row(const PassEvent& e, const DatasetConfig& cfg,
                        const FieldEvaluatorFn& evaluator) {
    const FeatureVector natural = extract_event(e, cfg.k);
    return assemble_from_natural(natural, e, cfg, evaluator);
}

std::uint64_t dataset_schema_hash(const DatasetConfig& cfg) {
    std::string s = "p2d-table|k=" + std::to_string(cfg.k) + "|sort=" + sort_method_name(cfg.sort) +
                    "|kf=" + (cfg.kicker_first ? "1" : "0") +
                    "|fs=" + feature_set_name(cfg.feature_set) + "|";
    std::uint64_t h = fnv1a64(s);
    for (const auto& name : schema_column_names(cfg)) {
        h = fnv1a64(name, h);
        h = fnv1a64(";", h);
    }
    return h;
}

Table build_dataset(const EventLog& log, const DatasetConfig& cfg, int workers,
                    const FieldEvaluatorFn& evaluator) {
    Table t;
    t.config = cfg;
    t.columns = schema_column_names(cfg);
    t.schema_hash = dataset_schema_hash(cfg);
    const std::size_t n = log.events.size();
    const std::size_t w = t.columns.size();
    t.values.resize(n * w);
    t.label_unum.resize(n);
    t.label_index.resize(n);
    parallel_for(n, workers, [&](std::size_t i) {
        const FeatureVector natural = extract_event(log.events[i], cfg.k);
        LabeledRow row = assemble_from_natural(natural, log.events[i], cfg, evaluator);
        std::copy(row.features.begin(), row.features.end(), t.values.begin() + i * w);
        t.label_unum[i] = row.label_unum;
        t.label_index[i] = row.label_index;
    });
    return t;
}

std::vector<Table> build_datasets(const EventLog& log, std::span<const DatasetConfig> configs,
                                  int workers, const FieldEvaluatorFn& evaluator) {
    int k = configs.empty() ? 2 : configs.front().k;
    for (const auto& cfg : configs)
        if (cfg.k != k) throw InvalidInput("build_datasets: configs must share k");
    const FeatureCache cache = FeatureCache::build(log, k, workers);
    std::vector<Table> out;
    out.reserve(configs.size());
    for (const auto& cfg : configs) out.push_back(cache.assemble(cfg, evaluator));
    return out;
}

FeatureCache FeatureCache::build(const EventLog& log, int k, int workers) {
    FeatureCache cache;
    cache.log_ = &log;
    cache.k_ = k;
    cache.width_ = FeatureSchema::expected_size(k);
    cache.natural_.resize(log.events.size() * cache.width_);
    parallel_for(log.events.size(), workers, [&](std::size_t i) {
        const FeatureVector row = extract_event(log.events[i], k);
        std::copy(row.begin(), row.end(), cache.natural_.begin() + i * cache.width_);
    });
    return cache;
}

Table FeatureCache::assemble(const DatasetConfig& cfg, const FieldEvaluatorFn& evaluator) const {
    if (cfg.k != k_) throw InvalidInput("FeatureCache: k mismatch");
    Table t;
    t.config = cfg;
    t.columns = schema_column_names(cfg);
    t.schema_hash = dataset_schema_hash(cfg);
    const std::size_t n = log_->events.size();
    const std::size_t w = t.columns.size();
    t.values.resize(n * w);
    t.label_unum.resize(n);
    t.label_index.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::span<const double> natural{natural_.data() + i * width_, width_};
        LabeledRow row = assemble_from_natural(natural, log_->events[i], cfg, evaluator);
        std::copy(row.features.begin(), row.features.end(), t.values.begin() + i * w);
        t.label_unum[i] = row.label_unum;
        t.label_index[i] = row.label_index;
    }
    return t;
}

std::vector<DatasetConfig> six_variants(LabelKind label, FeatureSet fs, int k) {
    std::vector<DatasetConfig> out;
    for (SortMethod m : {SortMethod::UniformNumber, SortMethod::XCoordinate,
                         SortMethod::FieldEvaluator})
        for (bool kf : {false, true}) out.push_back({m, kf, label, fs, k});
    return out;
}

void write_table_csv(const Table& t, std::ostream& out) {
    std::string line;
    for (const auto& c : t.columns) {
        line += c;
        line += ',';
    }
    line += "label_unum,label_index\n";
    out.write(line.data(), static_cast<std::streamsize>(line.size()));
    const std::size_t w = t.cols();
    for (std::size_t i = 0; i < t.rows(); ++i) {
        line.clear();
        const double* row = t.values.data() + i * w;
        for (std::size_t c = 0; c < w; ++c) {
            line += format_g9(row[c]);
            line += ',';
        }
        line += std::to_string(t.label_unum[i]);
        line += ',';
        line += std::to_string(t.label_index[i]);
        line += '\n';
        out.write(line.data(), static_cast<std::streamsize>(line.size()));
    }
    if (!out) throw IoError("table write failed");
}

namespace {

std::string sidecar_path(const std::string& csv_path) {
    if (csv_path.size() > 4 && csv_path.substr(csv_path.size() - 4) == ".csv")
        return csv_path.substr(0, csv_path.size() - 4) + ".meta.json";
    return csv_path + ".meta.json";
}

} // namespace

void write_table_files(const Table& t, const std::string& csv_path) {
    std::ofstream csv(csv_path, std::ios::binary);
    if (!csv) throw IoError("cannot open " + csv_path + " for writing");
    write_table_csv(t, csv);

    ordered_json meta;
    meta["format_version"] = 1;
    meta["dataset_config"] = {{"sort", sort_method_name(t.config.sort)},
                              {"kicker_first", t.config.kicker_first},
                              {"label_kind", label_kind_name(t.config.label_kind)},
                              {"feature_set", feature_set_name(t.config.feature_set)},
                              {"k", t.config.k}};
    meta["schema_hash"] = hex64(t.schema_hash);
    meta["columns"] = t.cols();
    meta["rows"] = t.rows();
    std::ofstream side(sidecar_path(csv_path), std::ios::binary);
    if (!side) throw IoError("cannot open " + sidecar_path(csv_path) + " for writing");
    side << meta.dump(2) << '\n';
    if (!side) throw IoError("sidecar write failed");
}

Table read_table_files(const std::string& csv_path) {
    std::ifstream side(sidecar_path(csv_path), std::ios::binary);
    if (!side) throw IoError("missing sidecar " + sidecar_path(csv_path));
    ordered_json meta;
    try {
        side >> meta;
    } catch (const nlohmann::json::exception& ex) {
        throw IoError("malformed sidecar " + sidecar_path(csv_path) + ": " + ex.what());
    }
    Table t;
    const auto& dc = meta.at("dataset_config");
    t.config.sort = sort_method_from_name(dc.at("sort").get<std::string>());
    t.config.kicker_first = dc.at("kicker_first").get<bool>();
    t.config.label_kind = label_kind_from_name(dc.at("label_kind").get<std::string>());
    t.config.feature_set = feature_set_from_name(dc.at("feature_set").get<std::string>());
    t.config.k = dc.at("k").get<int>();
    t.schema_hash = dataset_schema_hash(t.config);
    if (hex64(t.schema_hash) != meta.at("schema_hash").get<std::string>())
        throw SchemaMismatch("sidecar schema hash does not match its dataset config");
    t.columns = schema_column_names(t.config);

    std::ifstream csv(csv_path, std::ios::binary);
    if (!csv) throw IoError("cannot open " + csv_path);
    std::string line;
    if (!std::getline(csv, line)) throw IoError(csv_path + ": empty file");
    std::string expect_header;
    for (const auto& c : t.columns) {
        expect_header += c;
        expect_header += ',';
    }
    expect_header += "label_unum,label_index";
    if (line != expect_header) throw SchemaMismatch(csv_path + ": header does not match schema");

    const std::size_t w = t.cols();
    std::size_t lineno = 1;
    while (std::getline(csv, line)) {
        ++lineno;
        if (line.empty()) continue;
        const char* p = line.c_str();
        const char* end = p + line.size();
        for (std::size_t c = 0; c < w; ++c) {
            char* after = nullptr;
            const double v = std::strtod(p, &after);
            if (after == p || after >= end || *after != ',')
                throw IoError(csv_path + ":" + std::to_string(lineno) + ": bad row");
            t.values.push_back(v);
            p = after + 1;
        }
        char* after = nullptr;
        const long lu = std::strtol(p, &after, 10);
        if (after == p || *after != ',')
            throw IoError(csv_path + ":" + std::to_string(lineno) + ": bad labels");
        p = after + 1;
        const long li = std::strtol(p, &after, 10);
        if (after == p)
            throw IoError(csv_path + ":" + std::to_string(lineno) + ": bad labels");
        t.label_unum.push_back(static_cast<int>(lu));
        t.label_index.push_back(static_cast<int>(li));
    }
    return t;
}

} // namespace p2d
