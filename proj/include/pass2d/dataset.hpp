#ifndef PASS2D_DATASET_HPP
#define PASS2D_DATASET_HPP

#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "pass2d/features.hpp"
#include "pass2d/ingest.hpp"

namespace p2d {

enum class SortMethod { UniformNumber, XCoordinate, FieldEvaluator };
enum class LabelKind { Unum, Index };
enum class FeatureSet { All, PositionOnly };

const char* sort_method_name(SortMethod m);
SortMethod sort_method_from_name(const std::string& s); // throws InvalidInput
const char* label_kind_name(LabelKind k);
LabelKind label_kind_from_name(const std::string& s);
const char* feature_set_name(FeatureSet f);
FeatureSet feature_set_from_name(const std::string& s);

struct DatasetConfig {
    SortMethod sort = SortMethod::UniformNumber;
    bool kicker_first = false;
    LabelKind label_kind = LabelKind::Index;
    FeatureSet feature_set = FeatureSet::All;
    int k = 2;

    std::string variant_name() const; // e.g. "x_kf1" / "x_kf1_pos"
};

using FieldEvaluatorFn = std::function<double(const Vec2&)>;

// Default position score: x plus a goal-proximity bonus fading out at 40 m.
double field_evaluate(const Vec2& pos);

// Returns the slot order as indices into `players`. UniformNumber sorts by
// ascending unum; XCoordinate by descending x; FieldEvaluator by descending
// score. All ties break by ascending unum.
std::vector<int> sort_players(std::span<const PlayerState> players, SortMethod method,
                              const FieldEvaluatorFn& evaluator = {});

struct LabeledRow {
    std::vector<double> features;
    int label_unum = 0;
    int label_index = 0; // 1-based slot of the receiver after rearrangement
};

LabeledRow assemble_row(const PassEvent& e, const DatasetConfig& cfg,
                        const FieldEvaluatorFn& evaluator = {});

// Feature table; rows follow event order. Both labels are always carried;
// cfg.label_kind picks the training target downstream.
struct Table {
    std::vector<std::string> columns;
    std::vector<double> values; // row-major, rows() x columns.size()
    std::vector<int> label_unum;
    std::vector<int> label_index;
    DatasetConfig config;
    std::uint64_t schema_hash = 0;

    std::size_t rows() const { return label_unum.size(); }
    std::size_t cols() const { return columns.size(); }
    std::span<const double> row(std::size_t i) const {
        return {values.data() + i * cols(), cols()};
    }
    int label(std::size_t i) const {
        return config.label_kind == LabelKind::Unum ? label_unum[i] : label_index[i];
    }
};

// Hash of the column layout plus the ordering contract (sort, kicker_first,
// k, feature set); models refuse data built under a different one.
std::uint64_t dataset_schema_hash(const DatasetConfig& cfg);

Table build_dataset(const EventLog& log, const DatasetConfig& cfg, int workers = 1,
                    const FieldEvaluatorFn& evaluator = {});
std::vector<Table> build_datasets(const EventLog& log, std::span<const DatasetConfig> configs,
                                  int workers = 1, const FieldEvaluatorFn& evaluator = {});

// Natural-order feature matrix for one log, extracted once and assembled
// into any number of sorted variants without re-extraction.
class FeatureCache {
public:
    static FeatureCache build(const EventLog& log, int k, int workers = 1);
    Table assemble(const DatasetConfig& cfg, const FieldEvaluatorFn& evaluator = {}) const;
    int k() const { return k_; }

private:
    const EventLog* log_ = nullptr;
    int k_ = 2;
    std::size_t width_ = 0;
    std::vector<double> natural_; // rows x natural schema width
};

// All six sorter x kicker-first variants for one feature set / label kind.
std::vector<DatasetConfig> six_variants(LabelKind label, FeatureSet fs, int k = 2);

void write_table_csv(const Table& t, std::ostream& out);
// CSV plus "<path>.meta.json" sidecar (config, k, schema hash, row count).
void write_table_files(const Table& t, const std::string& csv_path);
Table read_table_files(const std::string& csv_path); // requires the sidecar

} // namespace p2d

#endif
