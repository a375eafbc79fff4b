#ifndef PASS2D_EVAL_HPP
#define PASS2D_EVAL_HPP

#include <array>

#include <json.hpp>

#include "pass2d/predictor.hpp"
#include "pass2d/synthgen.hpp"

namespace p2d {

struct EvalReport {
    double accuracy = 0;
    std::array<std::array<int, kNumClasses>, kNumClasses> confusion{}; // [true][predicted]
    std::size_t rows = 0;
    std::string model_kind;
    std::uint64_t model_schema = 0;
    std::uint64_t data_schema = 0;
};

// Fraction of rows whose argmax prediction equals the model's label kind.
// Throws SchemaMismatch on hash disagreement, InvalidInput("EmptyTable") on
// an empty table.
EvalReport accuracy(const Predictor& model, const Table& table);

// A unum relabeling: maps[unum] is the new number; identity outside the
// shuffled subset. The subset permutation has no fixed points.
struct UnumRelabeling {
    std::array<int, kTeamSize + 1> ours{};
    std::array<int, kTeamSize + 1> theirs{};
};

UnumRelabeling make_unum_relabeling(double proportion, std::uint64_t seed, bool relabel_ours,
                                    bool relabel_theirs);
EventLog apply_relabeling(const EventLog& log, const UnumRelabeling& map);

struct RobustnessCurve {
    std::vector<double> proportions; // includes the prepended 0
    std::vector<double> accuracies;
    std::uint64_t seed = 0;
    nlohmann::ordered_json relabelings; // per-proportion maps, for the report
};

inline const std::array<double, 5> kDefaultShuffleProportions{0.1, 0.25, 0.50, 0.75, 1.0};

// For each proportion, relabels ceil(p*11) players per side, rebuilds the
// dataset under cfg and re-evaluates the model. p = 0 is prepended as the
// reference point.
RobustnessCurve unum_shuffle_robustness(const Predictor& model, const EventLog& log,
                                        const DatasetConfig& cfg,
                                        std::span<const double> proportions, std::uint64_t seed,
                                        int workers = 1);

enum class ImportanceGrouping { ByColumn, ByFeatureGroup };

struct ImportanceEntry {
    std::string name;
    double score = 0;  // permutation: mean accuracy drop; gini: normalized share
    double stddev = 0; // over repeats (permutation only)
};

struct ImportanceTable {
    std::string method; // "permutation" | "gini"
    int n_repeats = 1;
    std::uint64_t seed = 0;
    double baseline = 0;
    std::vector<ImportanceEntry> entries;
};

// Shuffles each group's columns jointly across rows and reports the mean
// accuracy drop over n_repeats.
ImportanceTable permutation_importance(const Predictor& model, const Table& table,
                                       ImportanceGrouping grouping, int n_repeats,
                                       std::uint64_t seed);

class RFModel;
ImportanceTable gini_importance_table(const RFModel& model, const Table& reference,
                                      ImportanceGrouping grouping);

// One experiment rendered as reports/<name>/{metrics.csv, meta.json}.
struct Report {
    std::string name;
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;
    nlohmann::ordered_json meta;
};

Report report_from_eval(const EvalReport& r, const std::string& name);
Report report_from_curve(const RobustnessCurve& c, const std::string& name);
Report report_from_importance(const ImportanceTable& t, const std::string& name);

// Writes each report under dir plus a manifest.json; deterministic bytes.
void write_reports(std::span<const Report> reports, const std::string& dir);

} // namespace p2d

#endif
