#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "pass2d/common.hpp"
#include "pass2d/eval.hpp"
#include "pass2d/mlp.hpp"
#include "pass2d/parallel.hpp"
#include "pass2d/rf.hpp"
#include "pass2d/synthgen.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

namespace {

struct GlobalOpts {
    int workers = 0; // 0 = hardware concurrency (or PASS2D_WORKERS)
};

int resolve_workers(const GlobalOpts& g) {
    if (g.workers > 0) return g.workers;
    if (const char* env = std::getenv("PASS2D_WORKERS")) {
        const int w = std::atoi(env);
        if (w > 0) return w;
    }
    return p2d::default_workers();
}

std::vector<double> parse_proportions(const std::string& csv) {
    std::vector<double> out;
    std::stringstream ss(csv);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        std::size_t used = 0;
        const double v = std::stod(tok, &used);
        if (used != tok.size()) throw std::invalid_argument("bad proportion '" + tok + "'");
        out.push_back(v);
    }
    if (out.empty()) throw std::invalid_argument("empty proportions list");
    return out;
}

p2d::DatasetConfig dataset_config_from(const std::string& sort, bool kicker_first,
                                       const std::string& features, const std::string& label,
                                       int k) {
    p2d::DatasetConfig cfg;
    cfg.sort = p2d::sort_method_from_name(sort);
    cfg.kicker_first = kicker_first;
    cfg.feature_set = p2d::feature_set_from_name(features);
    cfg.label_kind = p2d::label_kind_from_name(label);
    cfg.k = k;
    return cfg;
}

// ---- synth ----------------------------------------------------------------

struct SynthArgs {
    std::uint64_t seed = 1;
    std::size_t events = 1000;
    double w_risk = p2d::PolicyWeights{}.w_risk;
    double w_dist = p2d::PolicyWeights{}.w_dist;
    double w_goal = p2d::PolicyWeights{}.w_goal;
    double jitter = 6.0;
    std::string out;
};

int cmd_synth(const SynthArgs& a, const GlobalOpts& g) {
    p2d::GenConfig cfg;
    cfg.seed = a.seed;
    cfg.n_events = a.events;
    cfg.weights = {a.w_risk, a.w_dist, a.w_goal};
    cfg.noise_sigma = a.jitter;
    const p2d::EventLog log = p2d::generate_events(cfg, resolve_workers(g));
    p2d::write_event_log_file(log, a.out);
    std::cout << "wrote " << log.events.size() << " events (seed " << a.seed << ") to " << a.out
              << "\n";
    return 0;
}

// ---- schema ---------------------------------------------------------------

int cmd_schema(int k, const std::string& out) {
    const p2d::FeatureSchema schema = p2d::FeatureSchema::make(k);
    if (out.empty()) {
        schema.write_csv(std::cout);
    } else {
        std::ofstream f(out, std::ios::binary);
        if (!f) throw p2d::IoError("cannot open " + out + " for writing");
        schema.write_csv(f);
        std::cout << "wrote " << schema.size() << " columns to " << out << "\n";
    }
    return 0;
}

// ---- build ----------------------------------------------------------------

struct BuildArgs {
    std::string input;
    std::string out_dir = ".";
    std::string sort = "unum";
    bool kicker_first = false;
    std::string features = "all";
    std::string label = "index";
    int k = 2;
    bool all_variants = false;
};

int cmd_build(const BuildArgs& a, const GlobalOpts& g) {
    const p2d::EventLog log = p2d::parse_event_log_file(a.input);
    fs::create_directories(a.out_dir);
    std::vector<p2d::DatasetConfig> configs;
    if (a.all_variants) {
        configs = p2d::six_variants(p2d::label_kind_from_name(a.label),
                                    p2d::feature_set_from_name(a.features), a.k);
    } else {
        configs.push_back(dataset_config_from(a.sort, a.kicker_first, a.features, a.label, a.k));
    }
    for (const auto& cfg : configs) {
        const p2d::Table t = p2d::build_dataset(log, cfg, resolve_workers(g));
        const fs::path csv = fs::path(a.out_dir) / (cfg.variant_name() + ".csv");
        p2d::write_table_files(t, csv.string());
        std::cout << csv.string() << ": " << t.rows() << " rows x " << t.cols() << " columns\n";
    }
    return 0;
}

// ---- train ----------------------------------------------------------------

struct TrainArgs {
    std::string model = "rf";
    std::string data;
    std::string out;
    std::string label; // optional override of the sidecar label kind
    std::uint64_t seed = 1;
    // mlp
    std::string hidden = "1024,512,256,64,32";
    int epochs = 100;
    int batch = 256;
    double lr = 1e-3;
    double dropout = 0.1;
    std::string optimizer = "adam";
    // rf
    int trees = 100;
    int depth = 1000000;
    int min_split = 2;
    int mtry = 0;
    bool no_bootstrap = false;
};

std::vector<int> parse_int_list(const std::string& csv) {
    std::vector<int> out;
    std::stringstream ss(csv);
    std::string tok;
    while (std::getline(ss, tok, ',')) out.push_back(std::stoi(tok));
    return out;
}

int cmd_train(const TrainArgs& a, const GlobalOpts& g) {
    p2d::Table t = p2d::read_table_files(a.data);
    if (!a.label.empty()) t.config.label_kind = p2d::label_kind_from_name(a.label);
    if (a.model == "mlp") {
        p2d::MLPConfig cfg;
        cfg.hidden_layers = parse_int_list(a.hidden);
        cfg.epochs = a.epochs;
        cfg.batch_size = a.batch;
        cfg.learning_rate = a.lr;
        cfg.dropout_rate = a.dropout;
        cfg.optimizer = a.optimizer;
        cfg.seed = a.seed;
        const p2d::MLPModel m = p2d::mlp_train(t, cfg);
        m.save(a.out);
    } else {
        p2d::RFConfig cfg;
        cfg.n_trees = a.trees;
        cfg.max_depth = a.depth;
        cfg.min_samples_split = a.min_split;
        cfg.features_per_split = a.mtry;
        cfg.bootstrap = !a.no_bootstrap;
        cfg.seed = a.seed;
        const p2d::RFModel m = p2d::rf_train(t, cfg, resolve_workers(g));
        m.save(a.out);
    }
    std::cout << "wrote " << a.model << " model to " << a.out << "\n";
    return 0;
}

// ---- eval -----------------------------------------------------------------

int cmd_eval(const std::string& model_path, const std::string& data_path,
             const std::string& out_dir, const std::string& name) {
    const auto model = p2d::load_model(model_path);
    const p2d::Table t = p2d::read_table_files(data_path);
    const p2d::EvalReport r = p2d::accuracy(*model, t);
    if (!out_dir.empty()) {
        const std::vector<p2d::Report> reports{p2d::report_from_eval(r, name)};
        p2d::write_reports(reports, out_dir);
    }
    std::cout << p2d::format_g9(r.accuracy) << "\n"; // machine-greppable last line
    return 0;
}

// ---- robustness -----------------------------------------------------------

struct RobustnessArgs {
    std::string model;
    std::string log;
    std::string sort = "unum";
    bool kicker_first = false;
    std::string features = "all";
    std::string label = "index";
    int k = 2;
    std::string proportions = "0.1,0.25,0.5,0.75,1.0";
    std::uint64_t seed = 1;
    std::string out_dir;
    std::string name = "robustness";
};

int cmd_robustness(const RobustnessArgs& a, const GlobalOpts& g) {
    const auto model = p2d::load_model(a.model);
    const p2d::EventLog log = p2d::parse_event_log_file(a.log);
    const p2d::DatasetConfig cfg =
        dataset_config_from(a.sort, a.kicker_first, a.features, a.label, a.k);
    const std::vector<double> props = parse_proportions(a.proportions);
    const p2d::RobustnessCurve curve =
        p2d::unum_shuffle_robustness(*model, log, cfg, props, a.seed, resolve_workers(g));
    if (!a.out_dir.empty()) {
        const std::vector<p2d::Report> reports{p2d::report_from_curve(curve, a.name)};
        p2d::write_reports(reports, a.out_dir);
    }
    for (std::size_t i = 0; i < curve.proportions.size(); ++i)
        std::cout << p2d::format_g9(curve.proportions[i]) << ","
                  << p2d::format_g9(curve.accuracies[i]) << "\n";
    return 0;
}

// ---- importance -----------------------------------------------------------

struct ImportanceArgs {
    std::string model;
    std::string data;
    std::string group_by = "feature-group";
    std::string method = "permutation";
    int repeats = 5;
    std::uint64_t seed = 1;
    std::string out_dir;
    std::string name = "importance";
};

int cmd_importance(const ImportanceArgs& a) {
    const p2d::Table t = p2d::read_table_files(a.data);
    p2d::ImportanceGrouping grouping;
    if (a.group_by == "feature-group") grouping = p2d::ImportanceGrouping::ByFeatureGroup;
    else if (a.group_by == "column") grouping = p2d::ImportanceGrouping::ByColumn;
    else throw p2d::InvalidInput("unknown group-by '" + a.group_by + "'");

    p2d::ImportanceTable table;
    if (a.method == "permutation") {
        const auto model = p2d::load_model(a.model);
        table = p2d::permutation_importance(*model, t, grouping, a.repeats, a.seed);
    } else if (a.method == "gini") {
        const p2d::RFModel m = p2d::RFModel::load(a.model);
        table = p2d::gini_importance_table(m, t, grouping);
    } else {
        throw p2d::InvalidInput("unknown method '" + a.method + "'");
    }
    if (!a.out_dir.empty()) {
        const std::vector<p2d::Report> reports{p2d::report_from_importance(table, a.name)};
        p2d::write_reports(reports, a.out_dir);
    }
    for (const auto& e : table.entries)
        std::cout << e.name << "," << p2d::format_g9(e.score) << ","
                  << p2d::format_g9(e.stddev) << "\n";
    return 0;
}

// ---- pipeline ---------------------------------------------------------------

struct PipelineArgs {
    std::string config;
    std::string out_dir;
};

int cmd_pipeline(const PipelineArgs& a, const GlobalOpts& g) {
    std::ifstream in(a.config, std::ios::binary);
    if (!in) throw p2d::IoError("cannot open " + a.config);
    json cfg;
    in >> cfg;
    const int workers = resolve_workers(g);
    const std::string out_dir = !a.out_dir.empty() ? a.out_dir : cfg.value("out_dir", "pass2d_out");
    fs::create_directories(out_dir);
    fs::create_directories(fs::path(out_dir) / "data");
    fs::create_directories(fs::path(out_dir) / "models");

    const std::uint64_t seed = cfg.value("seed", 1ULL);

    // data: either an existing log or a synthetic one
    p2d::EventLog log;
    if (cfg.contains("input_log")) {
        log = p2d::parse_event_log_file(cfg["input_log"].get<std::string>());
    } else {
        p2d::GenConfig gen;
        gen.seed = seed;
        const auto& jg = cfg.value("gen", json::object());
        gen.n_events = jg.value("events", 20000ULL);
        gen.weights.w_risk = jg.value("w_risk", gen.weights.w_risk);
        gen.weights.w_dist = jg.value("w_dist", gen.weights.w_dist);
        gen.weights.w_goal = jg.value("w_goal", gen.weights.w_goal);
        gen.noise_sigma = jg.value("jitter", gen.noise_sigma);
        log = p2d::generate_events(gen, workers);
        p2d::write_event_log_file(log, (fs::path(out_dir) / "data" / "events.p2dl").string());
    }

    const double train_fraction = cfg.value("train_fraction", 0.8);
    const std::size_t n_train = static_cast<std::size_t>(
        train_fraction * static_cast<double>(log.events.size()));
    if (n_train == 0 || n_train >= log.events.size())
        throw p2d::InvalidInput("train_fraction leaves an empty split");
    p2d::EventLog train_log{log.header, {log.events.begin(),
                                         log.events.begin() + static_cast<std::ptrdiff_t>(n_train)}};
    p2d::EventLog test_log{log.header, {log.events.begin() + static_cast<std::ptrdiff_t>(n_train),
                                        log.events.end()}};

    std::vector<p2d::DatasetConfig> dconfigs;
    const int k = cfg.value("k", 2);
    const std::string label = cfg.value("label", "index");
    const std::string features = cfg.value("features", "all");
    if (cfg.value("all_variants", true)) {
        dconfigs = p2d::six_variants(p2d::label_kind_from_name(label),
                                     p2d::feature_set_from_name(features), k);
    } else {
        for (const auto& jd : cfg.at("datasets"))
            dconfigs.push_back(dataset_config_from(
                jd.value("sort", "unum"), jd.value("kicker_first", false),
                jd.value("features", features), jd.value("label", label), k));
    }
    if (dconfigs.empty()) throw p2d::InvalidInput("pipeline: no dataset configs");

    std::vector<std::string> models = cfg.value("models", std::vector<std::string>{"rf"});
    std::vector<p2d::Report> reports;
    ordered_json summary = ordered_json::array();

    for (const auto& dc : dconfigs) {
        const p2d::Table train = p2d::build_dataset(train_log, dc, workers);
        const p2d::Table test = p2d::build_dataset(test_log, dc, workers);
        p2d::write_table_files(train,
                               (fs::path(out_dir) / "data" / (dc.variant_name() + "_train.csv")).string());
        p2d::write_table_files(test,
                               (fs::path(out_dir) / "data" / (dc.variant_name() + "_test.csv")).string());
        for (const std::string& kind : models) {
            std::unique_ptr<p2d::Predictor> model;
            std::string model_path;
            if (kind == "mlp") {
                p2d::MLPConfig mc;
                const auto& jm = cfg.value("mlp", json::object());
                if (jm.contains("hidden")) mc.hidden_layers = jm["hidden"].get<std::vector<int>>();
                mc.epochs = jm.value("epochs", mc.epochs);
                mc.batch_size = jm.value("batch", mc.batch_size);
                mc.learning_rate = jm.value("lr", mc.learning_rate);
                mc.dropout_rate = jm.value("dropout", mc.dropout_rate);
                mc.seed = seed;
                auto trained = p2d::mlp_train(train, mc);
                model_path = (fs::path(out_dir) / "models" / (dc.variant_name() + ".mlp.json")).string();
                trained.save(model_path);
                model = std::make_unique<p2d::MLPModel>(std::move(trained));
            } else if (kind == "rf") {
                p2d::RFConfig rc;
                const auto& jr = cfg.value("rf", json::object());
                rc.n_trees = jr.value("trees", rc.n_trees);
                rc.max_depth = jr.value("depth", rc.max_depth);
                rc.features_per_split = jr.value("mtry", rc.features_per_split);
                rc.seed = seed;
                auto trained = p2d::rf_train(train, rc, workers);
                model_path = (fs::path(out_dir) / "models" / (dc.variant_name() + ".rf.json")).string();
                trained.save(model_path);
                model = std::make_unique<p2d::RFModel>(std::move(trained));
            } else {
                throw p2d::InvalidInput("pipeline: unknown model kind '" + kind + "'");
            }

            const p2d::EvalReport er = p2d::accuracy(*model, test);
            reports.push_back(p2d::report_from_eval(er, dc.variant_name() + "_" + kind + "_eval"));
            ordered_json row;
            row["variant"] = dc.variant_name();
            row["model"] = kind;
            row["accuracy"] = er.accuracy;
            row["model_file"] = model_path;
            summary.push_back(row);

            const auto& jx = cfg.value("experiments", json::object());
            if (jx.value("robustness", false)) {
                const auto curve = p2d::unum_shuffle_robustness(
                    *model, test_log, dc, p2d::kDefaultShuffleProportions, seed, workers);
                reports.push_back(
                    p2d::report_from_curve(curve, dc.variant_name() + "_" + kind + "_robustness"));
            }
            if (jx.value("importance", false)) {
                const auto imp = p2d::permutation_importance(
                    *model, test, p2d::ImportanceGrouping::ByFeatureGroup,
                    jx.value("importance_repeats", 5), seed);
                reports.push_back(
                    p2d::report_from_importance(imp, dc.variant_name() + "_" + kind + "_importance"));
            }
        }
    }

    p2d::write_reports(reports, (fs::path(out_dir) / "reports").string());
    std::ofstream sum(fs::path(out_dir) / "summary.json", std::ios::binary);
    sum << summary.dump(2) << '\n';
    std::cout << "pipeline complete: " << summary.size() << " model runs, reports under "
              << (fs::path(out_dir) / "reports").string() << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"pass2d: pass-receiver prediction laboratory for Soccer Simulation 2D"};
    app.require_subcommand(1);
    GlobalOpts global;
    app.add_option("--workers", global.workers, "worker threads (default: PASS2D_WORKERS or hardware)");

    SynthArgs synth;
    auto* s_synth = app.add_subcommand("synth", "generate a synthetic pass-event log");
    s_synth->add_option("--seed", synth.seed, "generator seed");
    s_synth->add_option("--events", synth.events, "number of events")
        ->check(CLI::PositiveNumber);
    s_synth->add_option("--w-risk", synth.w_risk, "policy weight: opening angle");
    s_synth->add_option("--w-dist", synth.w_dist, "policy weight: pass distance");
    s_synth->add_option("--w-goal", synth.w_goal, "policy weight: goal proximity");
    s_synth->add_option("--jitter", synth.jitter, "formation jitter sigma, meters")
        ->check(CLI::NonNegativeNumber);
    s_synth->add_option("-o,--output", synth.out, "output .p2dl path")->required();

    int schema_k = 2;
    std::string schema_out;
    auto* s_schema = app.add_subcommand("schema", "export the feature schema as CSV");
    s_schema->add_option("--k", schema_k, "top-k riskiest/nearest opponents")
        ->check(CLI::Range(1, 11));
    s_schema->add_option("-o,--output", schema_out, "output CSV path (default: stdout)");

    BuildArgs build;
    auto* s_build = app.add_subcommand("build", "build training tables from an event log");
    s_build->add_option("input", build.input, "input .p2dl log")->required();
    s_build->add_option("-o,--out-dir", build.out_dir, "output directory");
    s_build->add_option("--sort", build.sort, "unum | x | fe");
    s_build->add_flag("--kicker-first", build.kicker_first, "move the holder's block to slot 1");
    s_build->add_option("--features", build.features, "all | position");
    s_build->add_option("--label", build.label, "unum | index (training target tag)");
    s_build->add_option("--k", build.k, "top-k opponents")->check(CLI::Range(1, 11));
    s_build->add_flag("--all-variants", build.all_variants, "emit all six sorter/kicker-first tables");

    TrainArgs train;
    auto* s_train = app.add_subcommand("train", "train a predictor on a built table");
    s_train->add_option("--model", train.model, "mlp | rf")->required();
    s_train->add_option("--data", train.data, "table CSV (with sidecar)")->required();
    s_train->add_option("-o,--output", train.out, "model file")->required();
    s_train->add_option("--label", train.label, "override sidecar label kind: unum | index");
    s_train->add_option("--seed", train.seed, "training seed");
    s_train->add_option("--hidden", train.hidden, "mlp hidden widths, comma separated");
    s_train->add_option("--epochs", train.epochs, "mlp epochs")->check(CLI::PositiveNumber);
    s_train->add_option("--batch", train.batch, "mlp batch size")->check(CLI::PositiveNumber);
    s_train->add_option("--lr", train.lr, "mlp learning rate");
    s_train->add_option("--dropout", train.dropout, "mlp dropout after first hidden layer");
    s_train->add_option("--optimizer", train.optimizer, "adam | sgd");
    s_train->add_option("--trees", train.trees, "rf tree count")->check(CLI::PositiveNumber);
    s_train->add_option("--depth", train.depth, "rf max depth")->check(CLI::PositiveNumber);
    s_train->add_option("--min-split", train.min_split, "rf min samples to split");
    s_train->add_option("--mtry", train.mtry, "rf features per split (0 = sqrt)");
    s_train->add_flag("--no-bootstrap", train.no_bootstrap, "train each tree on the full table");

    std::string eval_model, eval_data, eval_out, eval_name = "eval";
    auto* s_eval = app.add_subcommand("eval", "evaluate a model on a table");
    s_eval->add_option("--model", eval_model, "model file")->required();
    s_eval->add_option("--data", eval_data, "table CSV")->required();
    s_eval->add_option("-o,--out-dir", eval_out, "report directory (optional)");
    s_eval->add_option("--name", eval_name, "experiment name");

    RobustnessArgs rob;
    auto* s_rob = app.add_subcommand("robustness", "unum-shuffle robustness curve");
    s_rob->add_option("--model", rob.model, "model file")->required();
    s_rob->add_option("--log", rob.log, "evaluation .p2dl log")->required();
    s_rob->add_option("--sort", rob.sort, "unum | x | fe");
    s_rob->add_flag("--kicker-first", rob.kicker_first, "");
    s_rob->add_option("--features", rob.features, "all | position");
    s_rob->add_option("--label", rob.label, "unum | index");
    s_rob->add_option("--k", rob.k, "top-k opponents")->check(CLI::Range(1, 11));
    s_rob->add_option("--proportions", rob.proportions, "comma-separated proportions")
        ->check([](const std::string& v) -> std::string {
            try {
                parse_proportions(v);
                return {};
            } catch (const std::exception& e) {
                return e.what();
            }
        });
    s_rob->add_option("--seed", rob.seed, "shuffle seed");
    s_rob->add_option("-o,--out-dir", rob.out_dir, "report directory");
    s_rob->add_option("--name", rob.name, "experiment name");

    ImportanceArgs imp;
    auto* s_imp = app.add_subcommand("importance", "feature importance analysis");
    s_imp->add_option("--model", imp.model, "model file")->required();
    s_imp->add_option("--data", imp.data, "table CSV")->required();
    s_imp->add_option("--group-by", imp.group_by, "feature-group | column");
    s_imp->add_option("--method", imp.method, "permutation | gini");
    s_imp->add_option("--repeats", imp.repeats, "shuffle repeats")->check(CLI::PositiveNumber);
    s_imp->add_option("--seed", imp.seed, "shuffle seed");
    s_imp->add_option("-o,--out-dir", imp.out_dir, "report directory");
    s_imp->add_option("--name", imp.name, "experiment name");

    PipelineArgs pipe;
    auto* s_pipe = app.add_subcommand("pipeline", "run the full reproduction from a config file");
    s_pipe->add_option("--config", pipe.config, "pipeline config JSON")->required();
    s_pipe->add_option("-o,--out-dir", pipe.out_dir, "output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2; // non-help parse problems are usage errors
    }

    try {
        if (s_synth->parsed()) return cmd_synth(synth, global);
        if (s_schema->parsed()) return cmd_schema(schema_k, schema_out);
        if (s_build->parsed()) return cmd_build(build, global);
        if (s_train->parsed()) return cmd_train(train, global);
        if (s_eval->parsed()) return cmd_eval(eval_model, eval_data, eval_out, eval_name);
        if (s_rob->parsed()) return cmd_robustness(rob, global);
        if (s_imp->parsed()) return cmd_importance(imp);
        if (s_pipe->parsed()) return cmd_pipeline(pipe, global);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
