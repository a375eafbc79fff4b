#include "pass2d/mlp.hpp"

#include <cmath>
#include <fstream>
#include <numeric>

#include <json.hpp>

#include "pass2d/common.hpp"
#include "pass2d/rng.hpp"

namespace p2d {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;
using nlohmann::json;
using nlohmann::ordered_json;

struct Net {
    std::vector<MatrixXd> W;
    std::vector<VectorXd> b;
    std::size_t layers() const { return W.size(); }
};

std::vector<int> layer_widths(int input, const MLPConfig& cfg) {
    std::vector<int> w;
    w.push_back(input);
    for (int h : cfg.hidden_layers) w.push_back(h);
    w.push_back(cfg.outputs);
    return w;
}

// Scaled uniform init keyed to fan-in; biases small uniform so no unit sits
// exactly on the rectifier kink. Entries are drawn in a fixed order.
Net init_net(int input, const MLPConfig& cfg) {
    const std::vector<int> widths = layer_widths(input, cfg);
    Rng rng(derive_seed(cfg.seed, 101));
    Net net;
    for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
        const int in = widths[l];
        const int out = widths[l + 1];
        const double limit = std::sqrt(6.0 / static_cast<double>(in));
        MatrixXd W(out, in);
        for (int j = 0; j < in; ++j)
            for (int i = 0; i < out; ++i) W(i, j) = rng.uniform(-limit, limit);
        VectorXd b(out);
        for (int i = 0; i < out; ++i) b[i] = rng.uniform(-0.1, 0.1);
        net.W.push_back(std::move(W));
        net.b.push_back(std::move(b));
    }
    return net;
}

void softmax_inplace(MatrixXd& Z) {
    for (Eigen::Index c = 0; c < Z.cols(); ++c) {
        VectorXd col = Z.col(c);
        const double m = col.maxCoeff();
        col = (col.array() - m).exp();
        Z.col(c) = col / col.sum();
    }
}

// Forward pass caching activations; drop_mask may be empty (inference) or a
// mask applied after the first hidden layer.
struct ForwardCache {
    std::vector<MatrixXd> Z; // pre-activations per layer
    std::vector<MatrixXd> A; // activations; A[0] is the input
};

void forward(const std::vector<MatrixXd>& W, const std::vector<VectorXd>& b, const MatrixXd& X,
             const MatrixXd* drop_mask, ForwardCache& fc) {
    const std::size_t L = W.size();
    fc.Z.assign(L, MatrixXd());
    fc.A.assign(L + 1, MatrixXd());
    fc.A[0] = X;
    for (std::size_t l = 0; l < L; ++l) {
        fc.Z[l].noalias() = W[l] * fc.A[l];
        fc.Z[l].colwise() += b[l];
        if (l + 1 < L) {
            fc.A[l + 1] = fc.Z[l].cwiseMax(0.0);
            if (l == 0 && drop_mask != nullptr)
                fc.A[l + 1] = fc.A[l + 1].cwiseProduct(*drop_mask);
        } else {
            fc.A[l + 1] = fc.Z[l];
            softmax_inplace(fc.A[l + 1]);
        }
    }
}

double batch_loss(const MatrixXd& P, const std::vector<int>& labels,
                  std::span<const std::size_t> cols) {
    double loss = 0;
    for (Eigen::Index c = 0; c < P.cols(); ++c)
        loss -= std::log(P(labels[cols[static_cast<std::size_t>(c)]], c));
    return loss / static_cast<double>(P.cols());
}

// Mean cross-entropy gradients for one batch.
double forward_backward(const Net& net, const MatrixXd& X, const std::vector<int>& labels,
                        std::span<const std::size_t> cols, const MatrixXd* drop_mask,
                        std::vector<MatrixXd>& gW, std::vector<VectorXd>& gb) {
    const std::size_t L = net.layers();
    ForwardCache fc;
    forward(net.W, net.b, X, drop_mask, fc);
    const double loss = batch_loss(fc.A[L], labels, cols);
    const double inv_n = 1.0 / static_cast<double>(X.cols());

    MatrixXd delta = fc.A[L];
    for (Eigen::Index c = 0; c < delta.cols(); ++c)
        delta(labels[cols[static_cast<std::size_t>(c)]], c) -= 1.0;
    delta *= inv_n;

    gW.assign(L, MatrixXd());
    gb.assign(L, VectorXd());
    for (std::size_t l = L; l-- > 0;) {
        gW[l].noalias() = delta * fc.A[l].transpose();
        gb[l] = delta.rowwise().sum();
        if (l > 0) {
            MatrixXd dA = net.W[l].transpose() * delta;
            if (l == 1 && drop_mask != nullptr) dA = dA.cwiseProduct(*drop_mask);
            delta = dA.cwiseProduct((fc.Z[l - 1].array() > 0.0).cast<double>().matrix());
        }
    }
    return loss;
}

struct AdamState {
    std::vector<MatrixXd> mW, vW;
    std::vector<VectorXd> mb, vb;
    long t = 0;
};

void adam_step(Net& net, const std::vector<MatrixXd>& gW, const std::vector<VectorXd>& gb,
               AdamState& st, double lr) {
    constexpr double b1 = 0.9, b2 = 0.999, eps = 1e-8;
    ++st.t;
    const double c1 = 1.0 - std::pow(b1, static_cast<double>(st.t));
    const double c2 = 1.0 - std::pow(b2, static_cast<double>(st.t));
    for (std::size_t l = 0; l < net.layers(); ++l) {
        st.mW[l] = b1 * st.mW[l] + (1 - b1) * gW[l];
        st.vW[l] = b2 * st.vW[l] + (1 - b2) * gW[l].cwiseProduct(gW[l]);
        st.mb[l] = b1 * st.mb[l] + (1 - b1) * gb[l];
        st.vb[l] = b2 * st.vb[l] + (1 - b2) * gb[l].cwiseProduct(gb[l]);
        net.W[l].array() -=
            lr * (st.mW[l].array() / c1) / ((st.vW[l].array() / c2).sqrt() + eps);
        net.b[l].array() -=
            lr * (st.mb[l].array() / c1) / ((st.vb[l].array() / c2).sqrt() + eps);
    }
}

} // namespace

void MLPConfig::validate() const {
    for (int h : hidden_layers)
        if (h <= 0) throw InvalidInput("MLPConfig: layer widths must be positive");
    if (outputs <= 0) throw InvalidInput("MLPConfig: outputs must be positive");
    if (!(dropout_rate >= 0.0 && dropout_rate < 1.0))
        throw InvalidInput("MLPConfig: dropout_rate must be in [0, 1)");
    if (epochs <= 0) throw InvalidInput("MLPConfig: epochs must be > 0");
    if (batch_size <= 0) throw InvalidInput("MLPConfig: batch_size must be > 0");
    if (!(learning_rate > 0.0)) throw InvalidInput("MLPConfig: learning_rate must be > 0");
    if (optimizer != "adam" && optimizer != "sgd")
        throw InvalidInput("MLPConfig: optimizer must be adam or sgd");
}

MLPModel mlp_train(const Table& table, const MLPConfig& cfg) {
    cfg.validate();
    const std::size_t n = table.rows();
    const std::size_t w = table.cols();
    if (n == 0) throw InvalidInput("mlp_train: empty table");

    std::vector<int> labels(n);
    for (std::size_t i = 0; i < n; ++i) {
        const int cls = table.label(i) - 1;
        if (cls < 0 || cls >= cfg.outputs)
            throw InvalidInput("mlp_train: label out of range at row " + std::to_string(i));
        labels[i] = cls;
    }

    MLPModel model;
    model.config = cfg;
    model.target = table.config.label_kind;
    model.schema = table.schema_hash;
    model.mean = VectorXd::Zero(static_cast<Eigen::Index>(w));
    model.stddev = VectorXd::Zero(static_cast<Eigen::Index>(w));
    for (std::size_t i = 0; i < n; ++i)
        model.mean += Eigen::Map<const VectorXd>(table.row(i).data(), static_cast<Eigen::Index>(w));
    model.mean /= static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
        VectorXd d = Eigen::Map<const VectorXd>(table.row(i).data(), static_cast<Eigen::Index>(w)) -
                     model.mean;
        model.stddev += d.cwiseProduct(d);
    }
    model.stddev = (model.stddev / static_cast<double>(n)).cwiseSqrt();
    for (Eigen::Index i = 0; i < model.stddev.size(); ++i)
        if (model.stddev[i] < 1e-12) model.stddev[i] = 1.0;

    Net net = init_net(static_cast<int>(w), cfg);
    AdamState adam;
    adam.mW.resize(net.layers());
    adam.vW.resize(net.layers());
    adam.mb.resize(net.layers());
    adam.vb.resize(net.layers());
    for (std::size_t l = 0; l < net.layers(); ++l) {
        adam.mW[l] = MatrixXd::Zero(net.W[l].rows(), net.W[l].cols());
        adam.vW[l] = MatrixXd::Zero(net.W[l].rows(), net.W[l].cols());
        adam.mb[l] = VectorXd::Zero(net.b[l].size());
        adam.vb[l] = VectorXd::Zero(net.b[l].size());
    }

    const bool use_dropout = cfg.dropout_rate > 0.0 && !cfg.hidden_layers.empty();
    const double keep = 1.0 - cfg.dropout_rate;
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::vector<MatrixXd> gW;
    std::vector<VectorXd> gb;

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        Rng shuffle_rng(derive_seed(cfg.seed, 0xE0000u + static_cast<unsigned>(epoch)));
        shuffle_rng.shuffle(order);
        Rng drop_rng(derive_seed(cfg.seed, 0xD0000u + static_cast<unsigned>(epoch)));

        double epoch_loss = 0;
        std::size_t batches = 0;
        for (std::size_t start = 0; start < n; start += static_cast<std::size_t>(cfg.batch_size)) {
            const std::size_t bs = std::min<std::size_t>(static_cast<std::size_t>(cfg.batch_size),
                                                         n - start);
            MatrixXd X(static_cast<Eigen::Index>(w), static_cast<Eigen::Index>(bs));
            for (std::size_t j = 0; j < bs; ++j) {
                const auto row = table.row(order[start + j]);
                X.col(static_cast<Eigen::Index>(j)) =
                    (Eigen::Map<const VectorXd>(row.data(), static_cast<Eigen::Index>(w)) -
                     model.mean)
                        .cwiseQuotient(model.stddev);
            }
            MatrixXd mask;
            if (use_dropout) {
                mask.resize(cfg.hidden_layers[0], static_cast<Eigen::Index>(bs));
                for (Eigen::Index c = 0; c < mask.cols(); ++c)
                    for (Eigen::Index r = 0; r < mask.rows(); ++r)
                        mask(r, c) = drop_rng.uniform01() < keep ? 1.0 / keep : 0.0;
            }
            const double loss = forward_backward(
                net, X, labels, std::span<const std::size_t>(order.data() + start, bs),
                use_dropout ? &mask : nullptr, gW, gb);
            if (!std::isfinite(loss))
                throw TrainingDiverged(epoch + 1, "non-finite training loss");
            epoch_loss += loss;
            ++batches;
            if (cfg.optimizer == "adam") {
                adam_step(net, gW, gb, adam, cfg.learning_rate);
            } else {
                for (std::size_t l = 0; l < net.layers(); ++l) {
                    net.W[l] -= cfg.learning_rate * gW[l];
                    net.b[l] -= cfg.learning_rate * gb[l];
                }
            }
        }
        if (!std::isfinite(epoch_loss / static_cast<double>(batches)))
            throw TrainingDiverged(epoch + 1, "non-finite training loss");
    }

    model.weights = std::move(net.W);
    model.biases = std::move(net.b);
    return model;
}

Eigen::VectorXd MLPModel::predict_proba(std::span<const double> row) const {
    if (static_cast<Eigen::Index>(row.size()) != mean.size())
        throw SchemaMismatch("predict: row width " + std::to_string(row.size()) +
                             " does not match model input " + std::to_string(mean.size()));
    MatrixXd X =
        (Eigen::Map<const VectorXd>(row.data(), mean.size()) - mean).cwiseQuotient(stddev);
    ForwardCache fc;
    forward(weights, biases, X, nullptr, fc);
    return fc.A[weights.size()].col(0);
}

int MLPModel::predict_class(std::span<const double> row) const {
    const VectorXd p = predict_proba(row);
    int best = 0;
    for (int i = 1; i < p.size(); ++i)
        if (p[i] > p[best]) best = i;
    return best;
}

std::vector<int> MLPModel::predict_classes(const Table& t) const {
    if (static_cast<Eigen::Index>(t.cols()) != mean.size())
        throw SchemaMismatch("predict: table width does not match model input");
    const std::size_t n = t.rows();
    std::vector<int> out(n);
    constexpr std::size_t kChunk = 2048;
    ForwardCache fc;
    for (std::size_t start = 0; start < n; start += kChunk) {
        const std::size_t bs = std::min(kChunk, n - start);
        MatrixXd X(mean.size(), static_cast<Eigen::Index>(bs));
        for (std::size_t j = 0; j < bs; ++j)
            X.col(static_cast<Eigen::Index>(j)) =
                (Eigen::Map<const VectorXd>(t.row(start + j).data(), mean.size()) - mean)
                    .cwiseQuotient(stddev);
        forward(weights, biases, X, nullptr, fc);
        const MatrixXd& P = fc.A[weights.size()];
        for (std::size_t j = 0; j < bs; ++j) {
            int best = 0;
            for (int i = 1; i < P.rows(); ++i)
                if (P(i, static_cast<Eigen::Index>(j)) > P(best, static_cast<Eigen::Index>(j)))
                    best = i;
            out[start + j] = best;
        }
    }
    return out;
}

void MLPModel::save(const std::string& path) const {
    ordered_json j;
    j["kind"] = "mlp";
    j["format_version"] = 1;
    j["schema_hash"] = hex64(schema);
    j["label_kind"] = label_kind_name(target);
    j["config"] = {{"hidden_layers", config.hidden_layers},
                   {"outputs", config.outputs},
                   {"dropout_rate", config.dropout_rate},
                   {"epochs", config.epochs},
                   {"batch_size", config.batch_size},
                   {"learning_rate", config.learning_rate},
                   {"optimizer", config.optimizer},
                   {"seed", config.seed}};
    j["mean"] = std::vector<double>(mean.data(), mean.data() + mean.size());
    j["stddev"] = std::vector<double>(stddev.data(), stddev.data() + stddev.size());
    ordered_json layers = ordered_json::array();
    for (std::size_t l = 0; l < weights.size(); ++l) {
        ordered_json layer;
        layer["rows"] = weights[l].rows();
        layer["cols"] = weights[l].cols();
        std::vector<double> wv;
        wv.reserve(static_cast<std::size_t>(weights[l].size()));
        for (Eigen::Index r = 0; r < weights[l].rows(); ++r)
            for (Eigen::Index c = 0; c < weights[l].cols(); ++c) wv.push_back(weights[l](r, c));
        layer["w"] = wv;
        layer["b"] = std::vector<double>(biases[l].data(), biases[l].data() + biases[l].size());
        layers.push_back(std::move(layer));
    }
    j["layers"] = std::move(layers);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path + " for writing");
    out << j.dump() << '\n';
    if (!out) throw IoError("model write failed");
}

MLPModel MLPModel::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& ex) {
        throw IoError("malformed model file " + path + ": " + ex.what());
    }
    if (j.value("kind", "") != "mlp") throw IoError(path + ": not an mlp model file");
    MLPModel m;
    const auto& c = j.at("config");
    m.config.hidden_layers = c.at("hidden_layers").get<std::vector<int>>();
    m.config.outputs = c.at("outputs").get<int>();
    m.config.dropout_rate = c.at("dropout_rate").get<double>();
    m.config.epochs = c.at("epochs").get<int>();
    m.config.batch_size = c.at("batch_size").get<int>();
    m.config.learning_rate = c.at("learning_rate").get<double>();
    m.config.optimizer = c.at("optimizer").get<std::string>();
    m.config.seed = c.at("seed").get<std::uint64_t>();
    m.target = label_kind_from_name(j.at("label_kind").get<std::string>());
    m.schema = std::stoull(j.at("schema_hash").get<std::string>(), nullptr, 16);
    const auto mean = j.at("mean").get<std::vector<double>>();
    const auto sd = j.at("stddev").get<std::vector<double>>();
    m.mean = Eigen::Map<const VectorXd>(mean.data(), static_cast<Eigen::Index>(mean.size()));
    m.stddev = Eigen::Map<const VectorXd>(sd.data(), static_cast<Eigen::Index>(sd.size()));
    for (const auto& layer : j.at("layers")) {
        const auto rows = layer.at("rows").get<Eigen::Index>();
        const auto cols = layer.at("cols").get<Eigen::Index>();
        const auto wv = layer.at("w").get<std::vector<double>>();
        const auto bv = layer.at("b").get<std::vector<double>>();
        if (static_cast<Eigen::Index>(wv.size()) != rows * cols ||
            static_cast<Eigen::Index>(bv.size()) != rows)
            throw IoError(path + ": inconsistent layer shape");
        MatrixXd W(rows, cols);
        std::size_t idx = 0;
        for (Eigen::Index r = 0; r < rows; ++r)
            for (Eigen::Index cc = 0; cc < cols; ++cc) W(r, cc) = wv[idx++];
        m.weights.push_back(std::move(W));
        m.biases.push_back(Eigen::Map<const VectorXd>(bv.data(), rows));
    }
    return m;
}

GradCheckResult gradient_check(const MLPConfig& cfg, const Eigen::MatrixXd& X,
                               const std::vector<int>& labels, double eps) {
    MLPConfig quiet = cfg;
    quiet.dropout_rate = 0.0;
    Net net = init_net(static_cast<int>(X.rows()), quiet);
    std::vector<std::size_t> cols(static_cast<std::size_t>(X.cols()));
    std::iota(cols.begin(), cols.end(), 0);

    std::vector<MatrixXd> gW;
    std::vector<VectorXd> gb;
    forward_backward(net, X, labels, cols, nullptr, gW, gb);

    ForwardCache fc;
    auto loss_at = [&]() {
        forward(net.W, net.b, X, nullptr, fc);
        return batch_loss(fc.A[net.layers()], labels, cols);
    };

    GradCheckResult res;
    auto probe = [&](double& param, double analytic) {
        const double saved = param;
        param = saved + eps;
        const double lp = loss_at();
        param = saved - eps;
        const double lm = loss_at();
        param = saved;
        const double numeric = (lp - lm) / (2.0 * eps);
        const double abs_err = std::fabs(analytic - numeric);
        const double rel = abs_err / std::max(1e-8, std::fabs(analytic) + std::fabs(numeric));
        res.max_abs_error = std::max(res.max_abs_error, abs_err);
        res.max_rel_error = std::max(res.max_rel_error, rel);
    };

    for (std::size_t l = 0; l < net.layers(); ++l) {
        for (Eigen::Index r = 0; r < net.W[l].rows(); ++r)
            for (Eigen::Index c = 0; c < net.W[l].cols(); ++c)
                probe(net.W[l](r, c), gW[l](r, c));
        for (Eigen::Index r = 0; r < net.b[l].size(); ++r) probe(net.b[l][r], gb[l][r]);
    }
    return res;
}

} // namespace p2d
