#ifndef PASS2D_MLP_HPP
#define PASS2D_MLP_HPP

#include <Eigen/Core>

#include "pass2d/predictor.hpp"

namespace p2d {

struct MLPConfig {
    std::vector<int> hidden_layers{1024, 512, 256, 64, 32};
    int outputs = kNumClasses;
    double dropout_rate = 0.1; // applied after the first hidden layer
    int epochs = 100;
    int batch_size = 256;
    double learning_rate = 1e-3;
    std::string optimizer = "adam"; // "adam" | "sgd"
    std::uint64_t seed = 1;

    void validate() const; // throws InvalidInput
};

// Fully connected net: rectifier on hidden layers, softmax output,
// cross-entropy loss. Inputs are z-scored with statistics frozen at
// training time. Training is sequential and bitwise reproducible.
class MLPModel : public Predictor {
public:
    MLPConfig config;
    LabelKind target = LabelKind::Index;
    std::uint64_t schema = 0;
    Eigen::VectorXd mean;
    Eigen::VectorXd stddev; // constant columns clamped to 1
    std::vector<Eigen::MatrixXd> weights; // layer l maps width[l] -> width[l+1]
    std::vector<Eigen::VectorXd> biases;

    int input_width() const { return static_cast<int>(mean.size()); }

    Eigen::VectorXd predict_proba(std::span<const double> row) const;
    int predict_class(std::span<const double> row) const override;
    std::vector<int> predict_classes(const Table& t) const override;
    std::uint64_t schema_hash() const override { return schema; }
    LabelKind label_kind() const override { return target; }
    std::string kind() const override { return "mlp"; }

    void save(const std::string& path) const;
    static MLPModel load(const std::string& path);
};

MLPModel mlp_train(const Table& table, const MLPConfig& cfg);

struct GradCheckResult {
    double max_rel_error = 0;
    double max_abs_error = 0;
};

// Backprop vs. central finite differences over every parameter of a freshly
// initialized net (dropout off, 64-bit). X is (features x batch); labels are
// 0-based classes.
GradCheckResult gradient_check(const MLPConfig& cfg, const Eigen::MatrixXd& X,
                               const std::vector<int>& labels, double eps);

} // namespace p2d

#endif
