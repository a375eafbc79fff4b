#ifndef PASS2D_PREDICTOR_HPP
#define PASS2D_PREDICTOR_HPP

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "pass2d/dataset.hpp"

namespace p2d {

constexpr int kNumClasses = 11; // receiver classes, one per unum

// Common surface over the trained model kinds. Implementations are
// immutable after training and safe for concurrent prediction.
class Predictor {
public:
    virtual ~Predictor() = default;
    virtual int predict_class(std::span<const double> row) const = 0; // 0-based class
    virtual std::vector<int> predict_classes(const Table& t) const;
    virtual std::uint64_t schema_hash() const = 0;
    virtual LabelKind label_kind() const = 0;
    virtual std::string kind() const = 0;
};

// Reads a model file written by MLPModel::save or RFModel::save.
std::unique_ptr<Predictor> load_model(const std::string& path);

} // namespace p2d

#endif
