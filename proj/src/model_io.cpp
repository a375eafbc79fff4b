#include <fstream>

#include <json.hpp>

#include "pass2d/common.hpp"
#include "pass2d/mlp.hpp"
#include "pass2d/predictor.hpp"
#include "pass2d/rf.hpp"

namespace p2d {

std::vector<int> Predictor::predict_classes(const Table& t) const {
    std::vector<int> out(t.rows());
    for (std::size_t i = 0; i < t.rows(); ++i) out[i] = predict_class(t.row(i));
    return out;
}

std::unique_ptr<Predictor> load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& ex) {
        throw IoError("malformed model file " + path + ": " + ex.what());
    }
    const std::string kind = j.value("kind", "");
    if (kind == "mlp") return std::make_unique<MLPModel>(MLPModel::load(path));
    if (kind == "rf") return std::make_unique<RFModel>(RFModel::load(path));
    throw IoError(path + ": unknown model kind '" + kind + "'");
}

} // namespace p2d
