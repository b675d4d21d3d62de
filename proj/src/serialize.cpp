#include "sscl/serialize.hpp"

#include <json.hpp>

#include <fstream>
#include <sstream>

namespace sscl {

namespace {

using nlohmann::json;

json to_json(const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

// Row-major nested arrays.
json to_json(const Matrix& m) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) rows.push_back(to_json(Vector(m.row(r).transpose())));
    return json{{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::move(rows)}};
}

Vector vector_from(const json& j) {
    const auto values = j.get<std::vector<double>>();
    return Eigen::Map<const Vector>(values.data(), static_cast<Eigen::Index>(values.size()));
}

Matrix matrix_from(const json& j) {
    const auto rows = j.at("rows").get<Eigen::Index>();
    const auto cols = j.at("cols").get<Eigen::Index>();
    const auto& data = j.at("data");
    if (static_cast<Eigen::Index>(data.size()) != rows) throw DataError("model file: matrix row count mismatch");
    Matrix m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
        const Vector row = vector_from(data[static_cast<std::size_t>(r)]);
        if (row.size() != cols) throw DataError("model file: matrix column count mismatch");
        m.row(r) = row.transpose();
    }
    return m;
}

json hyper_to_json(const Hyperparams& h) {
    return json{{"alpha", h.alpha},
                {"beta", h.beta},
                {"gamma", h.gamma},
                {"k", h.k},
                {"max_outer_iter", h.max_outer_iter},
                {"outer_tol", h.outer_tol},
                {"damp_oscillation", h.damp_oscillation},
                {"seed", h.seed},
                {"solver_tol", h.solver_tol}};
}

Hyperparams hyper_from_json(const json& j) {
    Hyperparams h;
    h.alpha = j.at("alpha").get<double>();
    h.beta = j.at("beta").get<double>();
    h.gamma = j.at("gamma").get<double>();
    h.k = j.at("k").get<int>();
    h.max_outer_iter = j.at("max_outer_iter").get<int>();
    h.outer_tol = j.at("outer_tol").get<double>();
    h.damp_oscillation = j.at("damp_oscillation").get<bool>();
    h.seed = j.at("seed").get<std::uint64_t>();
    h.solver_tol = j.at("solver_tol").get<double>();
    return h;
}

}  // namespace

std::string model_to_json(const SsclEnsemble& ensemble) {
    json models = json::array();
    for (const auto& m : ensemble.models) {
        models.push_back(json{{"w", to_json(m.w)},
                              {"coeffs", to_json(m.coeffs)},
                              {"delta", to_json(m.delta)},
                              {"hyper", hyper_to_json(m.hyper)},
                              {"train_features", to_json(m.train_features)},
                              {"train_labels", to_json(m.train_labels)},
                              {"standardizer", {{"mean", to_json(m.standardizer.mean)},
                                                {"scale", to_json(m.standardizer.scale)}}}});
    }
    json root{{"format", "sscl-model"},
              {"version", kModelFormatVersion},
              {"class_count", ensemble.class_count},
              {"class_names", ensemble.class_names},
              {"positive_classes", ensemble.positive_classes},
              {"models", std::move(models)}};
    return root.dump();
}

SsclEnsemble model_from_json(const std::string& text) {
    try {
        const json root = json::parse(text);
        if (root.at("format").get<std::string>() != "sscl-model") throw DataError("not an sscl model file");
        const int version = root.at("version").get<int>();
        if (version != kModelFormatVersion)
            throw DataError("unsupported model format version " + std::to_string(version));
        SsclEnsemble ensemble;
        ensemble.class_count = root.at("class_count").get<int>();
        ensemble.class_names = root.at("class_names").get<std::vector<std::string>>();
        ensemble.positive_classes = root.at("positive_classes").get<std::vector<int>>();
        for (const auto& j : root.at("models")) {
            SsclModel m;
            m.w = vector_from(j.at("w"));
            m.coeffs = matrix_from(j.at("coeffs"));
            m.delta = vector_from(j.at("delta"));
            m.hyper = hyper_from_json(j.at("hyper"));
            m.train_features = matrix_from(j.at("train_features"));
            m.train_labels = vector_from(j.at("train_labels"));
            m.standardizer.mean = vector_from(j.at("standardizer").at("mean"));
            m.standardizer.scale = vector_from(j.at("standardizer").at("scale"));
            ensemble.models.push_back(std::move(m));
        }
        if (ensemble.models.size() != ensemble.positive_classes.size())
            throw DataError("model file: model count does not match class list");
        return ensemble;
    } catch (const json::exception& e) {
        throw DataError(std::string("malformed model file: ") + e.what());
    }
}

void save_model(const SsclEnsemble& ensemble, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write '" + path + "'");
    out << model_to_json(ensemble) << '\n';
}

SsclEnsemble load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return model_from_json(buf.str());
}

}  // namespace sscl
