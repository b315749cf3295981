#pragma once

#include <fstream>
#include <optional>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "mimgan/data.hpp"
#include "mimgan/mlp.hpp"

namespace mimgan {

// Versioned model file: JSON with a magic header, layer specs, parameters,
// the optional output affine, and (when the model was trained on scaled
// features) the normalization stats needed to score new data.
inline constexpr const char* kModelMagic = "MIMGAN1";

inline void save_model(const MlpModel& model, const std::string& path,
                       const std::optional<NormStats>& norm = std::nullopt) {
    nlohmann::json j;
    j["magic"] = kModelMagic;
    for (const auto& l : model.layers())
        j["layers"].push_back({{"fan_in", l.fan_in},
                               {"fan_out", l.fan_out},
                               {"activation", activation_name(l.activation)}});
    for (const auto& w : model.weights) j["weights"].push_back(w.data());
    for (const auto& b : model.biases) j["biases"].push_back(b.data());
    if (model.has_output_affine()) {
        j["output_scale"] = model.output_scale;
        j["output_offset"] = model.output_offset;
    }
    if (norm) {
        j["normalization"]["min"] = norm->min;
        j["normalization"]["max"] = norm->max;
    }
    std::ofstream out(path);
    if (!out) throw std::runtime_error("model_io: cannot write '" + path + "'");
    out << j.dump(2) << '\n';
}

struct SavedModel {
    MlpModel model;
    std::optional<NormStats> norm;
};

inline SavedModel load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("model_io: cannot open '" + path + "'");
    nlohmann::json j;
    in >> j;
    if (!j.contains("magic") || j["magic"] != kModelMagic)
        throw std::runtime_error("model_io: '" + path + "' is not a " + kModelMagic + " file");

    std::vector<LayerSpec> layers;
    for (const auto& l : j.at("layers"))
        layers.push_back({l.at("fan_in").get<std::size_t>(), l.at("fan_out").get<std::size_t>(),
                          activation_from_name(l.at("activation").get<std::string>())});

    SavedModel out{MlpModel(layers), std::nullopt};
    const auto& jw = j.at("weights");
    const auto& jb = j.at("biases");
    if (jw.size() != layers.size() || jb.size() != layers.size())
        throw std::runtime_error("model_io: parameter count mismatch in '" + path + "'");
    for (std::size_t i = 0; i < layers.size(); ++i) {
        out.model.weights[i] =
            DenseMatrix(layers[i].fan_in, layers[i].fan_out, jw[i].get<std::vector<double>>());
        out.model.biases[i] = DenseMatrix(1, layers[i].fan_out, jb[i].get<std::vector<double>>());
    }
    if (j.contains("output_scale"))
        out.model.set_output_affine(j["output_scale"].get<std::vector<double>>(),
                                    j["output_offset"].get<std::vector<double>>());
    if (j.contains("normalization")) {
        NormStats st;
        st.min = j["normalization"]["min"].get<std::vector<double>>();
        st.max = j["normalization"]["max"].get<std::vector<double>>();
        out.norm = st;
    }
    return out;
}

}  // namespace mimgan
