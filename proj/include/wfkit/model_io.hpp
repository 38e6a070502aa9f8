#pragma once

// Versioned JSON persistence for neural models. Parameters travel as base64 of
// their little-endian IEEE-754 bytes, so a load→save round trip is bit-exact.

#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "wfkit/neural.hpp"

namespace wfkit {

using Json = nlohmann::json;

inline constexpr const char* kModelFormat = "wfkit-model";
inline constexpr int kModelVersion = 1;

namespace detail {

inline const char* kB64Alphabet = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

inline std::string base64_encode(const unsigned char* data, std::size_t n) {
    std::string out;
    out.reserve((n + 2) / 3 * 4);
    for (std::size_t i = 0; i < n; i += 3) {
        unsigned v = static_cast<unsigned>(data[i]) << 16;
        if (i + 1 < n) v |= static_cast<unsigned>(data[i + 1]) << 8;
        if (i + 2 < n) v |= static_cast<unsigned>(data[i + 2]);
        out.push_back(kB64Alphabet[(v >> 18) & 63]);
        out.push_back(kB64Alphabet[(v >> 12) & 63]);
        out.push_back(i + 1 < n ? kB64Alphabet[(v >> 6) & 63] : '=');
        out.push_back(i + 2 < n ? kB64Alphabet[v & 63] : '=');
    }
    return out;
}

inline std::vector<unsigned char> base64_decode(const std::string& s) {
    auto val = [](char c) -> int {
        if (c >= 'A' && c <= 'Z') return c - 'A';
        if (c >= 'a' && c <= 'z') return c - 'a' + 26;
        if (c >= '0' && c <= '9') return c - '0' + 52;
        if (c == '+') return 62;
        if (c == '/') return 63;
        return -1;
    };
    if (s.size() % 4 != 0) throw Error("base64: length not a multiple of 4");
    std::vector<unsigned char> out;
    out.reserve(s.size() / 4 * 3);
    for (std::size_t i = 0; i < s.size(); i += 4) {
        int pad = 0;
        unsigned v = 0;
        for (int k = 0; k < 4; ++k) {
            char c = s[i + static_cast<std::size_t>(k)];
            if (c == '=') {
                ++pad;
                v <<= 6;
                continue;
            }
            int d = val(c);
            if (d < 0 || pad > 0) throw Error("base64: bad character");
            v = (v << 6) | static_cast<unsigned>(d);
        }
        out.push_back(static_cast<unsigned char>((v >> 16) & 0xff));
        if (pad < 2) out.push_back(static_cast<unsigned char>((v >> 8) & 0xff));
        if (pad < 1) out.push_back(static_cast<unsigned char>(v & 0xff));
    }
    return out;
}

inline std::string doubles_to_b64(const std::vector<double>& v) {
    std::vector<unsigned char> bytes(v.size() * sizeof(double));
    if (!v.empty()) std::memcpy(bytes.data(), v.data(), bytes.size());
    return base64_encode(bytes.data(), bytes.size());
}

inline std::vector<double> b64_to_doubles(const std::string& s, std::size_t expect) {
    std::vector<unsigned char> bytes = base64_decode(s);
    if (bytes.size() != expect * sizeof(double)) throw Error("model: parameter blob has wrong size");
    std::vector<double> v(expect);
    if (expect) std::memcpy(v.data(), bytes.data(), bytes.size());
    return v;
}

}  // namespace detail

inline Activation activation_from_name(const std::string& s) {
    for (Activation a : {Activation::Tanh, Activation::Relu, Activation::Sigmoid,
                         Activation::LeakyRelu, Activation::Elu, Activation::Linear})
        if (s == activation_name(a)) return a;
    throw Error("unknown activation: " + s);
}

inline LayerKind layer_kind_from_name(const std::string& s) {
    for (LayerKind k : {LayerKind::Dense, LayerKind::Conv1D, LayerKind::MaxPool1D,
                        LayerKind::Dropout, LayerKind::SoftmaxOutput})
        if (s == layer_kind_name(k)) return k;
    throw Error("unknown layer kind: " + s);
}

inline const char* loss_name(LossKind l) {
    return l == LossKind::CategoricalCrossEntropy ? "categorical_cross_entropy" : "mean_squared_error";
}

inline LossKind loss_from_name(const std::string& s) {
    if (s == "categorical_cross_entropy") return LossKind::CategoricalCrossEntropy;
    if (s == "mean_squared_error") return LossKind::MeanSquaredError;
    throw Error("unknown loss: " + s);
}

inline const char* optimizer_name(Optimizer o) {
    switch (o) {
        case Optimizer::SGD: return "sgd";
        case Optimizer::Adam: return "adam";
        case Optimizer::RMSProp: return "rmsprop";
    }
    return "?";
}

inline Optimizer optimizer_from_name(const std::string& s) {
    if (s == "sgd") return Optimizer::SGD;
    if (s == "adam") return Optimizer::Adam;
    if (s == "rmsprop") return Optimizer::RMSProp;
    throw Error("unknown optimizer: " + s);
}

inline Json model_to_json(const NeuralModel& m) {
    Json j;
    j["format"] = kModelFormat;
    j["version"] = kModelVersion;
    j["input_dim"] = m.input_dim;
    j["output_dim"] = m.output_dim;
    j["loss"] = loss_name(m.loss);
    j["trained"] = m.trained;
    j["bottleneck_layer"] = m.bottleneck_layer;
    Json layers = Json::array();
    for (const Layer& L : m.layers) {
        Json lj;
        lj["kind"] = layer_kind_name(L.spec.kind);
        lj["units"] = L.spec.units;
        lj["filter_width"] = L.spec.filter_width;
        lj["pool_width"] = L.spec.pool_width;
        lj["activation"] = activation_name(L.spec.activation);
        lj["l2"] = L.spec.l2;
        lj["keep_prob"] = L.spec.keep_prob;
        if (!L.w.empty()) lj["w"] = detail::doubles_to_b64(L.w);
        if (!L.b.empty()) lj["b"] = detail::doubles_to_b64(L.b);
        layers.push_back(std::move(lj));
    }
    j["layers"] = std::move(layers);
    return j;
}

inline NeuralModel model_from_json(const Json& j) {
    if (!j.is_object() || j.value("format", "") != kModelFormat)
        throw Error("model: not a " + std::string(kModelFormat) + " document");
    if (j.value("version", 0) != kModelVersion)
        throw Error("model: unsupported version " + std::to_string(j.value("version", 0)));
    NeuralModel m;
    m.input_dim = j.at("input_dim").get<int>();
    m.output_dim = j.at("output_dim").get<int>();
    m.loss = loss_from_name(j.at("loss").get<std::string>());
    m.trained = j.value("trained", false);
    m.bottleneck_layer = j.value("bottleneck_layer", -1);
    for (const Json& lj : j.at("layers")) {
        Layer L;
        L.spec.kind = layer_kind_from_name(lj.at("kind").get<std::string>());
        L.spec.units = lj.value("units", 0);
        L.spec.filter_width = lj.value("filter_width", 0);
        L.spec.pool_width = lj.value("pool_width", 0);
        L.spec.activation = activation_from_name(lj.value("activation", "linear"));
        L.spec.l2 = lj.value("l2", 0.0);
        L.spec.keep_prob = lj.value("keep_prob", 1.0);
        m.layers.push_back(std::move(L));
    }
    detail::resolve_shapes(m);
    std::size_t li = 0;
    for (const Json& lj : j.at("layers")) {
        Layer& L = m.layers[li++];
        std::size_t nw = 0, nb = 0;
        if (L.spec.kind == LayerKind::Dense || L.spec.kind == LayerKind::SoftmaxOutput) {
            nw = static_cast<std::size_t>(L.spec.units) * L.flat_in();
            nb = static_cast<std::size_t>(L.spec.units);
        } else if (L.spec.kind == LayerKind::Conv1D) {
            nw = static_cast<std::size_t>(L.spec.units) * L.spec.filter_width;
            nb = static_cast<std::size_t>(L.spec.units);
        }
        if (nw) L.w = detail::b64_to_doubles(lj.at("w").get<std::string>(), nw);
        if (nb) L.b = detail::b64_to_doubles(lj.at("b").get<std::string>(), nb);
    }
    return m;
}

inline void save_model(const NeuralModel& m, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write model: " + path);
    out << model_to_json(m).dump(2) << '\n';
}

inline NeuralModel load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open model: " + path);
    Json j;
    try {
        in >> j;
    } catch (const Json::exception& e) {
        throw Error(path + ": bad JSON: " + e.what());
    }
    return model_from_json(j);
}

}  // namespace wfkit
