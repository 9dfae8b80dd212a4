// JSON (de)serialization of trained networks. Doubles are emitted in
// shortest round-trip form, so save -> load reproduces parameters
// bit-exactly.
#pragma once

#include <string>

#include <json.hpp>

#include "hrtfgroup/error.hpp"
#include "hrtfgroup/nn/models.hpp"

namespace hrtfgroup::nn {

inline nlohmann::json matrix_to_json(const Matrix& m) {
    return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", m.storage()}};
}

inline Matrix matrix_from_json(const nlohmann::json& j) {
    Matrix m(j.at("rows").get<std::size_t>(), j.at("cols").get<std::size_t>());
    const auto data = j.at("data").get<std::vector<double>>();
    if (data.size() != m.size()) throw DataError("checkpoint: matrix size mismatch");
    m.storage() = data;
    return m;
}

namespace detail {

inline void block_to_json(nlohmann::json& j, DenseBnRelu& block) {
    j["weight"] = matrix_to_json(block.dense.weight().value);
    j["bias"] = matrix_to_json(block.dense.bias().value);
    j["gamma"] = matrix_to_json(block.bn.gamma().value);
    j["beta"] = matrix_to_json(block.bn.beta().value);
    j["running_mean"] = matrix_to_json(block.bn.running_mean());
    j["running_var"] = matrix_to_json(block.bn.running_var());
}

inline void block_from_json(const nlohmann::json& j, DenseBnRelu& block) {
    auto expect = [](const Matrix& got, const Matrix& want, const char* what) {
        if (got.rows() != want.rows() || got.cols() != want.cols()) {
            throw DataError(std::string("checkpoint: shape mismatch in ") + what);
        }
    };
    Matrix w = matrix_from_json(j.at("weight"));
    expect(w, block.dense.weight().value, "weight");
    block.dense.weight().value = std::move(w);
    Matrix b = matrix_from_json(j.at("bias"));
    expect(b, block.dense.bias().value, "bias");
    block.dense.bias().value = std::move(b);
    block.bn.gamma().value = matrix_from_json(j.at("gamma"));
    block.bn.beta().value = matrix_from_json(j.at("beta"));
    block.bn.running_mean() = matrix_from_json(j.at("running_mean"));
    block.bn.running_var() = matrix_from_json(j.at("running_var"));
}

inline void dense_to_json(nlohmann::json& j, DenseLayer& layer) {
    j["weight"] = matrix_to_json(layer.weight().value);
    j["bias"] = matrix_to_json(layer.bias().value);
}

inline void dense_from_json(const nlohmann::json& j, DenseLayer& layer) {
    Matrix w = matrix_from_json(j.at("weight"));
    if (w.rows() != layer.weight().value.rows() || w.cols() != layer.weight().value.cols()) {
        throw DataError("checkpoint: dense shape mismatch");
    }
    layer.weight().value = std::move(w);
    layer.bias().value = matrix_from_json(j.at("bias"));
}

}  // namespace detail

inline nlohmann::json to_json(Vae& vae) {
    nlohmann::json j;
    j["format"] = "vae-v1";
    auto enc = nlohmann::json::array();
    for (auto& b : vae.encoder().blocks()) {
        nlohmann::json bj;
        detail::block_to_json(bj, b);
        enc.push_back(bj);
    }
    j["encoder_blocks"] = enc;
    detail::dense_to_json(j["mean_head"], vae.encoder().mean_head());
    detail::dense_to_json(j["log_var_head"], vae.encoder().log_var_head());
    auto dec = nlohmann::json::array();
    for (auto& b : vae.decoder().blocks()) {
        nlohmann::json bj;
        detail::block_to_json(bj, b);
        dec.push_back(bj);
    }
    j["decoder_blocks"] = dec;
    detail::dense_to_json(j["decoder_out"], vae.decoder().out());
    return j;
}

inline void vae_from_json(const nlohmann::json& j, Vae& vae) {
    if (j.value("format", "") != "vae-v1") throw DataError("checkpoint: not a vae-v1 blob");
    const auto& enc = j.at("encoder_blocks");
    if (enc.size() != vae.encoder().blocks().size()) throw DataError("checkpoint: block count");
    for (std::size_t i = 0; i < enc.size(); ++i) {
        detail::block_from_json(enc[i], vae.encoder().blocks()[i]);
    }
    detail::dense_from_json(j.at("mean_head"), vae.encoder().mean_head());
    detail::dense_from_json(j.at("log_var_head"), vae.encoder().log_var_head());
    const auto& dec = j.at("decoder_blocks");
    if (dec.size() != vae.decoder().blocks().size()) throw DataError("checkpoint: block count");
    for (std::size_t i = 0; i < dec.size(); ++i) {
        detail::block_from_json(dec[i], vae.decoder().blocks()[i]);
    }
    detail::dense_from_json(j.at("decoder_out"), vae.decoder().out());
}

inline nlohmann::json to_json(PredictorDnn& dnn) {
    nlohmann::json j;
    j["format"] = "dnn-v1";
    auto dump_blocks = [](std::vector<DenseBnRelu>& blocks) {
        auto arr = nlohmann::json::array();
        for (auto& b : blocks) {
            nlohmann::json bj;
            detail::block_to_json(bj, b);
            arr.push_back(bj);
        }
        return arr;
    };
    j["trunk"] = dump_blocks(dnn.trunk());
    j["mean_branch"] = dump_blocks(dnn.mean_branch());
    j["log_var_branch"] = dump_blocks(dnn.log_var_branch());
    detail::dense_to_json(j["mean_out"], dnn.mean_out());
    detail::dense_to_json(j["log_var_out"], dnn.log_var_out());
    return j;
}

inline void dnn_from_json(const nlohmann::json& j, PredictorDnn& dnn) {
    if (j.value("format", "") != "dnn-v1") throw DataError("checkpoint: not a dnn-v1 blob");
    auto load_blocks = [](const nlohmann::json& arr, std::vector<DenseBnRelu>& blocks) {
        if (arr.size() != blocks.size()) throw DataError("checkpoint: block count");
        for (std::size_t i = 0; i < arr.size(); ++i) detail::block_from_json(arr[i], blocks[i]);
    };
    load_blocks(j.at("trunk"), dnn.trunk());
    load_blocks(j.at("mean_branch"), dnn.mean_branch());
    load_blocks(j.at("log_var_branch"), dnn.log_var_branch());
    detail::dense_from_json(j.at("mean_out"), dnn.mean_out());
    detail::dense_from_json(j.at("log_var_out"), dnn.log_var_out());
}

// Flat copy of every trainable parameter, for frozen-model assertions.
inline std::vector<double> parameter_snapshot(std::vector<Param*> params) {
    std::vector<double> out;
    for (const auto* p : params) {
        out.insert(out.end(), p->value.storage().begin(), p->value.storage().end());
    }
    return out;
}

}  // namespace hrtfgroup::nn
