#pragma once

#include <nlohmann/json.hpp>

#include "iflow/net.hpp"
#include "iflow/process.hpp"
#include "iflow/trainer.hpp"

// JSON views of the config structs, shared by checkpoint metadata and the CLI
// config layer. Keys are stable; nlohmann orders them, so dumps are
// deterministic byte-for-byte.
namespace iflow {

using json = nlohmann::json;

inline json to_json(const ProcessSpec& s) {
    return json{{"kind", process_name(s.kind)}, {"T", s.T},      {"sigma_min", s.sigma_min},
                {"sigma_max", s.sigma_max},     {"D", s.D},      {"N", s.N}};
}

inline ProcessSpec process_from_json(const json& j) {
    ProcessSpec s;
    s.kind = process_from_name(j.at("kind").get<std::string>());
    s.T = j.at("T").get<int64_t>();
    s.sigma_min = j.at("sigma_min").get<double>();
    s.sigma_max = j.at("sigma_max").get<double>();
    s.D = j.at("D").get<int64_t>();
    s.N = j.at("N").get<int64_t>();
    return s;
}

inline json to_json(const NetConfig& c) {
    return json{{"input_dim", c.input_dim},
                {"hidden_sizes", c.hidden_sizes},
                {"time_embed_dim", c.time_embed_dim},
                {"activation", activation_name(c.activation)}};
}

inline NetConfig net_from_json(const json& j) {
    NetConfig c;
    c.input_dim = j.at("input_dim").get<int64_t>();
    c.hidden_sizes = j.at("hidden_sizes").get<std::vector<int64_t>>();
    c.time_embed_dim = j.at("time_embed_dim").get<int64_t>();
    c.activation = activation_from_name(j.at("activation").get<std::string>());
    return c;
}

inline const char* buffer_update_name(BufferUpdate b) {
    return b == BufferUpdate::PerBatch ? "per_batch" : "per_epoch";
}
inline BufferUpdate buffer_update_from_name(const std::string& s) {
    if (s == "per_batch") return BufferUpdate::PerBatch;
    if (s == "per_epoch") return BufferUpdate::PerEpoch;
    throw ArgumentError("unknown buffer_update '" + s + "' (expected per_batch or per_epoch)");
}
inline const char* optimizer_name(OptimizerKind o) {
    return o == OptimizerKind::Adam ? "adam" : "sgd";
}
inline OptimizerKind optimizer_from_name(const std::string& s) {
    if (s == "adam") return OptimizerKind::Adam;
    if (s == "sgd") return OptimizerKind::Sgd;
    throw ArgumentError("unknown optimizer '" + s + "' (expected adam or sgd)");
}
inline const char* anchor_mode_name(AnchorMode a) {
    return a == AnchorMode::Buffer ? "buffer" : "zero";
}
inline AnchorMode anchor_mode_from_name(const std::string& s) {
    if (s == "buffer") return AnchorMode::Buffer;
    if (s == "zero") return AnchorMode::Zero;
    throw ArgumentError("unknown anchor_mode '" + s + "' (expected buffer or zero)");
}
inline const char* buffer_init_name(BufferInit b) {
    return b == BufferInit::Normal ? "normal" : "zero";
}
inline BufferInit buffer_init_from_name(const std::string& s) {
    if (s == "normal") return BufferInit::Normal;
    if (s == "zero") return BufferInit::Zero;
    throw ArgumentError("unknown buffer_init '" + s + "' (expected normal or zero)");
}

inline json to_json(const TrainConfig& c) {
    return json{{"lr", c.lr},
                {"batch_size", c.batch_size},
                {"iterations", c.iterations},
                {"ema_decay", c.ema_decay},
                {"c", c.c},
                {"seed", c.seed},
                {"buffer_update", buffer_update_name(c.buffer_update)},
                {"optimizer", optimizer_name(c.optimizer)},
                {"adam_beta1", c.adam_beta1},
                {"adam_beta2", c.adam_beta2},
                {"adam_eps", c.adam_eps},
                {"anchor_mode", anchor_mode_name(c.anchor_mode)},
                {"buffer_init", buffer_init_name(c.buffer_init)},
                {"buffer_writeback", c.buffer_writeback},
                {"anchor_reset", c.anchor_reset},
                {"checkpoint_interval", c.checkpoint_interval},
                {"log_interval", c.log_interval}};
}

inline TrainConfig train_from_json(const json& j) {
    TrainConfig c;
    c.lr = j.at("lr").get<double>();
    c.batch_size = j.at("batch_size").get<int64_t>();
    c.iterations = j.at("iterations").get<int64_t>();
    c.ema_decay = j.at("ema_decay").get<double>();
    c.c = j.at("c").get<double>();
    c.seed = j.at("seed").get<uint64_t>();
    c.buffer_update = buffer_update_from_name(j.at("buffer_update").get<std::string>());
    c.optimizer = optimizer_from_name(j.at("optimizer").get<std::string>());
    c.adam_beta1 = j.at("adam_beta1").get<double>();
    c.adam_beta2 = j.at("adam_beta2").get<double>();
    c.adam_eps = j.at("adam_eps").get<double>();
    c.anchor_mode = anchor_mode_from_name(j.at("anchor_mode").get<std::string>());
    c.buffer_init = buffer_init_from_name(j.at("buffer_init").get<std::string>());
    c.buffer_writeback = j.at("buffer_writeback").get<bool>();
    c.anchor_reset = j.value("anchor_reset", 0.0);
    c.checkpoint_interval = j.at("checkpoint_interval").get<int64_t>();
    c.log_interval = j.at("log_interval").get<int64_t>();
    return c;
}

}  // namespace iflow
