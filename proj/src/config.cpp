#include "iflow/config.hpp"

#include <cstdio>
#include <fstream>
#include <set>

namespace iflow {

namespace {

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& path) {
    if (!j.is_object()) throw ConfigError("config: " + path + " must be a JSON object");
    for (const auto& [key, value] : j.items()) {
        (void)value;
        if (!allowed.count(key))
            throw ConfigError("config: unknown key '" + key + "' at " + path);
    }
}

template <typename T>
T get_or(const json& j, const std::string& key, const std::string& path, T fallback) {
    if (!j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError("config: bad value type for '" + key + "' at " + path);
    }
}

template <typename T>
T get_req(const json& j, const std::string& key, const std::string& path) {
    if (!j.contains(key))
        throw ConfigError("config: missing required key '" + key + "' at " + path);
    try {
        return j.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError("config: bad value type for '" + key + "' at " + path);
    }
}

}  // namespace

RunConfig parse_run_config(const json& j) {
    check_keys(j, {"process", "dataset", "schedule", "net", "train", "eval", "output_dir"},
               "$");
    RunConfig cfg;
    cfg.process.kind = process_from_name(get_req<std::string>(j, "process", "$"));
    cfg.output_dir = get_or<std::string>(j, "output_dir", "$", "run");

    // dataset
    const json& d = j.at("dataset");
    check_keys(d, {"name", "count", "seed", "params"}, "$.dataset");
    cfg.dataset.name = dataset_from_name(get_req<std::string>(d, "name", "$.dataset"));
    cfg.dataset.count = get_req<int64_t>(d, "count", "$.dataset");
    cfg.dataset.seed = get_or<uint64_t>(d, "seed", "$.dataset", 0);
    if (d.contains("params")) {
        const json& p = d.at("params");
        std::set<std::string> allowed;
        switch (cfg.dataset.name) {
            case DatasetName::Gaussian: allowed = {"dim", "scale", "standardize"}; break;
            case DatasetName::GmmRing: allowed = {"k", "radius", "scale", "standardize"}; break;
            case DatasetName::TwoMoons:
            case DatasetName::Spiral: allowed = {"noise", "standardize"}; break;
            case DatasetName::Checkerboard: allowed = {"standardize"}; break;
        }
        check_keys(p, allowed, "$.dataset.params");
        cfg.dataset.params.dim = get_or<int64_t>(p, "dim", "$.dataset.params", 2);
        cfg.dataset.params.scale = get_or<double>(p, "scale", "$.dataset.params", 1.0);
        cfg.dataset.params.k = get_or<int64_t>(p, "k", "$.dataset.params", 8);
        cfg.dataset.params.radius = get_or<double>(p, "radius", "$.dataset.params", 4.0);
        cfg.dataset.params.noise = get_or<double>(p, "noise", "$.dataset.params", 0.05);
        cfg.dataset.params.standardize =
            get_or<bool>(p, "standardize", "$.dataset.params", false);
    }

    // schedule
    bool is_pfgmpp = cfg.process.kind == ProcessKind::PFGMPP;
    if (j.contains("schedule")) {
        const json& s = j.at("schedule");
        check_keys(s, {"T", "sigma_min", "sigma_max", "D"}, "$.schedule");
        cfg.process.T = get_or<int64_t>(s, "T", "$.schedule", 1000);
        cfg.process.sigma_min = get_or<double>(s, "sigma_min", "$.schedule", 0.01);
        cfg.process.sigma_max = get_or<double>(s, "sigma_max", "$.schedule", 50.0);
        if (s.contains("D")) {
            if (!is_pfgmpp)
                throw ConfigError(
                    "config: schedule.D is only valid for the pfgmpp process");
            cfg.process.D = s.at("D").get<int64_t>();
        } else if (is_pfgmpp) {
            throw ConfigError("config: missing required key 'D' at $.schedule "
                              "(pfgmpp needs the augmentation dimension)");
        }
    } else if (is_pfgmpp) {
        throw ConfigError("config: missing required key 'D' at $.schedule "
                          "(pfgmpp needs the augmentation dimension)");
    }
    cfg.process.N = is_pfgmpp ? cfg.dataset.dim() : 0;
    cfg.process.validate();

    // net
    cfg.net.input_dim = cfg.dataset.dim();
    if (j.contains("net")) {
        const json& n = j.at("net");
        check_keys(n, {"hidden_sizes", "time_embed_dim", "activation"}, "$.net");
        cfg.net.hidden_sizes =
            get_or<std::vector<int64_t>>(n, "hidden_sizes", "$.net", {128, 128, 128});
        cfg.net.time_embed_dim = get_or<int64_t>(n, "time_embed_dim", "$.net", 16);
        cfg.net.activation =
            activation_from_name(get_or<std::string>(n, "activation", "$.net", "silu"));
    }
    cfg.net.validate();

    // train
    if (j.contains("train")) {
        const json& t = j.at("train");
        check_keys(t,
                   {"lr", "batch_size", "iterations", "ema_decay", "c", "seed",
                    "buffer_update", "optimizer", "adam_beta1", "adam_beta2", "adam_eps",
                    "anchor_mode", "buffer_init", "buffer_writeback", "anchor_reset",
                    "checkpoint_interval", "log_interval"},
                   "$.train");
        TrainConfig& tc = cfg.train;
        tc.lr = get_or<double>(t, "lr", "$.train", tc.lr);
        tc.batch_size = get_or<int64_t>(t, "batch_size", "$.train", tc.batch_size);
        tc.iterations = get_or<int64_t>(t, "iterations", "$.train", tc.iterations);
        tc.ema_decay = get_or<double>(t, "ema_decay", "$.train", tc.ema_decay);
        tc.c = get_or<double>(t, "c", "$.train", 0.0);
        tc.seed = get_or<uint64_t>(t, "seed", "$.train", 0);
        tc.buffer_update = buffer_update_from_name(
            get_or<std::string>(t, "buffer_update", "$.train", "per_batch"));
        tc.optimizer =
            optimizer_from_name(get_or<std::string>(t, "optimizer", "$.train", "adam"));
        tc.adam_beta1 = get_or<double>(t, "adam_beta1", "$.train", tc.adam_beta1);
        tc.adam_beta2 = get_or<double>(t, "adam_beta2", "$.train", tc.adam_beta2);
        tc.adam_eps = get_or<double>(t, "adam_eps", "$.train", tc.adam_eps);
        tc.anchor_mode =
            anchor_mode_from_name(get_or<std::string>(t, "anchor_mode", "$.train", "buffer"));
        tc.buffer_init =
            buffer_init_from_name(get_or<std::string>(t, "buffer_init", "$.train", "normal"));
        tc.buffer_writeback = get_or<bool>(t, "buffer_writeback", "$.train", true);
        tc.anchor_reset = get_or<double>(t, "anchor_reset", "$.train", 0.0);
        tc.checkpoint_interval =
            get_or<int64_t>(t, "checkpoint_interval", "$.train", 0);
        tc.log_interval = get_or<int64_t>(t, "log_interval", "$.train", 100);
    }
    if (cfg.train.c == 0.0) cfg.train.c = default_c(cfg.process.kind);
    cfg.train.validate();

    // eval
    if (j.contains("eval")) {
        const json& e = j.at("eval");
        check_keys(e,
                   {"count", "steps", "use_ema", "seed", "num_pairs", "delta_in",
                    "trace_count", "num_times", "holdout_fraction", "metrics"},
                   "$.eval");
        EvalConfig& ec = cfg.eval;
        ec.count = get_or<int64_t>(e, "count", "$.eval", ec.count);
        ec.steps = get_or<int64_t>(e, "steps", "$.eval", ec.steps);
        ec.use_ema = get_or<bool>(e, "use_ema", "$.eval", ec.use_ema);
        ec.seed = get_or<uint64_t>(e, "seed", "$.eval", ec.seed);
        ec.num_pairs = get_or<int64_t>(e, "num_pairs", "$.eval", ec.num_pairs);
        ec.delta_in = get_or<double>(e, "delta_in", "$.eval", ec.delta_in);
        ec.trace_count = get_or<int64_t>(e, "trace_count", "$.eval", ec.trace_count);
        ec.num_times = get_or<int64_t>(e, "num_times", "$.eval", ec.num_times);
        ec.holdout_fraction =
            get_or<double>(e, "holdout_fraction", "$.eval", ec.holdout_fraction);
        ec.metrics = get_or<std::vector<std::string>>(e, "metrics", "$.eval", {});
    }
    if (cfg.dataset.count < 1) throw ConfigError("config: dataset.count must be >= 1");
    return cfg;
}

RunConfig load_run_config(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw IoError("config: cannot open '" + path + "'");
    std::string text((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        size_t line = 1, col = 1;
        for (size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
            if (text[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        throw ConfigError(path + ":" + std::to_string(line) + ":" + std::to_string(col) +
                          ": " + e.what());
    }
    return parse_run_config(j);
}

json run_config_json(const RunConfig& cfg) {
    json j;
    j["process"] = process_name(cfg.process.kind);
    j["output_dir"] = cfg.output_dir;
    j["dataset"] = json{{"name", dataset_name_str(cfg.dataset.name)},
                        {"count", cfg.dataset.count},
                        {"seed", cfg.dataset.seed},
                        {"params",
                         json{{"dim", cfg.dataset.params.dim},
                              {"scale", cfg.dataset.params.scale},
                              {"k", cfg.dataset.params.k},
                              {"radius", cfg.dataset.params.radius},
                              {"noise", cfg.dataset.params.noise},
                              {"standardize", cfg.dataset.params.standardize}}}};
    j["schedule"] = json{{"T", cfg.process.T},
                         {"sigma_min", cfg.process.sigma_min},
                         {"sigma_max", cfg.process.sigma_max},
                         {"D", cfg.process.D}};
    j["net"] = to_json(cfg.net);
    j["train"] = to_json(cfg.train);
    j["eval"] = json{{"count", cfg.eval.count},
                     {"steps", cfg.eval.steps},
                     {"use_ema", cfg.eval.use_ema},
                     {"seed", cfg.eval.seed},
                     {"num_pairs", cfg.eval.num_pairs},
                     {"delta_in", cfg.eval.delta_in},
                     {"trace_count", cfg.eval.trace_count},
                     {"num_times", cfg.eval.num_times},
                     {"holdout_fraction", cfg.eval.holdout_fraction},
                     {"metrics", cfg.eval.metrics}};
    return j;
}

json resolved_json(const RunConfig& cfg, const json& overrides) {
    json resolved = run_config_json(cfg);
    json out;
    out["config"] = resolved;
    out["overrides"] = overrides;
    out["config_hash"] = config_hash(resolved);
    return out;
}

std::string config_hash(const json& resolved_config) {
    std::string s = resolved_config.dump();
    uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return std::string(buf);
}

Dataset build_dataset(const DatasetConfig& dc) {
    return make_dataset(dc.name, dc.count, dc.params, dc.seed);
}

}  // namespace iflow
