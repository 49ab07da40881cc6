#pragma once

#include <optional>
#include <string>

#include "iflow/data.hpp"
#include "iflow/eval.hpp"
#include "iflow/serde.hpp"

namespace iflow {

struct DatasetConfig {
    DatasetName name = DatasetName::GmmRing;
    int64_t count = 10000;
    uint64_t seed = 0;
    DatasetParams params;

    int64_t dim() const { return name == DatasetName::Gaussian ? params.dim : 2; }
};

struct EvalConfig {
    int64_t count = 4096;  // samples for distribution metrics
    int64_t steps = 1;     // refinement depth k
    bool use_ema = true;
    uint64_t seed = 0;
    int64_t num_pairs = 1000;  // bilipschitz pairs
    double delta_in = 0.01;
    int64_t trace_count = 256;  // straightness trajectories
    int64_t num_times = 16;
    double holdout_fraction = 0.2;
    std::vector<std::string> metrics;  // cmd_eval default metric list
};

struct RunConfig {
    ProcessSpec process;
    DatasetConfig dataset;
    NetConfig net;  // input_dim is derived from the dataset
    TrainConfig train;
    EvalConfig eval;
    std::string output_dir = "run";
};

// Strict parse: unknown keys anywhere are ConfigErrors naming the JSON path,
// as are type mismatches and cross-field violations (schedule.D present iff
// the process is pfgmpp; dataset params limited to the generator's knobs).
RunConfig parse_run_config(const json& j);

// File wrapper; JSON syntax errors are reported as file:line:col.
RunConfig load_run_config(const std::string& path);

// Full resolved view (the input to config_hash) and the resolved.json payload
// with the flag-override record attached.
json run_config_json(const RunConfig& cfg);
json resolved_json(const RunConfig& cfg, const json& overrides);

// FNV-1a 64-bit over the canonical dump, as a fixed-width hex string.
std::string config_hash(const json& resolved_config);

Dataset build_dataset(const DatasetConfig& dc);

}  // namespace iflow
