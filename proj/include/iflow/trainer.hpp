#pragma once

#include <cstdint>
#include <functional>
#include <map>

#include "iflow/data.hpp"
#include "iflow/net.hpp"
#include "iflow/process.hpp"

namespace iflow {

enum class BufferUpdate { PerBatch, PerEpoch };
enum class OptimizerKind { Adam, Sgd };
enum class AnchorMode { Buffer, Zero };
enum class BufferInit { Normal, Zero };

// c = 0 means "per-process default" (resolved at init): 0.00016 for VE and
// PFGM++, 0.0001 for RF.
double default_c(ProcessKind kind);

struct TrainConfig {
    double lr = 2e-4;
    int64_t batch_size = 128;
    int64_t iterations = 10000;
    double ema_decay = 0.9999;
    double c = 0.0;
    uint64_t seed = 0;
    BufferUpdate buffer_update = BufferUpdate::PerBatch;
    OptimizerKind optimizer = OptimizerKind::Adam;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_eps = 1e-8;
    // Ablation/diagnostic knobs. anchor_mode zero feeds a constant zero anchor
    // (the buffer is neither read nor written); buffer_init/buffer_writeback
    // let tests freeze the buffer independently of the anchor path.
    AnchorMode anchor_mode = AnchorMode::Buffer;
    BufferInit buffer_init = BufferInit::Normal;
    bool buffer_writeback = true;
    // Per-visit probability of re-initializing an example's buffer entry from
    // N(0, I) before it is used as the anchor. Keeps the anchor curriculum
    // stationary: without it every entry converges onto its data point and the
    // network never trains against anchors drawn the way sampling draws them.
    // 0 disables (and then draws nothing from the buffer-init stream).
    double anchor_reset = 0.0;
    int64_t checkpoint_interval = 0;  // 0 = final checkpoint only
    int64_t log_interval = 100;

    void validate() const;
};

// Per-example running estimates of x0, keyed by dense dataset id. Anchors read
// from here are constants for the optimizer: no gradient reaches the buffer.
struct EstimateBuffer {
    int64_t dim = 0;
    std::vector<float> values;  // count x dim
    int64_t epoch = 0;
    int64_t processed = 0;  // examples consumed; epoch = processed / count
    // per_epoch staging: applied when a step completes an epoch
    std::map<int64_t, std::vector<float>> staged;

    int64_t count() const {
        return dim == 0 ? 0 : static_cast<int64_t>(values.size()) / dim;
    }
    Vec get(int64_t id) const;
    void set(int64_t id, const Vec& v);
};

struct TrainState {
    ProcessSpec spec;
    TrainConfig cfg;
    NetworkParams params;
    NetworkParams ema_params;
    std::vector<std::vector<float>> opt_m;  // Adam first moments (zeros for SGD)
    std::vector<std::vector<float>> opt_v;  // Adam second moments
    EstimateBuffer buffer;
    int64_t step = 0;
    RngStream data_stream, noise_stream, init_stream, buffer_init_stream;
};

struct TrainExample {
    int64_t id = 0;
    Vec x0;
    Vec anchor;
    PerturbedState state;
    Preconditioning coeffs;
};

TrainState init_train_state(const Dataset& ds, const ProcessSpec& spec,
                            const NetConfig& net_cfg, const TrainConfig& cfg);

// Draws ids from the data stream, then time + noise per example from the noise
// stream, and fetches anchors. Mutating the streams is the point: a cloned
// state replays the exact batch.
std::vector<TrainExample> assemble_batch(TrainState& state, const Dataset& ds);

// One optimization step; returns the batch loss. Write-back stores the
// pre-update estimates g_i per the buffer_update policy.
double train_step(TrainState& state, const Dataset& ds, const ProcessSpec& spec,
                  const TrainConfig& cfg);

NetworkParams ema_update(const NetworkParams& ema, const NetworkParams& params,
                         double decay);

struct TrainSink {
    std::function<void(const TrainState&, bool is_final)> on_checkpoint;
    std::function<void(int64_t step, double loss, double ema_loss_window)> on_metrics;
};

// Runs from state.step to cfg.iterations. The metrics column is an EMA of the
// per-step loss (decay 0.99), seeded at the first step observed.
void train_from(TrainState& state, const Dataset& ds, const TrainSink& sink);
TrainState train(const Dataset& ds, const ProcessSpec& spec, const NetConfig& net_cfg,
                 const TrainConfig& cfg, const TrainSink& sink);

}  // namespace iflow
