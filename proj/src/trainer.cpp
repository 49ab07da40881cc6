#include "iflow/trainer.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace iflow {

double default_c(ProcessKind kind) {
    switch (kind) {
        case ProcessKind::VE: return 0.00016;
        case ProcessKind::RF: return 0.0001;
        case ProcessKind::PFGMPP: return 0.00016;
    }
    return 0.0001;
}

void TrainConfig::validate() const {
    if (!(lr >= 0.0)) throw ArgumentError("train: lr must be >= 0");
    if (batch_size < 1) throw ArgumentError("train: batch_size must be >= 1");
    if (iterations < 0) throw ArgumentError("train: iterations must be >= 0");
    if (!(ema_decay >= 0.0 && ema_decay <= 1.0))
        throw ArgumentError("train: ema_decay must be in [0, 1]");
    if (!(c >= 0.0)) throw ArgumentError("train: c must be >= 0");
    if (!(adam_beta1 >= 0.0 && adam_beta1 < 1.0) || !(adam_beta2 >= 0.0 && adam_beta2 < 1.0))
        throw ArgumentError("train: adam betas must be in [0, 1)");
    if (!(adam_eps > 0.0)) throw ArgumentError("train: adam_eps must be positive");
    if (checkpoint_interval < 0 || log_interval < 0)
        throw ArgumentError("train: intervals must be >= 0");
    if (!(anchor_reset >= 0.0 && anchor_reset < 1.0))
        throw ArgumentError("train: anchor_reset must be in [0, 1)");
}

Vec EstimateBuffer::get(int64_t id) const {
    if (id < 0 || id >= count()) throw ArgumentError("buffer: id out of range");
    Vec v(dim);
    for (int64_t j = 0; j < dim; ++j)
        v[j] = static_cast<double>(values[id * dim + j]);
    return v;
}

void EstimateBuffer::set(int64_t id, const Vec& v) {
    if (id < 0 || id >= count()) throw ArgumentError("buffer: id out of range");
    if (static_cast<int64_t>(v.size()) != dim) throw ArgumentError("buffer: dim mismatch");
    for (int64_t j = 0; j < dim; ++j)
        values[id * dim + j] = static_cast<float>(v[j]);
}

TrainState init_train_state(const Dataset& ds, const ProcessSpec& spec,
                            const NetConfig& net_cfg, const TrainConfig& cfg) {
    spec.validate();
    net_cfg.validate();
    cfg.validate();
    if (net_cfg.input_dim != ds.dim())
        throw ArgumentError("init_train_state: net input_dim must equal the data dim");
    if (spec.kind == ProcessKind::PFGMPP && spec.N != ds.dim())
        throw ArgumentError("init_train_state: pfgmpp N must equal the data dim");
    if (cfg.batch_size > ds.count())
        throw ArgumentError("init_train_state: batch_size exceeds dataset count");

    TrainState st;
    st.spec = spec;
    st.cfg = cfg;
    if (st.cfg.c == 0.0) st.cfg.c = default_c(spec.kind);
    st.data_stream = RngStream(cfg.seed, StreamPurpose::TrainData);
    st.noise_stream = RngStream(cfg.seed, StreamPurpose::TrainNoise);
    st.init_stream = RngStream(cfg.seed, StreamPurpose::ParamInit);
    st.buffer_init_stream = RngStream(cfg.seed, StreamPurpose::BufferInit);

    st.params = init_params(net_cfg, st.init_stream);
    st.ema_params = st.params;
    st.opt_m.resize(st.params.tensors.size());
    st.opt_v.resize(st.params.tensors.size());
    for (size_t i = 0; i < st.params.tensors.size(); ++i) {
        st.opt_m[i].assign(st.params.tensors[i].numel(), 0.0f);
        st.opt_v[i].assign(st.params.tensors[i].numel(), 0.0f);
    }

    st.buffer.dim = ds.dim();
    st.buffer.values.assign(ds.count() * ds.dim(), 0.0f);
    if (cfg.buffer_init == BufferInit::Normal) {
        std::vector<double> tmp(ds.count() * ds.dim());
        st.buffer_init_stream.fill_normal(tmp.data(), tmp.size());
        for (size_t i = 0; i < tmp.size(); ++i)
            st.buffer.values[i] = static_cast<float>(tmp[i]);
    }
    return st;
}

std::vector<TrainExample> assemble_batch(TrainState& state, const Dataset& ds) {
    std::vector<TrainExample> batch(state.cfg.batch_size);
    for (TrainExample& ex : batch)
        ex.id = static_cast<int64_t>(
            state.data_stream.uniform_int(static_cast<uint64_t>(ds.count())));
    for (TrainExample& ex : batch) {
        ex.x0 = ds.points.row_vec(ex.id);
        double t = draw_time(state.spec, state.noise_stream);
        ex.state = perturb(state.spec, ex.x0, t, state.noise_stream);
        double radius = 0.0;
        if (const PfgmAux* aux = std::get_if<PfgmAux>(&ex.state.aux)) radius = aux->radius;
        ex.coeffs = precondition(state.spec, t, radius);
        if (state.cfg.anchor_mode == AnchorMode::Zero) {
            ex.anchor = Vec(ds.dim(), 0.0);
            continue;
        }
        if (state.cfg.anchor_reset > 0.0 &&
            state.buffer_init_stream.uniform() < state.cfg.anchor_reset) {
            Vec fresh(ds.dim());
            state.buffer_init_stream.fill_normal(fresh.data(), fresh.size());
            state.buffer.set(ex.id, fresh);
        }
        ex.anchor = state.buffer.get(ex.id);
    }
    return batch;
}

NetworkParams ema_update(const NetworkParams& ema, const NetworkParams& params,
                         double decay) {
    if (ema.tensors.size() != params.tensors.size())
        throw ArgumentError("ema_update: tensor layout mismatch");
    if (!(decay >= 0.0 && decay <= 1.0)) throw ArgumentError("ema_update: decay in [0,1]");
    NetworkParams out = ema;
    for (size_t i = 0; i < out.tensors.size(); ++i) {
        const Tensor& p = params.tensors[i];
        Tensor& e = out.tensors[i];
        if (e.data.size() != p.data.size())
            throw ArgumentError("ema_update: tensor size mismatch");
        for (size_t j = 0; j < e.data.size(); ++j)
            e.data[j] = static_cast<float>(decay * static_cast<double>(e.data[j]) +
                                           (1.0 - decay) * static_cast<double>(p.data[j]));
    }
    out.step_count = params.step_count;
    return out;
}

// All optimizer arithmetic runs in double but every retained value passes
// through fp32, so the whole state transition is a function of fp32 state and
// a reloaded checkpoint resumes bit-exactly.
static void apply_update(TrainState& state, const LossGrad& lg, const TrainConfig& cfg) {
    int64_t t = state.step + 1;
    if (cfg.optimizer == OptimizerKind::Adam) {
        double bc1 = 1.0 - std::pow(cfg.adam_beta1, static_cast<double>(t));
        double bc2 = 1.0 - std::pow(cfg.adam_beta2, static_cast<double>(t));
        for (size_t i = 0; i < state.params.tensors.size(); ++i) {
            std::vector<float>& p = state.params.tensors[i].data;
            std::vector<float>& m = state.opt_m[i];
            std::vector<float>& v = state.opt_v[i];
            const std::vector<double>& g = lg.grads[i];
            for (size_t j = 0; j < p.size(); ++j) {
                float mf = static_cast<float>(cfg.adam_beta1 * static_cast<double>(m[j]) +
                                              (1.0 - cfg.adam_beta1) * g[j]);
                float vf = static_cast<float>(cfg.adam_beta2 * static_cast<double>(v[j]) +
                                              (1.0 - cfg.adam_beta2) * g[j] * g[j]);
                m[j] = mf;
                v[j] = vf;
                double mhat = static_cast<double>(mf) / bc1;
                double vhat = static_cast<double>(vf) / bc2;
                p[j] = static_cast<float>(static_cast<double>(p[j]) -
                                          cfg.lr * mhat / (std::sqrt(vhat) + cfg.adam_eps));
            }
        }
    } else {
        for (size_t i = 0; i < state.params.tensors.size(); ++i) {
            std::vector<float>& p = state.params.tensors[i].data;
            const std::vector<double>& g = lg.grads[i];
            for (size_t j = 0; j < p.size(); ++j)
                p[j] = static_cast<float>(static_cast<double>(p[j]) - cfg.lr * g[j]);
        }
    }
}

double train_step(TrainState& state, const Dataset& ds, const ProcessSpec& spec,
                  const TrainConfig& cfg) {
    if (spec.kind != state.spec.kind)
        throw ArgumentError("train_step: spec does not match the state");

    std::vector<TrainExample> batch = assemble_batch(state, ds);
    std::vector<LossExample> views;
    views.reserve(batch.size());
    for (const TrainExample& ex : batch)
        views.push_back({&ex.anchor, &ex.state.x_t, ex.state.t_scaled, ex.coeffs, &ex.x0});

    double c = cfg.c > 0.0 ? cfg.c : default_c(spec.kind);
    LossGrad lg;
    try {
        lg = loss_and_grad(state.params, views, c);
    } catch (const NumericError& e) {
        std::ostringstream msg;
        msg << e.what() << " at training step " << state.step << " (times:";
        for (const TrainExample& ex : batch) msg << ' ' << ex.state.t;
        msg << ")";
        throw NumericError(msg.str());
    }

    apply_update(state, lg, cfg);
    state.step += 1;
    state.params.step_count = state.step;
    state.ema_params = ema_update(state.ema_params, state.params, cfg.ema_decay);

    EstimateBuffer& buf = state.buffer;
    bool writeback = cfg.buffer_writeback && cfg.anchor_mode == AnchorMode::Buffer;
    if (writeback) {
        if (cfg.buffer_update == BufferUpdate::PerBatch) {
            for (size_t i = 0; i < batch.size(); ++i) buf.set(batch[i].id, lg.predictions[i]);
        } else {
            for (size_t i = 0; i < batch.size(); ++i) {
                std::vector<float> v(buf.dim);
                for (int64_t j = 0; j < buf.dim; ++j)
                    v[j] = static_cast<float>(lg.predictions[i][j]);
                buf.staged[batch[i].id] = std::move(v);
            }
        }
    }
    int64_t epoch_before = buf.processed / ds.count();
    buf.processed += cfg.batch_size;
    buf.epoch = buf.processed / ds.count();
    if (writeback && cfg.buffer_update == BufferUpdate::PerEpoch && buf.epoch > epoch_before) {
        for (const auto& [id, v] : buf.staged)
            for (int64_t j = 0; j < buf.dim; ++j) buf.values[id * buf.dim + j] = v[j];
        buf.staged.clear();
    }
    return lg.loss;
}

void train_from(TrainState& state, const Dataset& ds, const TrainSink& sink) {
    double ema_loss = std::numeric_limits<double>::quiet_NaN();
    while (state.step < state.cfg.iterations) {
        double loss = train_step(state, ds, state.spec, state.cfg);
        ema_loss = std::isnan(ema_loss) ? loss : 0.99 * ema_loss + 0.01 * loss;
        if (sink.on_metrics && state.cfg.log_interval > 0 &&
            state.step % state.cfg.log_interval == 0)
            sink.on_metrics(state.step, loss, ema_loss);
        if (sink.on_checkpoint && state.cfg.checkpoint_interval > 0 &&
            state.step % state.cfg.checkpoint_interval == 0 &&
            state.step < state.cfg.iterations)
            sink.on_checkpoint(state, false);
    }
    if (sink.on_checkpoint) sink.on_checkpoint(state, true);
}

TrainState train(const Dataset& ds, const ProcessSpec& spec, const NetConfig& net_cfg,
                 const TrainConfig& cfg, const TrainSink& sink) {
    TrainState state = init_train_state(ds, spec, net_cfg, cfg);
    train_from(state, ds, sink);
    return state;
}

}  // namespace iflow
