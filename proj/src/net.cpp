#include "iflow/net.hpp"

#include <cmath>

namespace iflow {

const char* activation_name(Activation a) {
    switch (a) {
        case Activation::SiLU: return "silu";
        case Activation::ReLU: return "relu";
        case Activation::Tanh: return "tanh";
    }
    return "?";
}

Activation activation_from_name(const std::string& name) {
    if (name == "silu") return Activation::SiLU;
    if (name == "relu") return Activation::ReLU;
    if (name == "tanh") return Activation::Tanh;
    throw ArgumentError("unknown activation '" + name + "' (expected silu, relu, or tanh)");
}

void NetConfig::validate() const {
    if (input_dim < 1) throw ArgumentError("net: input_dim must be >= 1");
    if (hidden_sizes.empty()) throw ArgumentError("net: at least one hidden layer required");
    for (int64_t h : hidden_sizes)
        if (h < 1) throw ArgumentError("net: hidden sizes must be >= 1");
    if (time_embed_dim < 2 || time_embed_dim % 2 != 0)
        throw ArgumentError("net: time_embed_dim must be even and >= 2");
}

std::vector<int64_t> NetConfig::layer_dims() const {
    std::vector<int64_t> dims;
    dims.push_back(concat_dim());
    for (int64_t h : hidden_sizes) dims.push_back(h);
    dims.push_back(input_dim);
    return dims;
}

NetworkParams init_params(const NetConfig& cfg, RngStream& rng) {
    cfg.validate();
    NetworkParams p;
    p.config = cfg;
    std::vector<int64_t> dims = cfg.layer_dims();
    size_t layers = dims.size() - 1;
    for (size_t l = 0; l < layers; ++l) {
        int64_t in = dims[l], out = dims[l + 1];
        Tensor w, b;
        w.name = "layer" + std::to_string(l) + ".weight";
        w.shape = {out, in};
        w.data.assign(out * in, 0.0f);
        b.name = "layer" + std::to_string(l) + ".bias";
        b.shape = {out};
        b.data.assign(out, 0.0f);
        if (l + 1 < layers) {
            double bound = 1.0 / std::sqrt(static_cast<double>(in));
            for (float& v : w.data)
                v = static_cast<float>(-bound + 2.0 * bound * rng.uniform());
            for (float& v : b.data)
                v = static_cast<float>(-bound + 2.0 * bound * rng.uniform());
        }
        p.tensors.push_back(std::move(w));
        p.tensors.push_back(std::move(b));
    }
    return p;
}

Vec time_embed(const NetConfig& cfg, double t_scaled) {
    int64_t half = cfg.time_embed_dim / 2;
    Vec e(cfg.time_embed_dim);
    for (int64_t j = 0; j < half; ++j) {
        double freq = half == 1
                          ? 1.0
                          : std::exp(static_cast<double>(j) * std::log(1000.0) /
                                     static_cast<double>(half - 1));
        e[2 * j] = std::sin(freq * t_scaled);
        e[2 * j + 1] = std::cos(freq * t_scaled);
    }
    return e;
}

static double act(Activation a, double x) {
    switch (a) {
        case Activation::SiLU: return x / (1.0 + std::exp(-x));
        case Activation::ReLU: return x > 0.0 ? x : 0.0;
        case Activation::Tanh: return std::tanh(x);
    }
    return x;
}

static double act_grad(Activation a, double x) {
    switch (a) {
        case Activation::SiLU: {
            double s = 1.0 / (1.0 + std::exp(-x));
            return s * (1.0 + x * (1.0 - s));
        }
        case Activation::ReLU:
            return x > 0.0 ? 1.0 : 0.0;
        case Activation::Tanh: {
            double t = std::tanh(x);
            return 1.0 - t * t;
        }
    }
    return 1.0;
}

static void build_input(const NetConfig& cfg, const Vec& anchor, const Vec& x_t,
                        double t_scaled, Vec& input) {
    if (static_cast<int64_t>(x_t.size()) != cfg.input_dim ||
        static_cast<int64_t>(anchor.size()) != cfg.input_dim)
        throw ArgumentError("net: anchor/x_t dimension mismatch with config");
    input.resize(cfg.concat_dim());
    size_t k = 0;
    for (double v : x_t) input[k++] = v;
    for (double v : anchor) input[k++] = v;
    Vec e = time_embed(cfg, t_scaled);
    for (double v : e) input[k++] = v;
}

// Forward pass with optional caches for backprop: pre[l] holds the
// pre-activation of layer l, h[l] the post-activation input feeding layer l.
static Vec forward_impl(const NetworkParams& params, const Vec& input,
                        std::vector<Vec>* h_cache, std::vector<Vec>* pre_cache) {
    size_t layers = params.num_layers();
    Vec h = input;
    if (h_cache) h_cache->push_back(h);
    for (size_t l = 0; l < layers; ++l) {
        const Tensor& w = params.weight(l);
        const Tensor& b = params.bias(l);
        int64_t out = w.shape[0], in = w.shape[1];
        Vec z(out);
        const float* wd = w.data.data();
        for (int64_t i = 0; i < out; ++i) {
            double acc = static_cast<double>(b.data[i]);
            const float* row = wd + i * in;
            for (int64_t j = 0; j < in; ++j) acc += static_cast<double>(row[j]) * h[j];
            z[i] = acc;
        }
        if (pre_cache) pre_cache->push_back(z);
        if (l + 1 < layers) {
            Activation a = params.config.activation;
            for (double& v : z) v = act(a, v);
            if (h_cache) h_cache->push_back(z);
        }
        h = std::move(z);
    }
    return h;
}

Vec G_forward(const NetworkParams& params, const Vec& anchor, const Vec& x_t,
              double t_scaled) {
    Vec input;
    build_input(params.config, anchor, x_t, t_scaled, input);
    return forward_impl(params, input, nullptr, nullptr);
}

Vec g_eval(const NetworkParams& params, const Vec& anchor, const Vec& x_t,
           double t_scaled, const Preconditioning& coeffs) {
    Vec y = G_forward(params, anchor, x_t, t_scaled);
    for (size_t i = 0; i < y.size(); ++i) y[i] = coeffs.a * x_t[i] + coeffs.b * y[i];
    return y;
}

Vec g_forward(const NetworkParams& params, const Vec& anchor, const PerturbedState& state,
              const Preconditioning& coeffs) {
    return g_eval(params, anchor, state.x_t, state.t_scaled, coeffs);
}

double pseudo_huber(const Vec& x, const Vec& y, double c) {
    if (x.size() != y.size()) throw ArgumentError("pseudo_huber: size mismatch");
    if (!(c > 0.0)) throw ArgumentError("pseudo_huber: c must be positive");
    return std::sqrt(squared_distance(x, y) + c * c) - c;
}

LossGrad loss_and_grad(const NetworkParams& params, const std::vector<LossExample>& batch,
                       double c) {
    if (batch.empty()) throw ArgumentError("loss_and_grad: empty batch");
    if (!(c > 0.0)) throw ArgumentError("loss_and_grad: c must be positive");

    LossGrad out;
    out.grads.resize(params.tensors.size());
    for (size_t i = 0; i < params.tensors.size(); ++i)
        out.grads[i].assign(params.tensors[i].numel(), 0.0);
    out.predictions.reserve(batch.size());

    size_t layers = params.num_layers();
    Activation a = params.config.activation;
    double total = 0.0;

    Vec input;
    for (const LossExample& ex : batch) {
        build_input(params.config, *ex.anchor, *ex.x_t, ex.t_scaled, input);
        std::vector<Vec> h_cache, pre_cache;
        h_cache.reserve(layers);
        pre_cache.reserve(layers);
        Vec y = forward_impl(params, input, &h_cache, &pre_cache);

        Vec g(y.size());
        for (size_t i = 0; i < y.size(); ++i)
            g[i] = ex.coeffs.a * (*ex.x_t)[i] + ex.coeffs.b * y[i];

        double sq = squared_distance(g, *ex.target);
        double root = std::sqrt(sq + c * c);
        total += root - c;

        // dL/dy = b * (g - target) / root
        Vec delta(y.size());
        for (size_t i = 0; i < y.size(); ++i)
            delta[i] = ex.coeffs.b * (g[i] - (*ex.target)[i]) / root;

        for (size_t l = layers; l-- > 0;) {
            const Tensor& w = params.weight(l);
            int64_t outd = w.shape[0], ind = w.shape[1];
            const Vec& h = h_cache[l];
            std::vector<double>& gw = out.grads[2 * l];
            std::vector<double>& gb = out.grads[2 * l + 1];
            for (int64_t i = 0; i < outd; ++i) {
                double d = delta[i];
                gb[i] += d;
                double* grow = gw.data() + i * ind;
                for (int64_t j = 0; j < ind; ++j) grow[j] += d * h[j];
            }
            if (l == 0) break;
            Vec prev(ind, 0.0);
            const float* wd = w.data.data();
            for (int64_t i = 0; i < outd; ++i) {
                double d = delta[i];
                const float* row = wd + i * ind;
                for (int64_t j = 0; j < ind; ++j) prev[j] += static_cast<double>(row[j]) * d;
            }
            const Vec& pre = pre_cache[l - 1];
            for (int64_t j = 0; j < ind; ++j) prev[j] *= act_grad(a, pre[j]);
            delta = std::move(prev);
        }
        out.predictions.push_back(std::move(g));
    }

    double inv = 1.0 / static_cast<double>(batch.size());
    out.loss = total * inv;
    for (auto& g : out.grads)
        for (double& v : g) v *= inv;
    if (!std::isfinite(out.loss)) throw NumericError("loss_and_grad: non-finite loss");
    return out;
}

}  // namespace iflow
