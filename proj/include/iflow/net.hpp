#pragma once

#include <cstdint>
#include <string>

#include "iflow/common.hpp"
#include "iflow/process.hpp"
#include "iflow/rng.hpp"

namespace iflow {

enum class Activation { SiLU, ReLU, Tanh };

const char* activation_name(Activation a);
Activation activation_from_name(const std::string& name);

// MLP over the concatenation [x_t || anchor || sinusoidal_embed(t_scaled)].
// hidden_sizes are the widths of the hidden layers; the output layer maps back
// to input_dim and is zero-initialized so the net starts as G == 0.
struct NetConfig {
    int64_t input_dim = 2;
    std::vector<int64_t> hidden_sizes = {128, 128, 128};
    int64_t time_embed_dim = 16;  // even
    Activation activation = Activation::SiLU;

    void validate() const;
    int64_t concat_dim() const { return 2 * input_dim + time_embed_dim; }
    // full layer width sequence: concat_dim, hidden..., input_dim
    std::vector<int64_t> layer_dims() const;
};

// Named fp32 array. Learnable state lives in fp32 (matching the checkpoint
// payload bit-for-bit); all arithmetic promotes to double.
struct Tensor {
    std::string name;
    std::vector<int64_t> shape;
    std::vector<float> data;

    int64_t numel() const {
        int64_t n = 1;
        for (int64_t s : shape) n *= s;
        return n;
    }
};

struct NetworkParams {
    NetConfig config;
    int64_t step_count = 0;
    // layer{i}.weight (out x in, row-major), layer{i}.bias (out), in layer order
    std::vector<Tensor> tensors;

    size_t num_layers() const { return tensors.size() / 2; }
    Tensor& weight(size_t l) { return tensors[2 * l]; }
    const Tensor& weight(size_t l) const { return tensors[2 * l]; }
    Tensor& bias(size_t l) { return tensors[2 * l + 1]; }
    const Tensor& bias(size_t l) const { return tensors[2 * l + 1]; }
    int64_t param_count() const {
        int64_t n = 0;
        for (const Tensor& t : tensors) n += t.numel();
        return n;
    }
};

// Fan-in-scaled uniform init U(-1/sqrt(fan_in), 1/sqrt(fan_in)) for weights and
// biases of every layer except the final one, which is zeroed.
NetworkParams init_params(const NetConfig& cfg, RngStream& init_rng);

// Sinusoidal features: time_embed_dim/2 frequencies log-spaced in [1, 1000],
// (sin, cos) per frequency.
Vec time_embed(const NetConfig& cfg, double t_scaled);

// Raw network output G(anchor, x_t, t_scaled).
Vec G_forward(const NetworkParams& params, const Vec& anchor, const Vec& x_t,
              double t_scaled);

// Estimator g = a * x_t + b * G(anchor, x_t, t_scaled).
Vec g_eval(const NetworkParams& params, const Vec& anchor, const Vec& x_t,
           double t_scaled, const Preconditioning& coeffs);
Vec g_forward(const NetworkParams& params, const Vec& anchor, const PerturbedState& state,
              const Preconditioning& coeffs);

// Pseudo-Huber distance d(x, y) = sqrt(||x - y||^2 + c^2) - c.
double pseudo_huber(const Vec& x, const Vec& y, double c);

// One batch item for the loss; pointers alias caller storage.
struct LossExample {
    const Vec* anchor;
    const Vec* x_t;
    double t_scaled;
    Preconditioning coeffs;
    const Vec* target;
};

// Mean pseudo-Huber loss over the batch plus parameter gradients (double,
// aligned with params.tensors) and the per-example estimates g_i. Anchors are
// inputs, never parameters: no gradient flows to them.
struct LossGrad {
    double loss = 0.0;
    std::vector<std::vector<double>> grads;
    std::vector<Vec> predictions;
};
LossGrad loss_and_grad(const NetworkParams& params, const std::vector<LossExample>& batch,
                       double c);

}  // namespace iflow
