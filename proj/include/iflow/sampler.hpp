#pragma once

#include <cstdint>

#include "iflow/common.hpp"
#include "iflow/net.hpp"
#include "iflow/process.hpp"
#include "iflow/trainer.hpp"

namespace iflow {

struct SampleRequest {
    int64_t count = 1;
    int64_t steps = 1;  // k: number of g evaluations
    bool use_ema = true;
    uint64_t seed = 0;
};

// Anchored refinement at the terminal time: x0^(j+1) = g(x0^(j), x_T, T) with
// (x_T, T) held fixed; only the anchor evolves. pfgm_radius is the drawn R_T
// for PFGM++ (preconditioning depends on it) and ignored otherwise.
Vec refine(const NetworkParams& params, const ProcessSpec& spec, const Vec& x_T,
           double pfgm_radius, Vec anchor, int64_t k);

// Draws count samples; sample i uses its own (seed, i) substream: prior first,
// then the initial anchor x0^(0) ~ N(0, I). use_ema only selects which
// parameter set the caller passes / the overload picks; it never changes RNG
// consumption.
Matrix sample(const NetworkParams& params, const ProcessSpec& spec,
              const SampleRequest& req);
Matrix sample(const TrainState& state, const SampleRequest& req);

// RF only. times descend from 1 to 0 on a uniform grid; states[i] is
// z_t = (1-t)*x_hat0 + t*z and predictions[i] = g(x_hat0, z_t, t), where
// x_hat0 (= endpoint) is the refinement of z with refine_steps evaluations
// starting from the anchor-seeded x0^(0).
struct Trajectory {
    std::vector<double> times;
    std::vector<Vec> states;
    std::vector<Vec> predictions;
    Vec endpoint;
};
Trajectory trace(const NetworkParams& params, const ProcessSpec& spec, const Vec& z,
                 uint64_t anchor_seed, int64_t num_times, int64_t refine_steps = 1,
                 uint64_t trace_index = 0);

}  // namespace iflow
