#include "iflow/sampler.hpp"

namespace iflow {

Vec refine(const NetworkParams& params, const ProcessSpec& spec, const Vec& x_T,
           double pfgm_radius, Vec anchor, int64_t k) {
    if (k < 1) throw ArgumentError("refine: steps must be >= 1");
    double t = spec.kind == ProcessKind::RF ? 1.0 : static_cast<double>(spec.T);
    Preconditioning coeffs = precondition(spec, t, pfgm_radius);
    double t_scaled = time_scale(spec, t);
    for (int64_t j = 0; j < k; ++j)
        anchor = g_eval(params, anchor, x_T, t_scaled, coeffs);
    return anchor;
}

Matrix sample(const NetworkParams& params, const ProcessSpec& spec,
              const SampleRequest& req) {
    spec.validate();
    if (req.count < 1) throw ArgumentError("sample: count must be >= 1");
    if (req.steps < 1) throw ArgumentError("sample: steps must be >= 1");
    int64_t dim = params.config.input_dim;

    Matrix out(req.count, dim);
    parallel_blocks(req.count, 64, [&](size_t begin, size_t end) {
        for (size_t i = begin; i < end; ++i) {
            RngStream rng(req.seed, StreamPurpose::Sample, i);
            PriorDraw prior = draw_prior(spec, dim, rng);
            Vec anchor = rng.normal_vec(dim);
            Vec x0 = refine(params, spec, prior.x, prior.pfgm_radius,
                            std::move(anchor), req.steps);
            if (!all_finite(x0))
                throw NumericError("sample: non-finite output at index " + std::to_string(i));
            out.set_row(i, x0);
        }
    });
    return out;
}

Matrix sample(const TrainState& state, const SampleRequest& req) {
    return sample(req.use_ema ? state.ema_params : state.params, state.spec, req);
}

Trajectory trace(const NetworkParams& params, const ProcessSpec& spec, const Vec& z,
                 uint64_t anchor_seed, int64_t num_times, int64_t refine_steps,
                 uint64_t trace_index) {
    if (spec.kind != ProcessKind::RF)
        throw ArgumentError("trace: only rf trajectories are straight lines; got " +
                            std::string(process_name(spec.kind)));
    if (num_times < 2) throw ArgumentError("trace: num_times must be >= 2");
    require_finite(z, "trace: z");
    if (static_cast<int64_t>(z.size()) != params.config.input_dim)
        throw ArgumentError("trace: z dimension mismatch");

    RngStream rng(anchor_seed, StreamPurpose::Trace, trace_index);
    Vec anchor = rng.normal_vec(z.size());
    Vec x_hat = refine(params, spec, z, 0.0, std::move(anchor), refine_steps);

    Trajectory traj;
    traj.endpoint = x_hat;
    Preconditioning coeffs{0.0, 1.0};
    for (int64_t i = 0; i < num_times; ++i) {
        double t = 1.0 - static_cast<double>(i) / static_cast<double>(num_times - 1);
        Vec z_t = rf_interpolate(x_hat, z, t);
        traj.times.push_back(t);
        traj.predictions.push_back(g_eval(params, x_hat, z_t, t, coeffs));
        traj.states.push_back(std::move(z_t));
    }
    return traj;
}

}  // namespace iflow
