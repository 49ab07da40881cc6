#pragma once

#include <cstdint>

#include "iflow/common.hpp"
#include "iflow/data.hpp"
#include "iflow/net.hpp"
#include "iflow/sampler.hpp"
#include "iflow/trainer.hpp"

namespace iflow {

// Energy distance 2E||a-b|| - E||a-a'|| - E||b-b'|| with V-statistic within-set
// terms (all n^2 ordered pairs; the zero diagonal makes ED(A, A) exactly 0 on
// identical multisets). Sets larger than max_points are subsampled with the
// seeded stream. Summation order is fixed (block-ordered reduction), so the
// result is independent of the thread count.
double energy_distance(const Matrix& a, const Matrix& b, size_t max_points = 10000,
                       uint64_t seed = 0);

// max_t ||prediction(t) - endpoint|| / max(||z - endpoint||, 1e-12), where z is
// the trajectory state at t = 1.
double straightness(const Trajectory& traj);

// Mean straightness over trace_count traces. Trace i draws its prior from the
// (seed, sample, i) substream and its anchor from the (seed, trace, i)
// substream, so the set is deterministic and extendable.
double mean_straightness(const NetworkParams& params, const ProcessSpec& spec,
                         int64_t trace_count, int64_t num_times, uint64_t seed,
                         int64_t refine_steps = 1);

struct BiLipschitzReport {
    double min_ratio = 0.0;
    double max_ratio = 0.0;
    double estimated_L = 0.0;  // max(|log max_ratio|, |log min_ratio|) at unit scaled time
    int64_t collisions = 0;    // out_dist < 1e-6 while in_dist >= delta_in
    int64_t pairs_tested = 0;
};

// Draws prior pairs at least delta_in apart, refines both through k anchored
// evaluations from a shared per-pair anchor, and reports the spread of
// out-distance / in-distance ratios.
BiLipschitzReport bilipschitz_probe(const NetworkParams& params, const ProcessSpec& spec,
                                    int64_t num_pairs, int64_t k, double delta_in,
                                    RngStream& rng);

// Trains two models with identical seeds - the standard anchored estimator and
// one with the anchor input pinned to zero (same parameter count) - and
// reports held-out x0-recovery MSE for both on paired perturbations. The
// anchored arm recovers x0 via two refinement passes from a unit-normal
// anchor; the anchor-free arm is evaluated with its constant zero anchor.
// Evaluation uses the training parameters (not EMA) for both arms.
struct AblationResult {
    double mse_with_anchor = 0.0;
    double mse_without_anchor = 0.0;
    double se_paired_diff = 0.0;  // SE of mean(err_with - err_without)
    int64_t eval_points = 0;
};
AblationResult conditioning_ablation(const Dataset& ds, const ProcessSpec& spec,
                                     const NetConfig& net_cfg, const TrainConfig& cfg);

}  // namespace iflow
