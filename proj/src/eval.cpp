#include "iflow/eval.hpp"

#include <cmath>
#include <limits>

namespace iflow {

static Matrix subsample(const Matrix& m, size_t max_points, uint64_t seed, uint64_t salt) {
    if (m.rows <= max_points) return m;
    std::vector<size_t> idx(m.rows);
    for (size_t i = 0; i < m.rows; ++i) idx[i] = i;
    RngStream rng(seed, StreamPurpose::EvalPairs, salt);
    for (size_t i = 0; i < max_points; ++i) {
        size_t j = i + rng.uniform_int(m.rows - i);
        std::swap(idx[i], idx[j]);
    }
    Matrix out(max_points, m.cols);
    for (size_t i = 0; i < max_points; ++i) out.set_row(i, m.row_vec(idx[i]));
    return out;
}

static double mean_cross_distance(const Matrix& a, const Matrix& b) {
    size_t nblocks = (a.rows + 255) / 256;
    std::vector<double> partial(nblocks, 0.0);
    parallel_blocks(a.rows, 256, [&](size_t begin, size_t end) {
        double acc = 0.0;
        for (size_t i = begin; i < end; ++i) {
            const double* ra = a.row(i);
            for (size_t j = 0; j < b.rows; ++j) {
                const double* rb = b.row(j);
                double sq = 0.0;
                for (size_t k = 0; k < a.cols; ++k) {
                    double d = ra[k] - rb[k];
                    sq += d * d;
                }
                acc += std::sqrt(sq);
            }
        }
        partial[begin / 256] = acc;
    });
    double total = 0.0;
    for (double p : partial) total += p;
    return total / (static_cast<double>(a.rows) * static_cast<double>(b.rows));
}

double energy_distance(const Matrix& a, const Matrix& b, size_t max_points, uint64_t seed) {
    if (a.rows == 0 || b.rows == 0) throw ArgumentError("energy_distance: empty sample set");
    if (a.cols != b.cols) throw ArgumentError("energy_distance: dimension mismatch");
    if (max_points < 2) throw ArgumentError("energy_distance: max_points must be >= 2");
    Matrix sa = subsample(a, max_points, seed, 1);
    Matrix sb = subsample(b, max_points, seed, 2);
    double cross = mean_cross_distance(sa, sb);
    double within_a = mean_cross_distance(sa, sa);
    double within_b = mean_cross_distance(sb, sb);
    return 2.0 * cross - within_a - within_b;
}

double straightness(const Trajectory& traj) {
    if (traj.times.size() < 2) throw ArgumentError("straightness: need at least 2 times");
    if (traj.states.size() != traj.times.size() ||
        traj.predictions.size() != traj.times.size())
        throw ArgumentError("straightness: trajectory arrays disagree in length");
    const Vec& z = traj.states.front();  // times descend, so t=1 comes first
    double den = 0.0;
    for (size_t i = 0; i < z.size(); ++i) {
        double d = z[i] - traj.endpoint[i];
        den += d * d;
    }
    den = std::max(std::sqrt(den), 1e-12);
    double worst = 0.0;
    for (const Vec& pred : traj.predictions) {
        double sq = 0.0;
        for (size_t i = 0; i < pred.size(); ++i) {
            double d = pred[i] - traj.endpoint[i];
            sq += d * d;
        }
        worst = std::max(worst, std::sqrt(sq) / den);
    }
    return worst;
}

double mean_straightness(const NetworkParams& params, const ProcessSpec& spec,
                         int64_t trace_count, int64_t num_times, uint64_t seed,
                         int64_t refine_steps) {
    if (trace_count < 1) throw ArgumentError("mean_straightness: trace_count must be >= 1");
    int64_t dim = params.config.input_dim;
    std::vector<double> values(trace_count, 0.0);
    parallel_blocks(trace_count, 16, [&](size_t begin, size_t end) {
        for (size_t i = begin; i < end; ++i) {
            RngStream rng(seed, StreamPurpose::Sample, i);
            PriorDraw prior = draw_prior(spec, dim, rng);
            Trajectory traj =
                trace(params, spec, prior.x, seed, num_times, refine_steps, i);
            values[i] = straightness(traj);
        }
    });
    double sum = 0.0;
    for (double v : values) sum += v;
    return sum / static_cast<double>(trace_count);
}

BiLipschitzReport bilipschitz_probe(const NetworkParams& params, const ProcessSpec& spec,
                                    int64_t num_pairs, int64_t k, double delta_in,
                                    RngStream& rng) {
    if (num_pairs < 1) throw ArgumentError("bilipschitz_probe: num_pairs must be >= 1");
    if (!(delta_in > 0.0)) throw ArgumentError("bilipschitz_probe: delta_in must be positive");
    int64_t dim = params.config.input_dim;

    struct Pair {
        PriorDraw x, y;
        Vec anchor;
        double in_dist = 0.0, out_dist = 0.0;
    };
    std::vector<Pair> pairs(num_pairs);
    for (Pair& p : pairs) {
        p.x = draw_prior(spec, dim, rng);
        for (int attempt = 0;; ++attempt) {
            p.y = draw_prior(spec, dim, rng);
            p.in_dist = std::sqrt(squared_distance(p.x.x, p.y.x));
            if (p.in_dist >= delta_in) break;
            if (attempt >= 1000)
                throw NumericError("bilipschitz_probe: cannot separate prior draws");
        }
        p.anchor = rng.normal_vec(dim);
    }

    parallel_blocks(pairs.size(), 16, [&](size_t begin, size_t end) {
        for (size_t i = begin; i < end; ++i) {
            Pair& p = pairs[i];
            Vec ox = refine(params, spec, p.x.x, p.x.pfgm_radius, p.anchor, k);
            Vec oy = refine(params, spec, p.y.x, p.y.pfgm_radius, p.anchor, k);
            p.out_dist = std::sqrt(squared_distance(ox, oy));
        }
    });

    BiLipschitzReport rep;
    rep.pairs_tested = num_pairs;
    bool first = true;
    for (const Pair& p : pairs) {
        double ratio = p.out_dist / p.in_dist;
        if (p.out_dist < 1e-6) rep.collisions += 1;
        if (first) {
            rep.min_ratio = rep.max_ratio = ratio;
            first = false;
        } else {
            rep.min_ratio = std::min(rep.min_ratio, ratio);
            rep.max_ratio = std::max(rep.max_ratio, ratio);
        }
    }
    if (rep.min_ratio > 0.0)
        rep.estimated_L =
            std::max(std::abs(std::log(rep.max_ratio)), std::abs(std::log(rep.min_ratio)));
    else
        rep.estimated_L = std::numeric_limits<double>::infinity();
    return rep;
}

AblationResult conditioning_ablation(const Dataset& ds, const ProcessSpec& spec,
                                     const NetConfig& net_cfg, const TrainConfig& cfg) {
    Split split = holdout_split(ds, 0.2, cfg.seed);

    TrainConfig cfg_with = cfg;
    cfg_with.anchor_mode = AnchorMode::Buffer;
    TrainConfig cfg_without = cfg;
    cfg_without.anchor_mode = AnchorMode::Zero;

    TrainSink quiet;
    TrainState with_anchor = train(split.train, spec, net_cfg, cfg_with, quiet);
    TrainState without_anchor = train(split.train, spec, net_cfg, cfg_without, quiet);

    int64_t n = split.test.count();
    int64_t dim = split.test.dim();
    Vec zero(dim, 0.0);
    std::vector<double> err_with(n), err_without(n);
    parallel_blocks(n, 64, [&](size_t begin, size_t end) {
        for (size_t i = begin; i < end; ++i) {
            RngStream rng(cfg.seed, StreamPurpose::EvalAblation, i);
            Vec x0 = split.test.points.row_vec(i);
            double t = draw_time(spec, rng);
            PerturbedState st = perturb(spec, x0, t, rng);
            double radius = 0.0;
            if (const PfgmAux* aux = std::get_if<PfgmAux>(&st.aux)) radius = aux->radius;
            Preconditioning coeffs = precondition(spec, t, radius);
            Vec anchor0 = rng.normal_vec(dim);

            Vec a1 = g_forward(with_anchor.params, anchor0, st, coeffs);
            Vec a2 = g_forward(with_anchor.params, a1, st, coeffs);
            err_with[i] = squared_distance(a2, x0);
            Vec b = g_forward(without_anchor.params, zero, st, coeffs);
            err_without[i] = squared_distance(b, x0);
        }
    });

    AblationResult res;
    res.eval_points = n;
    double sum_d = 0.0, sum_d2 = 0.0;
    for (int64_t i = 0; i < n; ++i) {
        res.mse_with_anchor += err_with[i];
        res.mse_without_anchor += err_without[i];
        double d = err_with[i] - err_without[i];
        sum_d += d;
        sum_d2 += d * d;
    }
    double nn = static_cast<double>(n);
    res.mse_with_anchor /= nn;
    res.mse_without_anchor /= nn;
    double dmean = sum_d / nn;
    double dvar = std::max(0.0, sum_d2 / nn - dmean * dmean);
    res.se_paired_diff = std::sqrt(dvar / nn);
    return res;
}

}  // namespace iflow
