#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <set>

#include "iflow/config.hpp"
#include "iflow/oracle.hpp"
#include "iflow/persist.hpp"
#include "iflow/report.hpp"

namespace fs = std::filesystem;
using namespace iflow;

namespace {

struct TrainArgs {
    std::string config_path;
    uint64_t seed = 0;
    std::string output_dir;
    int64_t iterations = 0;
    double lr = 0.0;
    bool has_seed = false, has_output_dir = false, has_iterations = false, has_lr = false;
};

int cmd_train(const TrainArgs& args) {
    RunConfig cfg = load_run_config(args.config_path);
    json overrides = json::object();
    if (args.has_seed) {
        cfg.train.seed = args.seed;
        overrides["train.seed"] = args.seed;
    }
    if (args.has_output_dir) {
        cfg.output_dir = args.output_dir;
        overrides["output_dir"] = args.output_dir;
    }
    if (args.has_iterations) {
        cfg.train.iterations = args.iterations;
        overrides["train.iterations"] = args.iterations;
    }
    if (args.has_lr) {
        cfg.train.lr = args.lr;
        overrides["train.lr"] = args.lr;
    }
    cfg.train.validate();

    std::error_code ec;
    fs::create_directories(cfg.output_dir, ec);
    if (ec) throw IoError("train: cannot create output dir '" + cfg.output_dir + "'");
    write_text_file(cfg.output_dir + "/resolved.json",
                    resolved_json(cfg, overrides).dump(2) + "\n");

    Dataset full = build_dataset(cfg.dataset);
    // Same split as `eval` (fraction + dataset seed), so the evaluation side
    // only ever compares against points the model was not trained on.
    Dataset ds = cfg.eval.holdout_fraction > 0.0
                     ? holdout_split(full, cfg.eval.holdout_fraction, cfg.dataset.seed).train
                     : std::move(full);
    TrainState state = init_train_state(ds, cfg.process, cfg.net, cfg.train);
    MetricsWriter metrics(cfg.output_dir + "/metrics.csv");
    TrainSink sink;
    sink.on_metrics = [&](int64_t step, double loss, double ema) {
        metrics.row(step, loss, ema);
    };
    sink.on_checkpoint = [&](const TrainState& s, bool is_final) {
        std::string name = is_final ? "final.ifck" : "step_" + std::to_string(s.step) + ".ifck";
        save_checkpoint(s, cfg.output_dir + "/" + name);
    };
    train_from(state, ds, sink);
    std::cout << "trained " << state.step << " steps -> " << cfg.output_dir << "/final.ifck\n";
    return 0;
}

struct SampleArgs {
    std::string checkpoint;
    int64_t count = 16;
    int64_t steps = 1;
    uint64_t seed = 0;
    bool ema = true;
    std::string out = "samples.csv";
    std::string process;  // optional cross-check against the checkpoint
};

int cmd_sample(const SampleArgs& args) {
    TrainState state = load_checkpoint(args.checkpoint);
    if (!args.process.empty() && process_from_name(args.process) != state.spec.kind)
        throw ConfigError("sample: process mismatch: checkpoint is '" +
                          std::string(process_name(state.spec.kind)) + "', flags say '" +
                          args.process + "'");
    SampleRequest req;
    req.count = args.count;
    req.steps = args.steps;
    req.use_ema = args.ema;
    req.seed = args.seed;
    Matrix samples = sample(state, req);
    write_samples_csv(args.out, samples);
    if (samples.cols == 2) {
        fs::path svg = fs::path(args.out).parent_path() / "samples.svg";
        write_samples_svg(svg.string(), samples);
    }
    std::cout << "wrote " << samples.rows << " samples -> " << args.out << "\n";
    return 0;
}

struct EvalArgs {
    std::string checkpoint;
    std::string config_path;
    std::vector<std::string> metrics;
    std::string out = "eval.csv";
};

int cmd_eval(const EvalArgs& args) {
    TrainState state = load_checkpoint(args.checkpoint);
    RunConfig cfg = load_run_config(args.config_path);
    if (cfg.process.kind != state.spec.kind)
        throw ConfigError("eval: process mismatch: checkpoint is '" +
                          std::string(process_name(state.spec.kind)) + "', config says '" +
                          std::string(process_name(cfg.process.kind)) + "'");

    std::vector<std::string> metrics =
        !args.metrics.empty() ? args.metrics : cfg.eval.metrics;
    if (metrics.empty()) metrics = {"energy_distance"};
    const std::set<std::string> valid = {"energy_distance", "straightness", "bilipschitz",
                                         "conditioning_ablation"};
    for (const auto& m : metrics)
        if (!valid.count(m))
            throw ConfigError("eval: unknown metric '" + m +
                              "' (valid: energy_distance, straightness, bilipschitz, "
                              "conditioning_ablation)");

    const EvalConfig& ec = cfg.eval;
    const NetworkParams& net = ec.use_ema ? state.ema_params : state.params;
    std::vector<EvalRow> rows;
    for (const auto& m : metrics) {
        if (m == "energy_distance") {
            Dataset ds = build_dataset(cfg.dataset);
            Split split = holdout_split(ds, ec.holdout_fraction, cfg.dataset.seed);
            SampleRequest req{ec.count, ec.steps, ec.use_ema, ec.seed};
            Matrix samples = sample(state, req);
            rows.push_back({"energy_distance",
                            energy_distance(samples, split.test.points, 10000, ec.seed)});
        } else if (m == "straightness") {
            rows.push_back({"straightness",
                            mean_straightness(net, state.spec, ec.trace_count, ec.num_times,
                                              ec.seed, ec.steps)});
        } else if (m == "bilipschitz") {
            RngStream rng(ec.seed, StreamPurpose::EvalPairs);
            BiLipschitzReport rep = bilipschitz_probe(net, state.spec, ec.num_pairs,
                                                      ec.steps, ec.delta_in, rng);
            rows.push_back({"bilipschitz_min_ratio", rep.min_ratio});
            rows.push_back({"bilipschitz_max_ratio", rep.max_ratio});
            rows.push_back({"bilipschitz_estimated_L", rep.estimated_L});
            rows.push_back({"bilipschitz_collisions", static_cast<double>(rep.collisions)});
        } else if (m == "conditioning_ablation") {
            Dataset ds = build_dataset(cfg.dataset);
            AblationResult ab = conditioning_ablation(ds, cfg.process, cfg.net, cfg.train);
            rows.push_back({"ablation_mse_with_anchor", ab.mse_with_anchor});
            rows.push_back({"ablation_mse_without_anchor", ab.mse_without_anchor});
            rows.push_back({"ablation_se_paired_diff", ab.se_paired_diff});
        }
    }
    write_eval_csv(args.out, rows, config_hash(run_config_json(cfg)), ec.seed);
    std::cout << "wrote " << rows.size() << " metric rows -> " << args.out << "\n";
    return 0;
}

struct TraceArgs {
    std::string checkpoint;
    std::string out = "trajectory.csv";
    uint64_t seed = 0;
    int64_t num_times = 16;
    int64_t steps = 1;
    uint64_t index = 0;
    bool ema = true;
};

int cmd_trace(const TraceArgs& args) {
    TrainState state = load_checkpoint(args.checkpoint);
    const NetworkParams& net = args.ema ? state.ema_params : state.params;
    RngStream rng(args.seed, StreamPurpose::Sample, args.index);
    PriorDraw prior = draw_prior(state.spec, net.config.input_dim, rng);
    Trajectory traj =
        trace(net, state.spec, prior.x, args.seed, args.num_times, args.steps, args.index);
    write_trajectory_csv(args.out, traj);
    std::cout << "wrote " << traj.times.size() << " trajectory rows -> " << args.out << "\n";
    return 0;
}

struct OracleCompareArgs {
    std::string config_path;
    std::string checkpoint;
    std::vector<int64_t> steps = {1, 10, 100};
    std::string out = "oracle_compare.csv";
};

int cmd_oracle_compare(const OracleCompareArgs& args) {
    RunConfig cfg = load_run_config(args.config_path);
    TrainState state = load_checkpoint(args.checkpoint);

    MixtureSpec mix;
    if (cfg.dataset.name == DatasetName::Gaussian) {
        mix.weights = {1.0};
        mix.means = {Vec(cfg.dataset.dim(), 0.0)};
        mix.scales = {cfg.dataset.params.scale};
    } else if (cfg.dataset.name == DatasetName::GmmRing) {
        mix = gmm_ring_mixture(cfg.dataset.params.k, cfg.dataset.params.radius,
                               cfg.dataset.params.scale);
    } else {
        throw ConfigError("oracle-compare: dataset '" +
                          std::string(dataset_name_str(cfg.dataset.name)) +
                          "' has no analytic score; use gaussian or gmm_ring");
    }

    Dataset ds = build_dataset(cfg.dataset);
    Split split = holdout_split(ds, cfg.eval.holdout_fraction, cfg.dataset.seed);
    const EvalConfig& ec = cfg.eval;
    int64_t dim = cfg.dataset.dim();

    // The analytic mixture lives in raw coordinates. When the dataset is
    // standardized, push the oracle's samples through the same affine map the
    // dataset applied so both sides of the energy distance share a frame.
    ColumnStats stats;
    if (cfg.dataset.params.standardize) {
        DatasetConfig raw_cfg = cfg.dataset;
        raw_cfg.params.standardize = false;
        stats = column_stats(build_dataset(raw_cfg).points);
    }

    ProcessSpec ve;
    ve.kind = ProcessKind::VE;
    ve.T = state.spec.T;
    ve.sigma_min = state.spec.sigma_min;
    ve.sigma_max = state.spec.sigma_max;

    std::vector<OracleCompareRow> rows;
    for (int64_t n : args.steps) {
        if (n < 1) throw ArgumentError("oracle-compare: step counts must be >= 1");
        Matrix euler(ec.count, dim);
        parallel_blocks(ec.count, 16, [&](size_t begin, size_t end) {
            for (size_t i = begin; i < end; ++i) {
                RngStream rng(ec.seed, StreamPurpose::OracleMc, i);
                Vec x_T = rng.normal_vec(dim);
                for (double& v : x_T) v *= ve.sigma_max;
                Vec x0 = euler_pf_ode(mix, x_T, ve, n);
                if (cfg.dataset.params.standardize)
                    for (int64_t j = 0; j < dim; ++j)
                        x0[j] = (x0[j] - stats.mean[j]) / stats.sd[j];
                euler.set_row(i, x0);
            }
        });
        rows.push_back({"euler", n, "energy_distance",
                        energy_distance(euler, split.test.points, 10000, ec.seed)});
    }
    for (int64_t k : {int64_t{1}, int64_t{2}}) {
        SampleRequest req{ec.count, k, ec.use_ema, ec.seed};
        Matrix samples = sample(state, req);
        rows.push_back({"model", k, "energy_distance",
                        energy_distance(samples, split.test.points, 10000, ec.seed)});
    }
    write_oracle_compare_csv(args.out, rows);
    std::cout << "wrote " << rows.size() << " comparison rows -> " << args.out << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"integration-flow trainer/sampler"};
    app.require_subcommand(1);

    TrainArgs ta;
    CLI::App* train_cmd = app.add_subcommand("train", "train a model from a JSON config");
    train_cmd->add_option("--config", ta.config_path, "run config JSON")->required();
    auto* opt_seed = train_cmd->add_option("--seed", ta.seed, "override train.seed");
    auto* opt_odir = train_cmd->add_option("--output-dir", ta.output_dir, "override output_dir");
    auto* opt_iter = train_cmd->add_option("--iterations", ta.iterations, "override train.iterations");
    auto* opt_lr = train_cmd->add_option("--lr", ta.lr, "override train.lr");

    SampleArgs sa;
    CLI::App* sample_cmd = app.add_subcommand("sample", "draw samples from a checkpoint");
    sample_cmd->add_option("--checkpoint", sa.checkpoint, "checkpoint path")->required();
    sample_cmd->add_option("--count", sa.count, "number of samples");
    sample_cmd->add_option("--steps", sa.steps, "refinement steps k");
    sample_cmd->add_option("--seed", sa.seed, "sampling seed");
    sample_cmd->add_flag("--ema,!--no-ema", sa.ema, "use EMA weights (default on)");
    sample_cmd->add_option("--out", sa.out, "output CSV path");
    sample_cmd->add_option("--process", sa.process, "expected process (cross-check)");

    EvalArgs ea;
    CLI::App* eval_cmd = app.add_subcommand("eval", "run evaluation metrics");
    eval_cmd->add_option("--checkpoint", ea.checkpoint, "checkpoint path")->required();
    eval_cmd->add_option("--config", ea.config_path, "run config JSON")->required();
    eval_cmd->add_option("--metrics", ea.metrics, "metric names")->delimiter(',');
    eval_cmd->add_option("--out", ea.out, "output CSV path");

    TraceArgs tra;
    CLI::App* trace_cmd = app.add_subcommand("trace", "record one rf trajectory");
    trace_cmd->add_option("--checkpoint", tra.checkpoint, "checkpoint path")->required();
    trace_cmd->add_option("--out", tra.out, "output CSV path");
    trace_cmd->add_option("--seed", tra.seed, "prior/anchor seed");
    trace_cmd->add_option("--num-times", tra.num_times, "grid size");
    trace_cmd->add_option("--steps", tra.steps, "refinement steps for the endpoint");
    trace_cmd->add_option("--index", tra.index, "trace index within the seed");
    trace_cmd->add_flag("--ema,!--no-ema", tra.ema, "use EMA weights (default on)");

    OracleCompareArgs oa;
    CLI::App* oc_cmd = app.add_subcommand("oracle-compare",
                                          "model vs Euler PF-ODE on an analytic dataset");
    oc_cmd->add_option("--config", oa.config_path, "run config JSON")->required();
    oc_cmd->add_option("--checkpoint", oa.checkpoint, "checkpoint path")->required();
    oc_cmd->add_option("--steps", oa.steps, "Euler step counts")->delimiter(',');
    oc_cmd->add_option("--out", oa.out, "output CSV path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*train_cmd) {
            ta.has_seed = opt_seed->count() > 0;
            ta.has_output_dir = opt_odir->count() > 0;
            ta.has_iterations = opt_iter->count() > 0;
            ta.has_lr = opt_lr->count() > 0;
            return cmd_train(ta);
        }
        if (*sample_cmd) return cmd_sample(sa);
        if (*eval_cmd) return cmd_eval(ea);
        if (*trace_cmd) return cmd_trace(tra);
        if (*oc_cmd) return cmd_oracle_compare(oa);
    } catch (const ArgumentError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const NumericError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
