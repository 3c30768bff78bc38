// Command-line harness: seeded training runs, the regression demo, eta
// sweeps, and visitation-grid export. Flags override config-file values.

#include <cstdio>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "vime/experiment.hpp"

namespace {

struct StringOverride {
    std::string key;
    std::string value;
};

void add_run_flags(CLI::App* cmd, std::vector<StringOverride>& overrides,
                   std::string& config_path) {
    cmd->add_option("--config", config_path, "flat key = value config file");
    // every RunConfig key is addressable as --set key=value; common ones get
    // dedicated flags below
    auto addkv = [cmd, &overrides](const std::string& flag, const std::string& key,
                                   const std::string& help) {
        cmd->add_option_function<std::string>(
            flag, [&overrides, key](const std::string& v) { overrides.push_back({key, v}); }, help);
    };
    addkv("--env", "env", "environment name (sparse-mountaincar, sparse-cartpole-swingup, chain-N)");
    addkv("--algo", "algorithm", "reinforce | trpo-lite");
    addkv("--eta", "eta", "intrinsic reward weight");
    addkv("--seeds", "seeds", "comma-separated seed list");
    addkv("--epochs", "n_epochs", "training epochs");
    addkv("--batch-timesteps", "batch_timesteps", "timesteps collected per epoch");
    addkv("--horizon", "horizon", "episode horizon");
    addkv("--gamma", "gamma", "discount factor");
    addkv("--policy-lr", "policy_learning_rate", "REINFORCE Adam learning rate");
    addkv("--kl-step", "kl_step", "trust-region KL radius");
    addkv("--baseline", "baseline", "net | linear");
    addkv("--eval-episodes", "eval_episodes", "evaluation episodes per epoch");
    addkv("--vime", "vime_enabled", "true | false");
    addkv("--lambda", "lambda", "second-order step scale");
    addkv("--mode", "intrinsic_mode", "approx | exact | refit");
    addkv("--direction", "kl_direction", "forward | reversed");
    addkv("--window", "window_length", "KL normalizer window length");
    addkv("--pool-capacity", "pool_capacity", "replay pool capacity");
    addkv("--pool-min", "pool_min_size", "replay pool warmup size");
    addkv("--bnn-hidden", "bnn_hidden", "BNN hidden units");
    addkv("--bnn-iters", "bnn_iterations", "BNN Adam iterations per epoch");
    addkv("--bnn-batch", "bnn_batch_size", "BNN minibatch size");
    addkv("--bnn-lr", "bnn_learning_rate", "BNN Adam learning rate");
    addkv("--bnn-samples", "bnn_samples", "posterior samples per objective");
    addkv("--prior-sigma", "prior_sigma", "prior weight std");
    addkv("--out", "output_dir", "output directory");
    addkv("--log-states", "log_states", "record visited states (true | false)");
    addkv("--threads", "threads", "concurrent seed jobs (0 = auto)");
    cmd->add_option_function<std::vector<std::string>>(
        "--set",
        [&overrides](const std::vector<std::string>& kvs) {
            for (const std::string& kv : kvs) {
                auto eq = kv.find('=');
                if (eq == std::string::npos) throw CLI::ValidationError("--set expects key=value");
                overrides.push_back({kv.substr(0, eq), kv.substr(eq + 1)});
            }
        },
        "extra key=value overrides");
}

vime::RunConfig build_config(const std::string& config_path,
                             const std::vector<StringOverride>& overrides) {
    vime::RunConfig cfg;
    if (!config_path.empty()) cfg = vime::load_config_file(config_path);
    for (const StringOverride& o : overrides) vime::apply_config_line(cfg, o.key, o.value);
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"VIME: curiosity-driven exploration with a Bayesian dynamics model"};
    app.require_subcommand(1);

    std::string config_path;
    std::vector<StringOverride> overrides;

    CLI::App* train = app.add_subcommand("train", "run seeded training and write learning curves");
    add_run_flags(train, overrides, config_path);

    CLI::App* sweep = app.add_subcommand("sweep-eta", "paired-seed sweep over eta values");
    std::string etas_csv = "0,0.0001,0.01,1,100";
    add_run_flags(sweep, overrides, config_path);
    sweep->add_option("--etas", etas_csv, "comma-separated eta values");

    CLI::App* demo = app.add_subcommand("bnn-demo", "1-D regression demo with data injection");
    vime::BnnDemoConfig demo_cfg;
    std::uint64_t demo_seed = 0;
    bool no_inject = false;
    demo->add_option("--seed", demo_seed, "rng seed");
    demo->add_option("--iters", demo_cfg.iterations, "training iterations");
    demo->add_option("--inject-at", demo_cfg.inject_at, "injection iteration");
    demo->add_flag("--no-inject", no_inject, "disable injection (control run)");
    demo->add_option("--bnn-lr", demo_cfg.learning_rate, "Adam learning rate");
    demo->add_option("--n-train", demo_cfg.n_train, "training points");
    demo->add_option("--n-inject", demo_cfg.n_inject, "injected points");
    demo->add_option("--batch", demo_cfg.batch_size, "minibatch size");
    demo->add_option("--out", demo_cfg.output_dir, "output directory");

    CLI::App* vis = app.add_subcommand("export-visitation", "histogram logged states into a grid");
    std::vector<std::string> state_files;
    int dim_i = 0, dim_j = 1, bins = 20;
    std::vector<double> bounds = {-1.2, 0.6, -0.07, 0.07};
    std::string vis_out = "visitation.csv";
    vis->add_option("--states", state_files, "state log CSVs")->required();
    vis->add_option("--dim-i", dim_i, "first state dimension");
    vis->add_option("--dim-j", dim_j, "second state dimension");
    vis->add_option("--bins", bins, "grid resolution");
    vis->add_option("--bounds", bounds, "xlo xhi ylo yhi")->expected(4);
    vis->add_option("--out", vis_out, "output CSV");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*train) {
            vime::RunConfig cfg = build_config(config_path, overrides);
            vime::ExperimentSummary s = vime::run_experiment(cfg);
            std::printf("train: median-curve average %.6g (train) %.6g (eval), final eval median %.6g\n",
                        s.train_median_curve_avg, s.eval_median_curve_avg, s.final_eval_median);
            return s.failed_seeds == 0 ? 0 : 1;
        }
        if (*sweep) {
            vime::RunConfig cfg = build_config(config_path, overrides);
            auto cells = vime::sweep_eta(cfg, vime::parse_double_list(etas_csv));
            int failed = 0;
            for (const auto& c : cells) {
                std::printf("eta %-10g final eval median %.6g  curve avg %.6g\n", c.eta,
                            c.summary.final_eval_median, c.summary.eval_median_curve_avg);
                failed += c.summary.failed_seeds;
            }
            return failed == 0 ? 0 : 1;
        }
        if (*demo) {
            demo_cfg.seed = demo_seed;
            demo_cfg.inject = !no_inject;
            vime::BnnDemoResult r = vime::bnn_demo(demo_cfg);
            if (demo_cfg.inject)
                std::printf("bnn-demo: spike ratio %.3g, predictive std inside %.4g outside %.4g\n",
                            r.spike_ratio, r.inside_std, r.outside_std);
            else
                std::printf("bnn-demo (control): max ratio %.3g, predictive std inside %.4g outside %.4g\n",
                            r.control_max_ratio, r.inside_std, r.outside_std);
            return 0;
        }
        if (*vis) {
            vime::export_visitation(state_files, dim_i, dim_j, bins,
                                    {bounds[0], bounds[1], bounds[2], bounds[3]}, vis_out);
            return 0;
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
