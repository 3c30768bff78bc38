#include "vime/experiment.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "vime/envs.hpp"
#include "vime/updaters.hpp"

namespace fs = std::filesystem;

namespace vime {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

namespace {

Vec evaluate_episode_returns(const GaussianPolicy& policy, const Env& env, int n_episodes,
                             Rng& rng) {
    Vec returns(n_episodes, 0.0);
    for (int ep = 0; ep < n_episodes; ++ep) {
        Vec state = env.reset(rng);
        for (int t = 0; t < env.spec().horizon; ++t) {
            auto [action, lp] = sample_action(policy, state, rng);
            (void)lp;
            StepResult res = env.step(state, action);
            returns[ep] += res.reward;
            state = res.next_state;
            if (res.done) break;
        }
    }
    return returns;
}

BaselineKind baseline_kind(const std::string& name) {
    if (name == "net") return BaselineKind::net;
    if (name == "linear") return BaselineKind::linear;
    throw std::invalid_argument("unknown baseline kind: " + name);
}

}  // namespace

SeedResult run_single_seed(const RunConfig& cfg, std::uint64_t seed) {
    SeedResult result;
    result.seed = seed;
    try {
        auto env = make_env(cfg.env, cfg.horizon);
        int sdim = env->spec().state_dim;
        int adim = env->spec().action_dim;

        Rng policy_rng = make_rng(seed, 1);
        Rng rollout_rng = make_rng(seed, 2);
        Rng baseline_rng = make_rng(seed, 3);

        GaussianPolicy policy = make_policy(sdim, adim, cfg.policy_hidden, policy_rng);
        Baseline baseline(baseline_kind(cfg.baseline), sdim, baseline_rng);
        AdamState policy_adam(policy.param_count(), cfg.policy_learning_rate);
        TrustRegionOptions tr_opts;
        tr_opts.kl_step = cfg.kl_step;

        std::optional<VimeEngine> engine;
        if (cfg.vime_enabled) engine.emplace(cfg.vime_config(), sdim, adim, seed);

        bool use_trpo = cfg.algorithm == "trpo-lite";
        if (!use_trpo && cfg.algorithm != "reinforce")
            throw std::invalid_argument("unknown algorithm: " + cfg.algorithm);

        UpdateReport last_report;
        auto update_policy = [&](std::vector<Trajectory>& trajs) {
            if (use_trpo)
                last_report = trust_region_update(policy, trajs, baseline, cfg.gamma, cfg.horizon,
                                                  tr_opts);
            else
                last_report =
                    reinforce_update(policy, trajs, baseline, cfg.gamma, cfg.horizon, policy_adam);
            // keep the exploration noise from inflating past usefulness
            for (double& l : policy.log_std) l = std::min(l, cfg.max_policy_log_std);
        };

        for (int epoch = 0; epoch < cfg.n_epochs; ++epoch) {
            std::vector<Trajectory> trajs =
                collect_batch(policy, *env, cfg.batch_timesteps, cfg.horizon, rollout_rng);

            EpochRow row;
            row.epoch = epoch;
            if (engine) {
                EpochDiagnostics diag = engine->epoch_update(trajs, update_policy);
                row.raw_kl_median = diag.raw_kl_median;
                row.raw_kl_mean = diag.raw_kl_mean;
                row.raw_kl_max = diag.raw_kl_max;
                row.kl_divisor = diag.kl_divisor;
                row.pool_size = diag.pool_size;
                row.bnn_trained = diag.bnn_trained ? 1 : 0;
                row.train_return_mean = diag.train_return_mean;
                row.train_return_median = diag.train_return_median;
            } else {
                for (Trajectory& t : trajs) t.shaped_rewards = t.external_rewards;
                update_policy(trajs);
                Vec returns;
                for (const Trajectory& t : trajs) returns.push_back(undiscounted_return(t));
                row.train_return_mean = mean(returns);
                row.train_return_median = median(returns);
            }
            row.policy_step_accepted = last_report.accepted ? 1 : 0;
            row.policy_step_kl = last_report.measured_kl;

            Rng eval_rng = make_rng(seed, 0xe7a10000ULL + static_cast<std::uint64_t>(epoch));
            Vec eval_returns = evaluate_episode_returns(policy, *env, cfg.eval_episodes, eval_rng);
            row.eval_return_mean = mean(eval_returns);
            row.eval_return_median = median(eval_returns);

            if (cfg.log_states)
                for (const Trajectory& t : trajs)
                    result.visited_states.insert(result.visited_states.end(), t.states.begin(),
                                                 t.states.end());
            result.rows.push_back(row);
        }
    } catch (const std::exception& e) {
        result.failed = true;
        result.error = e.what();
    }
    return result;
}

namespace {

const char* kSeedHeader =
    "epoch,train_return_mean,train_return_median,eval_return_mean,eval_return_median,"
    "raw_kl_median,raw_kl_mean,raw_kl_max,kl_divisor,pool_size,bnn_trained,"
    "policy_step_accepted,policy_step_kl";

void write_seed_csv(const std::string& path, const SeedResult& r) {
    std::ofstream out(path);
    out << kSeedHeader << '\n';
    for (const EpochRow& row : r.rows) {
        out << row.epoch << ',' << format_double(row.train_return_mean) << ','
            << format_double(row.train_return_median) << ',' << format_double(row.eval_return_mean)
            << ',' << format_double(row.eval_return_median) << ','
            << format_double(row.raw_kl_median) << ',' << format_double(row.raw_kl_mean) << ','
            << format_double(row.raw_kl_max) << ',' << format_double(row.kl_divisor) << ','
            << row.pool_size << ',' << row.bnn_trained << ',' << row.policy_step_accepted << ','
            << format_double(row.policy_step_kl) << '\n';
    }
}

void write_states_csv(const std::string& path, const std::vector<Vec>& states) {
    std::ofstream out(path);
    for (const Vec& s : states) {
        for (std::size_t j = 0; j < s.size(); ++j) {
            if (j) out << ',';
            out << format_double(s[j]);
        }
        out << '\n';
    }
}

// Aggregated curve: iteration, one column per seed, then median and quartiles.
void write_curve_csv(const std::string& path, const std::vector<SeedResult>& seeds, int n_epochs,
                     double (*pick)(const EpochRow&)) {
    std::ofstream out(path);
    out << "iteration";
    for (const SeedResult& s : seeds) out << ",seed_" << s.seed;
    out << ",median,q25,q75\n";
    if (seeds.empty()) return;
    for (int e = 0; e < n_epochs; ++e) {
        Vec vals;
        out << e;
        for (const SeedResult& s : seeds) {
            double v = pick(s.rows[e]);
            vals.push_back(v);
            out << ',' << format_double(v);
        }
        out << ',' << format_double(median(vals)) << ',' << format_double(quantile(vals, 0.25))
            << ',' << format_double(quantile(vals, 0.75)) << '\n';
    }
}

double pick_train_mean(const EpochRow& r) { return r.train_return_mean; }
double pick_eval_mean(const EpochRow& r) { return r.eval_return_mean; }

}  // namespace

ExperimentSummary run_experiment(const RunConfig& cfg) {
    fs::create_directories(cfg.output_dir);
    {
        std::ofstream manifest(cfg.output_dir + "/manifest.json");
        manifest << config_to_json(cfg);
    }

    ExperimentSummary summary;
    summary.seeds.resize(cfg.seeds.size());

    unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    std::size_t max_threads = cfg.threads > 0 ? static_cast<std::size_t>(cfg.threads)
                                              : static_cast<std::size_t>(hw);
    std::size_t next = 0;
    while (next < cfg.seeds.size()) {
        std::size_t batch = std::min(max_threads, cfg.seeds.size() - next);
        std::vector<std::thread> workers;
        for (std::size_t k = 0; k < batch; ++k) {
            std::size_t idx = next + k;
            workers.emplace_back(
                [&, idx] { summary.seeds[idx] = run_single_seed(cfg, cfg.seeds[idx]); });
        }
        for (auto& w : workers) w.join();
        next += batch;
    }

    std::vector<SeedResult> completed;
    for (const SeedResult& r : summary.seeds) {
        if (r.failed) {
            summary.failed_seeds += 1;
            std::fprintf(stderr, "seed %llu failed: %s\n",
                         static_cast<unsigned long long>(r.seed), r.error.c_str());
            continue;
        }
        completed.push_back(r);
    }

    for (const SeedResult& r : summary.seeds) {
        if (r.failed) continue;
        write_seed_csv(cfg.output_dir + "/seed_" + std::to_string(r.seed) + ".csv", r);
        if (cfg.log_states)
            write_states_csv(cfg.output_dir + "/states_seed_" + std::to_string(r.seed) + ".csv",
                             r.visited_states);
    }

    write_curve_csv(cfg.output_dir + "/curve_train.csv", completed, cfg.n_epochs, pick_train_mean);
    write_curve_csv(cfg.output_dir + "/curve_eval.csv", completed, cfg.n_epochs, pick_eval_mean);

    if (!completed.empty() && cfg.n_epochs > 0) {
        Vec train_medians, eval_medians;
        for (int e = 0; e < cfg.n_epochs; ++e) {
            Vec tv, ev;
            for (const SeedResult& s : completed) {
                tv.push_back(s.rows[e].train_return_mean);
                ev.push_back(s.rows[e].eval_return_mean);
            }
            train_medians.push_back(median(tv));
            eval_medians.push_back(median(ev));
        }
        summary.train_median_curve_avg = mean(train_medians);
        summary.eval_median_curve_avg = mean(eval_medians);
        summary.final_train_median = train_medians.back();
        summary.final_eval_median = eval_medians.back();
    }

    std::ofstream sum(cfg.output_dir + "/summary.csv");
    sum << "train_median_curve_avg,eval_median_curve_avg,final_train_median,final_eval_median,"
           "failed_seeds\n";
    sum << format_double(summary.train_median_curve_avg) << ','
        << format_double(summary.eval_median_curve_avg) << ','
        << format_double(summary.final_train_median) << ','
        << format_double(summary.final_eval_median) << ',' << summary.failed_seeds << '\n';
    return summary;
}

std::vector<SweepCell> sweep_eta(const RunConfig& base, const std::vector<double>& etas) {
    if (etas.empty()) throw std::invalid_argument("sweep_eta: empty eta list");
    fs::create_directories(base.output_dir);
    std::vector<SweepCell> cells;
    for (double eta : etas) {
        RunConfig cfg = base;  // shared seeds: paired comparison
        cfg.eta = eta;
        char sub[64];
        std::snprintf(sub, sizeof(sub), "eta_%g", eta);
        cfg.output_dir = base.output_dir + "/" + sub;
        cells.push_back({eta, run_experiment(cfg)});
    }
    std::ofstream out(base.output_dir + "/sweep_summary.csv");
    out << "eta,train_median_curve_avg,eval_median_curve_avg,final_train_median,final_eval_median\n";
    for (const SweepCell& c : cells) {
        out << format_double(c.eta) << ',' << format_double(c.summary.train_median_curve_avg) << ','
            << format_double(c.summary.eval_median_curve_avg) << ','
            << format_double(c.summary.final_train_median) << ','
            << format_double(c.summary.final_eval_median) << '\n';
    }
    return cells;
}

// ---------------------------------------------------------------------------
// BNN regression demo

namespace {

Vec quartic_features(double x) { return {x, x * x, x * x * x, x * x * x * x}; }

double trailing_median(const Vec& values, std::size_t end, std::size_t window) {
    std::size_t start = end > window ? end - window : 0;
    Vec tail(values.begin() + start, values.begin() + end);
    return median(tail);
}

}  // namespace

BnnDemoResult bnn_demo(const BnnDemoConfig& cfg) {
    fs::create_directories(cfg.output_dir);
    NetArch arch{{4, 32, 1}, Activation::relu};
    BnnPrior prior = make_prior(arch, cfg.prior_sigma, splitmix64(cfg.seed) ^ 0xa11ce);
    VariationalPosterior q = make_posterior(arch, prior);
    AdamState adam(2 * q.param_count() + 1, cfg.learning_rate);

    Rng data_rng = make_rng(cfg.seed, 10);
    Rng train_rng = make_rng(cfg.seed, 11);

    ReplayPool pool(1000000, 0);
    for (int i = 0; i < cfg.n_train; ++i) {
        double x = uniform(data_rng, -1.0, 1.0);
        double y = std::sin(2.0 * x) + cfg.noise_std * normal(data_rng);
        pool.add({quartic_features(x), {}, {y}});
    }

    BnnDemoResult result;
    result.kl_trace.reserve(cfg.iterations);
    Vec prev_mu = q.mu;
    Vec prev_sigma = q.sigma();

    std::ofstream trace(cfg.output_dir + "/kl_trace.csv");
    trace << "iteration,kl,injected\n";

    bool injected = false;
    for (int it = 0; it < cfg.iterations; ++it) {
        if (cfg.inject && it == cfg.inject_at) {
            for (int i = 0; i < cfg.n_inject; ++i) {
                double x = uniform(data_rng, cfg.inject_lo, cfg.inject_hi);
                double y = std::sin(2.0 * x) + cfg.noise_std * normal(data_rng);
                pool.add({quartic_features(x), {}, {y}});
            }
            injected = true;
        }
        train_elbo(q, prior, pool, 1, cfg.batch_size, adam, cfg.n_samples, train_rng);
        double kl = kl_factorized(q.mu, q.sigma(), prev_mu, prev_sigma);
        result.kl_trace.push_back(kl);
        prev_mu = q.mu;
        prev_sigma = q.sigma();
        trace << it << ',' << format_double(kl) << ',' << (injected && it >= cfg.inject_at ? 1 : 0)
              << '\n';
    }

    if (cfg.inject && cfg.inject_at < cfg.iterations) {
        double med = trailing_median(result.kl_trace, cfg.inject_at, 100);
        result.spike_ratio = result.kl_trace[cfg.inject_at] / med;
    } else {
        double worst = 0.0;
        for (std::size_t i = cfg.burn_in; i < result.kl_trace.size(); ++i) {
            double med = trailing_median(result.kl_trace, i, 100);
            if (med > 0.0) worst = std::max(worst, result.kl_trace[i] / med);
        }
        result.control_max_ratio = worst;
    }

    // predictive bands over the grid
    Rng pred_rng = make_rng(cfg.seed, 12);
    std::ofstream bands(cfg.output_dir + "/predictive.csv");
    bands << "x,mean,std\n";
    double inside_sum = 0.0, outside_sum = 0.0;
    int inside_n = 0, outside_n = 0;
    for (int gi = 0; gi < cfg.grid_points; ++gi) {
        double x = cfg.grid_lo + (cfg.grid_hi - cfg.grid_lo) * gi / (cfg.grid_points - 1);
        auto draws = sample_predict(q, quartic_features(x), {}, cfg.predictive_samples, pred_rng);
        Vec outs;
        for (const Vec& d : draws) outs.push_back(d[0]);
        double mu = mean(outs);
        double sd = stddev(outs);
        bands << format_double(x) << ',' << format_double(mu) << ',' << format_double(sd) << '\n';
        if (std::abs(x) <= 1.0) {
            inside_sum += sd;
            inside_n += 1;
        } else {
            outside_sum += sd;
            outside_n += 1;
        }
    }
    result.inside_std = inside_sum / inside_n;
    result.outside_std = outside_sum / outside_n;
    return result;
}

// ---------------------------------------------------------------------------

std::vector<Vec> read_state_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open state log: " + path);
    std::vector<Vec> states;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        Vec row;
        std::stringstream ss(line);
        std::string tok;
        while (std::getline(ss, tok, ',')) row.push_back(std::stod(tok));
        states.push_back(std::move(row));
    }
    return states;
}

void export_visitation(const std::vector<std::string>& state_files, int dim_i, int dim_j, int bins,
                       const std::array<double, 4>& bounds, const std::string& out_path) {
    std::vector<Vec> states;
    for (const std::string& f : state_files) {
        std::vector<Vec> s = read_state_csv(f);
        states.insert(states.end(), s.begin(), s.end());
    }
    Mat grid = visitation_grid(states, dim_i, dim_j, bins, bounds);
    std::ofstream out(out_path);
    for (std::size_t i = 0; i < grid.rows; ++i) {
        for (std::size_t j = 0; j < grid.cols; ++j) {
            if (j) out << ',';
            out << grid(i, j);
        }
        out << '\n';
    }
}

}  // namespace vime
