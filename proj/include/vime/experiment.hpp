#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "vime/run_config.hpp"

namespace vime {

struct EpochRow {
    int epoch = 0;
    double train_return_mean = 0.0;
    double train_return_median = 0.0;
    double eval_return_mean = 0.0;
    double eval_return_median = 0.0;
    double raw_kl_median = 0.0;
    double raw_kl_mean = 0.0;
    double raw_kl_max = 0.0;
    double kl_divisor = 1.0;
    std::size_t pool_size = 0;
    int bnn_trained = 0;
    int policy_step_accepted = 0;
    double policy_step_kl = 0.0;
};

struct SeedResult {
    std::uint64_t seed = 0;
    std::vector<EpochRow> rows;
    std::vector<Vec> visited_states;  // filled when log_states is on
    bool failed = false;
    std::string error;
};

SeedResult run_single_seed(const RunConfig& cfg, std::uint64_t seed);

struct ExperimentSummary {
    std::vector<SeedResult> seeds;
    double train_median_curve_avg = 0.0;  // all-iteration average of the median curve
    double eval_median_curve_avg = 0.0;
    double final_train_median = 0.0;
    double final_eval_median = 0.0;
    int failed_seeds = 0;
};

// Runs every seed (concurrently), writes per-seed CSVs, aggregated curves,
// the manifest, and the summary into cfg.output_dir.
ExperimentSummary run_experiment(const RunConfig& cfg);

struct SweepCell {
    double eta;
    ExperimentSummary summary;
};

// run_experiment per eta with shared seeds; writes a comparison table.
std::vector<SweepCell> sweep_eta(const RunConfig& base, const std::vector<double>& etas);

// ---------------------------------------------------------------------------
// 1-D regression demo: quartic-feature inputs, out-of-range data injection,
// per-iteration posterior-shift trace and predictive-band snapshot.

struct BnnDemoConfig {
    std::uint64_t seed = 0;
    int iterations = 16000;
    int inject_at = 10000;
    bool inject = true;
    int n_train = 400;
    int n_inject = 100;
    double noise_std = 0.05;
    double inject_lo = 1.5;
    double inject_hi = 2.0;
    int batch_size = 10;
    int n_samples = 10;
    double learning_rate = 3e-4;
    double prior_sigma = 0.9740769841801067;
    int burn_in = 500;
    int grid_points = 101;
    double grid_lo = -2.5;
    double grid_hi = 2.5;
    int predictive_samples = 300;
    std::string output_dir = "runs/bnn-demo";
};

struct BnnDemoResult {
    Vec kl_trace;
    double spike_ratio = 0.0;        // first post-injection KL over trailing-100 median
    double control_max_ratio = 0.0;  // max post-burn-in KL over its trailing-100 median
    double inside_std = 0.0;
    double outside_std = 0.0;
};

BnnDemoResult bnn_demo(const BnnDemoConfig& cfg);

// Histogram of logged states over two dimensions, written as a CSV grid.
void export_visitation(const std::vector<std::string>& state_files, int dim_i, int dim_j, int bins,
                       const std::array<double, 4>& bounds, const std::string& out_path);

// CSV helpers shared by the harness and the tests.
std::string format_double(double v);
std::vector<Vec> read_state_csv(const std::string& path);

}  // namespace vime
