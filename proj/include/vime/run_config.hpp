#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "vime/exploration.hpp"

namespace vime {

// Full experiment configuration. Defaults are desk-scale; the larger
// benchmark-scale numbers remain reachable through the knobs.
struct RunConfig {
    std::string env = "sparse-mountaincar";
    std::string algorithm = "trpo-lite";  // "reinforce" | "trpo-lite"
    double eta = 0.1;
    std::vector<std::uint64_t> seeds = {0, 1, 2, 3, 4};
    int n_epochs = 50;
    int batch_timesteps = 5000;
    int horizon = 500;
    double gamma = 0.99;

    int policy_hidden = 32;
    double policy_learning_rate = 0.05;  // REINFORCE Adam
    double kl_step = 0.01;               // trust-region radius
    double max_policy_log_std = 0.5;     // projection after each update
    std::string baseline = "net";        // "net" | "linear"
    int eval_episodes = 5;

    bool vime_enabled = true;
    double lambda = 0.01;
    std::string intrinsic_mode = "approx";  // approx | exact | refit
    std::string kl_direction = "forward";   // forward | reversed
    int window_length = 10;
    std::size_t pool_capacity = 20000;
    std::size_t pool_min_size = 500;
    int bnn_hidden = 32;
    int bnn_iterations = 100;
    int bnn_batch_size = 10;
    double bnn_learning_rate = 1e-3;
    int bnn_samples = 10;
    int refit_iterations = 20;
    double refit_learning_rate = 1e-2;
    double prior_sigma = 0.9740769841801067;

    std::string output_dir = "runs/out";
    bool log_states = false;
    int threads = 0;  // 0: one per seed up to hardware concurrency

    VimeConfig vime_config() const;
};

// Flat "key = value" file; '#' starts a comment. Unknown keys are an error.
RunConfig load_config_file(const std::string& path);
void apply_config_line(RunConfig& cfg, const std::string& key, const std::string& value);

std::string config_to_json(const RunConfig& cfg);

std::vector<std::uint64_t> parse_seed_list(const std::string& csv);
std::vector<double> parse_double_list(const std::string& csv);

}  // namespace vime
