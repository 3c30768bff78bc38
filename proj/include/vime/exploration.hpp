#pragma once

#include <functional>
#include <optional>

#include "vime/bnn_model.hpp"
#include "vime/kl_normalizer.hpp"
#include "vime/policy.hpp"

namespace vime {

enum class IntrinsicMode { approx, exact, refit };

struct VimeConfig {
    double eta = 0.01;               // intrinsic reward weight; 0 recovers the baseline algorithm
    double lambda = 0.01;            // second-order step scale
    IntrinsicMode mode = IntrinsicMode::approx;
    KlDirection direction = KlDirection::forward_kl;
    int window_length = 10;          // previous-trajectory medians used for normalization
    double kl_floor = 1e-8;
    std::size_t pool_capacity = 20000;
    std::size_t pool_min_size = 500;
    int bnn_hidden_units = 32;
    int bnn_iterations = 100;        // Adam steps per epoch
    int bnn_batch_size = 10;
    double bnn_learning_rate = 1e-3;
    int bnn_samples = 10;            // posterior samples per objective evaluation
    int refit_iterations = 20;
    double refit_learning_rate = 1e-2;
    double prior_sigma = 0.9740769841801067;  // softplus(0.5)
};

struct EpochDiagnostics {
    int epoch = 0;
    double train_return_mean = 0.0;
    double train_return_median = 0.0;
    double raw_kl_median = 0.0;
    double raw_kl_mean = 0.0;
    double raw_kl_max = 0.0;
    double kl_divisor = 1.0;
    std::size_t pool_size = 0;
    bool bnn_trained = false;
    bool bnn_update_failed = false;
};

// r' = r + eta * normalized_kl, elementwise.
Vec shape_rewards(const Vec& external, const Vec& normalized_kls, double eta);

// Per-epoch orchestration: pool insertion, scoring against the frozen
// pre-update posterior, reward shaping, dynamics-model training, and finally
// the policy update on the shaped rewards.
class VimeEngine {
public:
    VimeEngine(VimeConfig config, int state_dim, int action_dim, std::uint64_t seed);

    // One raw KL per timestep of the trajectory, scored against the engine's
    // current posterior snapshot. Pure in the posterior: scoring never
    // mutates it.
    Vec score_trajectory(const Trajectory& traj, Rng& rng) const;

    EpochDiagnostics epoch_update(std::vector<Trajectory>& trajs,
                                  const std::function<void(std::vector<Trajectory>&)>& policy_update);

    const VariationalPosterior& posterior() const { return posterior_; }
    const BnnPrior& prior() const { return prior_; }
    const ReplayPool& pool() const { return pool_; }
    const VimeConfig& config() const { return config_; }

private:
    VimeConfig config_;
    ReplayPool pool_;
    KlNormalizer normalizer_;
    BnnPrior prior_;
    VariationalPosterior posterior_;
    AdamState bnn_adam_;
    Rng bnn_rng_;
    std::uint64_t seed_ = 0;
    int epoch_ = 0;
};

}  // namespace vime
