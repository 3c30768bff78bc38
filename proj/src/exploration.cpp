#include "vime/exploration.hpp"

#include <stdexcept>

namespace vime {

Vec shape_rewards(const Vec& external, const Vec& normalized_kls, double eta) {
    if (external.size() != normalized_kls.size())
        throw std::invalid_argument("shape_rewards: length mismatch");
    Vec shaped(external.size());
    for (std::size_t i = 0; i < external.size(); ++i)
        shaped[i] = external[i] + eta * normalized_kls[i];
    return shaped;
}

VimeEngine::VimeEngine(VimeConfig config, int state_dim, int action_dim, std::uint64_t seed)
    : config_(config),
      pool_(config.pool_capacity, config.pool_min_size),
      normalizer_(config.window_length, config.kl_floor),
      prior_(make_prior(NetArch{{state_dim + action_dim, config.bnn_hidden_units, state_dim},
                                Activation::relu},
                        config.prior_sigma, splitmix64(seed) ^ 0xdeadbeef)),
      posterior_(make_posterior(
          NetArch{{state_dim + action_dim, config.bnn_hidden_units, state_dim}, Activation::relu},
          prior_)),
      bnn_adam_(2 * posterior_.param_count() + posterior_.likelihood_log_std.size(),
                config.bnn_learning_rate),
      bnn_rng_(make_rng(seed, /*stream=*/0xb0d1)),
      seed_(seed) {}

Vec VimeEngine::score_trajectory(const Trajectory& traj, Rng& rng) const {
    Vec raw(traj.length(), 0.0);
    const auto& actions = traj.executed_actions.empty() ? traj.actions : traj.executed_actions;
    for (std::size_t t = 0; t < traj.length(); ++t) {
        TransitionTriple triple{traj.states[t], actions[t], traj.next_states[t]};
        if (config_.mode == IntrinsicMode::refit) {
            AdamState refit_adam(2 * posterior_.param_count(), config_.refit_learning_rate);
            VariationalPosterior cand = posterior_refit(posterior_, triple, config_.refit_iterations,
                                                        refit_adam, config_.bnn_samples, rng);
            raw[t] = kl_factorized(cand.mu, cand.sigma(), posterior_.mu, posterior_.sigma());
        } else {
            InfoGainMode mode = config_.mode == IntrinsicMode::exact ? InfoGainMode::exact
                                                                     : InfoGainMode::approx;
            raw[t] = info_gain_step(posterior_, triple, config_.lambda, mode, config_.bnn_samples,
                                    config_.direction, rng);
        }
    }
    return raw;
}

EpochDiagnostics VimeEngine::epoch_update(
    std::vector<Trajectory>& trajs,
    const std::function<void(std::vector<Trajectory>&)>& policy_update) {
    EpochDiagnostics diag;
    diag.epoch = epoch_;

    // (1) all transitions enter the FIFO pool
    for (const Trajectory& traj : trajs) {
        const auto& actions = traj.executed_actions.empty() ? traj.actions : traj.executed_actions;
        for (std::size_t t = 0; t < traj.length(); ++t)
            pool_.add({traj.states[t], actions[t], traj.next_states[t]});
    }

    // (2)+(3) score against the frozen pre-update posterior, normalize, shape
    diag.kl_divisor = normalizer_.divisor();
    Vec all_raw;
    if (config_.eta > 0.0) {
        for (std::size_t i = 0; i < trajs.size(); ++i) {
            Trajectory& traj = trajs[i];
            // per-(epoch, trajectory) stream: scoring order never matters
            Rng score_rng = make_rng(seed_ ^ splitmix64(static_cast<std::uint64_t>(epoch_)), i);
            Vec raw = score_trajectory(traj, score_rng);
            all_raw.insert(all_raw.end(), raw.begin(), raw.end());
            Vec normalized = normalizer_.normalize_and_record(raw);
            traj.shaped_rewards = shape_rewards(traj.external_rewards, normalized, config_.eta);
        }
    } else {
        for (Trajectory& traj : trajs) traj.shaped_rewards = traj.external_rewards;
    }

    // (4) dynamics-model update once the pool is warm
    if (pool_.ready()) {
        VariationalPosterior backup = posterior_;
        try {
            train_elbo(posterior_, prior_, pool_, config_.bnn_iterations, config_.bnn_batch_size,
                       bnn_adam_, config_.bnn_samples, bnn_rng_);
            diag.bnn_trained = true;
        } catch (const std::exception&) {
            posterior_ = backup;
            diag.bnn_update_failed = true;
        }
    }

    // (5) policy update on the shaped rewards
    policy_update(trajs);

    Vec returns;
    for (const Trajectory& traj : trajs) returns.push_back(undiscounted_return(traj));
    diag.train_return_mean = mean(returns);
    diag.train_return_median = median(returns);
    if (!all_raw.empty()) {
        diag.raw_kl_median = median(all_raw);
        diag.raw_kl_mean = mean(all_raw);
        diag.raw_kl_max = max_abs(all_raw);
    }
    diag.pool_size = pool_.size();
    epoch_ += 1;
    return diag;
}

}  // namespace vime
