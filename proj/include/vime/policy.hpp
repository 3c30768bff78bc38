#pragma once

#include <utility>
#include <vector>

#include "vime/dense_net.hpp"
#include "vime/envs.hpp"
#include "vime/linalg.hpp"
#include "vime/rng.hpp"

namespace vime {

// Stochastic policy: factorized Gaussian with a network mean and a
// state-independent log-std per action dimension.
struct GaussianPolicy {
    DenseNet mean_net;
    Vec log_std;

    int state_dim() const { return mean_net.arch.input_dim(); }
    int action_dim() const { return mean_net.arch.output_dim(); }
    std::size_t param_count() const { return mean_net.params.size() + log_std.size(); }

    // Flat view: [mean_net params, log_std]
    Vec flat_params() const;
    void set_flat_params(const Vec& p);

    Vec mean(const Vec& state) const { return forward(mean_net, state); }
};

GaussianPolicy make_policy(int state_dim, int action_dim, int hidden_units, Rng& rng);

std::pair<Vec, double> sample_action(const GaussianPolicy& policy, const Vec& state, Rng& rng);

double log_prob(const GaussianPolicy& policy, const Vec& state, const Vec& action);

struct Trajectory {
    std::vector<Vec> states;
    std::vector<Vec> actions;           // as sampled from the policy; log_probs match these
    std::vector<Vec> executed_actions;  // clipped to the action bounds; what the env saw
    std::vector<Vec> next_states;
    Vec external_rewards;
    Vec shaped_rewards;
    Vec log_probs;

    std::size_t length() const { return states.size(); }
};

// Whole episodes until the total timestep count reaches min_timesteps.
// shaped_rewards start as a copy of the external rewards; the exploration
// engine overwrites them.
std::vector<Trajectory> collect_batch(const GaussianPolicy& policy, const Env& env,
                                      int min_timesteps, int horizon, Rng& rng);

// Return-to-go: G_t = sum_{k>=t} gamma^{k-t} r_k.
Vec discounted_returns(const Vec& rewards, double gamma);

// Mean undiscounted external return over episodes; shaping never enters here.
double evaluate(const GaussianPolicy& policy, const Env& env, int n_episodes, Rng& rng);

double undiscounted_return(const Trajectory& t);

}  // namespace vime
