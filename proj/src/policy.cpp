#include "vime/policy.hpp"

#include <cmath>
#include <stdexcept>

namespace vime {

namespace {
constexpr double kHalfLog2Pi = 0.9189385332046727;
}

Vec GaussianPolicy::flat_params() const {
    Vec p = mean_net.params;
    p.insert(p.end(), log_std.begin(), log_std.end());
    return p;
}

void GaussianPolicy::set_flat_params(const Vec& p) {
    if (p.size() != param_count()) throw std::invalid_argument("set_flat_params: size mismatch");
    std::copy(p.begin(), p.begin() + mean_net.params.size(), mean_net.params.begin());
    std::copy(p.begin() + mean_net.params.size(), p.end(), log_std.begin());
}

GaussianPolicy make_policy(int state_dim, int action_dim, int hidden_units, Rng& rng) {
    NetArch arch{{state_dim, hidden_units, action_dim}, Activation::tanh};
    GaussianPolicy policy;
    // small output layer so the initial mean is near zero and exploration is
    // dominated by the unit-variance noise
    policy.mean_net = make_random_net(arch, rng, /*output_scale=*/0.01);
    policy.log_std.assign(action_dim, 0.0);
    return policy;
}

std::pair<Vec, double> sample_action(const GaussianPolicy& policy, const Vec& state, Rng& rng) {
    Vec mean = policy.mean(state);
    if (!all_finite(mean)) throw std::runtime_error("sample_action: non-finite policy mean");
    Vec action(mean.size());
    double lp = 0.0;
    for (std::size_t d = 0; d < mean.size(); ++d) {
        double z = normal(rng);
        double s = std::exp(policy.log_std[d]);
        action[d] = mean[d] + s * z;
        lp += -kHalfLog2Pi - policy.log_std[d] - 0.5 * z * z;
    }
    return {std::move(action), lp};
}

double log_prob(const GaussianPolicy& policy, const Vec& state, const Vec& action) {
    Vec mean = policy.mean(state);
    double lp = 0.0;
    for (std::size_t d = 0; d < mean.size(); ++d) {
        double z = (action[d] - mean[d]) * std::exp(-policy.log_std[d]);
        lp += -kHalfLog2Pi - policy.log_std[d] - 0.5 * z * z;
    }
    return lp;
}

std::vector<Trajectory> collect_batch(const GaussianPolicy& policy, const Env& env,
                                      int min_timesteps, int horizon, Rng& rng) {
    if (min_timesteps < 1) throw std::invalid_argument("collect_batch: min_timesteps must be >= 1");
    std::vector<Trajectory> batch;
    int total = 0;
    while (total < min_timesteps) {
        Trajectory traj;
        const auto& bounds = env.spec().action_bounds;
        Vec state = env.reset(rng);
        for (int t = 0; t < horizon; ++t) {
            auto [action, lp] = sample_action(policy, state, rng);
            StepResult res = env.step(state, action);
            Vec executed(action.size());
            for (std::size_t d = 0; d < action.size(); ++d)
                executed[d] = clip(action[d], bounds[d][0], bounds[d][1]);
            traj.states.push_back(state);
            traj.actions.push_back(action);
            traj.executed_actions.push_back(std::move(executed));
            traj.next_states.push_back(res.next_state);
            traj.external_rewards.push_back(res.reward);
            traj.log_probs.push_back(lp);
            state = res.next_state;
            if (res.done) break;
        }
        total += static_cast<int>(traj.length());
        traj.shaped_rewards = traj.external_rewards;
        batch.push_back(std::move(traj));
    }
    return batch;
}

Vec discounted_returns(const Vec& rewards, double gamma) {
    if (gamma < 0.0 || gamma > 1.0)
        throw std::invalid_argument("discounted_returns: gamma must be in [0, 1]");
    Vec g(rewards.size());
    double acc = 0.0;
    for (std::size_t i = rewards.size(); i-- > 0;) {
        acc = rewards[i] + gamma * acc;
        g[i] = acc;
    }
    return g;
}

double undiscounted_return(const Trajectory& t) {
    double s = 0.0;
    for (double r : t.external_rewards) s += r;
    return s;
}

double evaluate(const GaussianPolicy& policy, const Env& env, int n_episodes, Rng& rng) {
    if (n_episodes < 1) throw std::invalid_argument("evaluate: n_episodes must be >= 1");
    double total = 0.0;
    for (int ep = 0; ep < n_episodes; ++ep) {
        Vec state = env.reset(rng);
        for (int t = 0; t < env.spec().horizon; ++t) {
            auto [action, lp] = sample_action(policy, state, rng);
            (void)lp;
            StepResult res = env.step(state, action);
            total += res.reward;
            state = res.next_state;
            if (res.done) break;
        }
    }
    return total / static_cast<double>(n_episodes);
}

}  // namespace vime
