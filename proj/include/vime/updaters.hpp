#pragma once

#include <functional>

#include "vime/adam.hpp"
#include "vime/policy.hpp"

namespace vime {

enum class BaselineKind { linear, net };

// State-value regressor for variance reduction. Fit only on the batch it is
// about to be used against never happens: advantages are computed with the
// previous fit, then the baseline is refit on the current batch's returns.
class Baseline {
public:
    Baseline(BaselineKind kind, int state_dim, Rng& rng);

    double predict(const Vec& state, double t_frac) const;
    void fit(const std::vector<Vec>& states, const Vec& t_fracs, const Vec& targets);

    BaselineKind kind() const { return kind_; }

private:
    Vec features(const Vec& state, double t_frac) const;

    BaselineKind kind_;
    int state_dim_;
    // linear: least-squares coefficients over features
    Vec coef_;
    // net: small MLP on (state, t_frac) with target normalization
    DenseNet net_;
    AdamState net_adam_;
    double target_mean_ = 0.0;
    double target_std_ = 1.0;
    bool fitted_ = false;
};

struct UpdateReport {
    bool accepted = false;
    double grad_norm = 0.0;
    double measured_kl = 0.0;          // sampled mean policy KL of the accepted step
    double surrogate_improvement = 0.0;
    int backtracks = 0;
};

// Per-timestep advantages: discounted shaped return-to-go minus the baseline,
// whitened to zero mean and unit variance across the batch (zeroed when
// degenerate). Also returns the raw return targets for the baseline refit.
struct AdvantageData {
    Vec advantages;   // flat, trajectory order
    Vec returns;      // flat, same order
    std::vector<Vec> states;  // flat copies of the visited states
    Vec t_fracs;
};

AdvantageData compute_advantages(const std::vector<Trajectory>& trajs, const Baseline& baseline,
                                 double gamma, int horizon);

// Mean surrogate (1/T) sum_t log pi(a_t|s_t) A_t and its gradient w.r.t. the
// flat policy parameters.
double log_prob_surrogate(const GaussianPolicy& policy, const std::vector<Trajectory>& trajs,
                          const Vec& advantages);
Vec policy_gradient(const GaussianPolicy& policy, const std::vector<Trajectory>& trajs,
                    const Vec& advantages);

UpdateReport reinforce_update(GaussianPolicy& policy, const std::vector<Trajectory>& trajs,
                              Baseline& baseline, double gamma, int horizon, AdamState& adam);

struct TrustRegionOptions {
    double kl_step = 0.01;
    int cg_iterations = 10;
    double cg_damping = 0.1;  // bounds the step along near-null Fisher directions
    int max_backtracks = 10;
};

UpdateReport trust_region_update(GaussianPolicy& policy, const std::vector<Trajectory>& trajs,
                                 Baseline& baseline, double gamma, int horizon,
                                 const TrustRegionOptions& opts);

// Building blocks, exposed for verification against closed forms.
Vec conjugate_gradient(const std::function<Vec(const Vec&)>& matvec, const Vec& b, int iterations,
                       double tol);

Vec fisher_vector_product(const GaussianPolicy& policy, const std::vector<Vec>& states,
                          const Vec& v, double damping);

// Natural-gradient direction scaled so the quadratic KL model equals kl_step.
Vec natural_gradient_step(const std::function<Vec(const Vec&)>& fvp, const Vec& g, double kl_step,
                          int cg_iterations);

// Mean closed-form KL(old || new) of the action distributions over states.
double mean_policy_kl(const GaussianPolicy& old_policy, const GaussianPolicy& new_policy,
                      const std::vector<Vec>& states);

}  // namespace vime
