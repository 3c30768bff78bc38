#pragma once

#include "vime/adam.hpp"
#include "vime/posterior.hpp"
#include "vime/transitions.hpp"

namespace vime {

// Standard-normal draws for the sampled pre-activations, one per
// (posterior sample, batch row, network unit). Freezing this tensor makes the
// sampled objectives deterministic functions of the posterior parameters,
// which is what the gradient checks difference through.
struct PreactNoise {
    int n_samples = 0;
    int rows = 0;
    int units = 0;  // sum of layer output widths
    Vec z;

    double at(int sample, int row, int unit) const {
        return z[(static_cast<std::size_t>(sample) * rows + row) * units + unit];
    }
};

int preact_unit_count(const NetArch& arch);
PreactNoise draw_noise(const NetArch& arch, int n_samples, int rows, Rng& rng);

// Gradient of a sampled objective w.r.t. the posterior parameters.
struct PosteriorGrad {
    Vec mu;
    Vec rho;
    Vec log_std;
};

// Mean over noise samples of the summed diagonal-Gaussian log-likelihood of
// next_states, with pre-activations sampled via local reparametrization.
// Accumulates d(value)/d(mu, rho, log_std) into *grad when non-null.
double sampled_log_likelihood(const VariationalPosterior& q, const TransitionBatch& batch,
                              const PreactNoise& noise, PosteriorGrad* grad);

// Log-likelihood of the batch under one explicit weight vector.
double log_likelihood(const VariationalPosterior& q, const Vec& weight_sample,
                      const TransitionBatch& batch);

// Predictive draws for one (state, action) input, local reparametrization.
std::vector<Vec> sample_predict(const VariationalPosterior& q, const Vec& state, const Vec& action,
                                int n_samples, Rng& rng);

// Variational lower bound: mean sampled log-likelihood minus
// kl_weight * KL[q || prior].
double elbo(const VariationalPosterior& q, const BnnPrior& prior, const TransitionBatch& batch,
            int n_samples, double kl_weight, Rng& rng);
double elbo_with_noise(const VariationalPosterior& q, const BnnPrior& prior,
                       const TransitionBatch& batch, const PreactNoise& noise, double kl_weight,
                       PosteriorGrad* grad);

// Adam ascent on the bound with minibatches drawn with replacement from the
// pool. kl_weight = batch_size / pool_size so the full-data KL is counted once
// per effective epoch.
void train_elbo(VariationalPosterior& q, const BnnPrior& prior, const ReplayPool& pool,
                int iterations, int batch_size, AdamState& adam, int n_samples, Rng& rng);

enum class InfoGainMode { approx, exact };
enum class KlDirection { forward_kl, reversed_kl };

// Second-order information-gain estimate 0.5 * lambda^2 * grad^T H^{-1} grad
// for a diagonal Hessian.
double taylor_info_gain(const Vec& grad, const Vec& hessian_diag, double lambda);

// Per-transition information gain via a single second-order step. The
// gradient of the step objective at the current posterior reduces to the
// negative sampled log-likelihood gradient (the KL term is flat at the
// origin); the Hessian is the diagonal KL curvature. Never mutates q.
//   approx: 0.5 * lambda^2 * grad^T H^{-1} grad
//   exact:  closed-form KL between the lambda-stepped posterior and q
//           (arguments swapped for reversed_kl)
double info_gain_step(const VariationalPosterior& q, const TransitionTriple& transition,
                      double lambda, InfoGainMode mode, int n_samples, KlDirection direction,
                      Rng& rng);

// Gradient-based minimization of the step objective on a single transition,
// starting from q. Returns the candidate; the stored posterior is untouched.
VariationalPosterior posterior_refit(const VariationalPosterior& q,
                                     const TransitionTriple& transition, int refit_iterations,
                                     AdamState& adam, int n_samples, Rng& rng);

}  // namespace vime
