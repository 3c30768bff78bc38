#include "vime/bnn_model.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace vime {

namespace {

constexpr double kHalfLog2Pi = 0.9189385332046727;  // 0.5 * ln(2*pi)

// Per-call scratch: sigma and the softplus derivative, computed once.
struct Workspace {
    Vec sigma;
    Vec dsigma_drho;

    explicit Workspace(const VariationalPosterior& q) {
        std::size_t P = q.param_count();
        sigma.resize(P);
        dsigma_drho.resize(P);
        for (std::size_t i = 0; i < P; ++i) {
            sigma[i] = softplus(q.rho[i]);
            dsigma_drho[i] = sigmoid(q.rho[i]);
        }
    }
};

// Forward state for one (sample, row) pass, kept for the backward sweep.
struct PassCache {
    std::vector<Vec> inputs;   // layer inputs
    std::vector<Vec> preacts;  // sampled pre-activations
    std::vector<Vec> sds;      // sqrt of induced pre-activation variance
};

double activate(double x, Activation a) { return a == Activation::relu ? (x > 0.0 ? x : 0.0) : std::tanh(x); }

// Local reparametrization: the pre-activation of each unit is Gaussian with
// mean mu.x + mu_b and variance sigma^2.x^2 + sigma_b^2; we sample it directly
// instead of sampling weights.
Vec forward_local_reparam(const VariationalPosterior& q, const Workspace& ws, const Vec& input,
                          const PreactNoise& noise, int sample, int row, PassCache* cache) {
    const NetArch& arch = q.arch;
    int L = arch.num_layers();
    if (cache) {
        cache->inputs.assign(L, {});
        cache->preacts.assign(L, {});
        cache->sds.assign(L, {});
    }
    Vec x = input;
    int unit_base = 0;
    for (int k = 0; k < L; ++k) {
        int in = arch.sizes[k];
        int out = arch.sizes[k + 1];
        const double* Wmu = q.mu.data() + arch.weight_offset(k);
        const double* bmu = q.mu.data() + arch.bias_offset(k);
        const double* Wsg = ws.sigma.data() + arch.weight_offset(k);
        const double* bsg = ws.sigma.data() + arch.bias_offset(k);
        Vec pre(out), sd(out);
        for (int i = 0; i < out; ++i) {
            const double* wmu = Wmu + i * in;
            const double* wsg = Wsg + i * in;
            double gamma = bmu[i];
            double delta = bsg[i] * bsg[i];
            for (int j = 0; j < in; ++j) {
                gamma += wmu[j] * x[j];
                delta += wsg[j] * wsg[j] * x[j] * x[j];
            }
            sd[i] = std::sqrt(delta);
            pre[i] = gamma + sd[i] * noise.at(sample, row, unit_base + i);
        }
        if (cache) {
            cache->inputs[k] = x;
            cache->preacts[k] = pre;
            cache->sds[k] = sd;
        }
        bool last = (k == L - 1);
        Vec post(out);
        for (int i = 0; i < out; ++i) post[i] = last ? pre[i] : activate(pre[i], arch.hidden);
        x = std::move(post);
        unit_base += out;
    }
    return x;
}

// Backpropagate d(scalar)/d(pre-activations of last layer) into mu/sigma
// gradient accumulators (sigma-space; the rho chain rule is applied by the
// caller). `out_grad` is the gradient w.r.t. the network output.
void backward_local_reparam(const VariationalPosterior& q, const Workspace& ws,
                            const PassCache& cache, const PreactNoise& noise, int sample, int row,
                            const Vec& out_grad, Vec& gmu, Vec& gsigma) {
    const NetArch& arch = q.arch;
    int L = arch.num_layers();
    int unit_base = preact_unit_count(arch);
    Vec g = out_grad;
    for (int k = L - 1; k >= 0; --k) {
        int in = arch.sizes[k];
        int out = arch.sizes[k + 1];
        unit_base -= out;
        const Vec& x = cache.inputs[k];
        const Vec& pre = cache.preacts[k];
        const Vec& sd = cache.sds[k];
        const double* Wmu = q.mu.data() + arch.weight_offset(k);
        const double* Wsg = ws.sigma.data() + arch.weight_offset(k);
        const double* bsg = ws.sigma.data() + arch.bias_offset(k);
        double* gWmu = gmu.data() + arch.weight_offset(k);
        double* gbmu = gmu.data() + arch.bias_offset(k);
        double* gWsg = gsigma.data() + arch.weight_offset(k);
        double* gbsg = gsigma.data() + arch.bias_offset(k);

        bool last = (k == L - 1);
        Vec gx(in, 0.0);
        for (int i = 0; i < out; ++i) {
            double d = g[i];
            if (!last && arch.hidden == Activation::relu) d *= (pre[i] > 0.0 ? 1.0 : 0.0);
            if (!last && arch.hidden == Activation::tanh) {
                double t = std::tanh(pre[i]);
                d *= 1.0 - t * t;
            }
            if (d == 0.0) continue;
            double zeta = noise.at(sample, row, unit_base + i);
            double inv_sd = sd[i] > 1e-150 ? 1.0 / sd[i] : 0.0;
            double dz = d * zeta * inv_sd;
            gbmu[i] += d;
            gbsg[i] += dz * bsg[i];
            const double* wmu = Wmu + i * in;
            const double* wsg = Wsg + i * in;
            double* gwmu = gWmu + i * in;
            double* gwsg = gWsg + i * in;
            for (int j = 0; j < in; ++j) {
                gwmu[j] += d * x[j];
                gwsg[j] += dz * wsg[j] * x[j] * x[j];
                gx[j] += d * wmu[j] + dz * wsg[j] * wsg[j] * x[j];
            }
        }
        g = std::move(gx);
    }
}

Vec batch_row(const Mat& m, std::size_t r) {
    return Vec(m.row(r), m.row(r) + m.cols);
}

// Diagonal-Gaussian log-density of y given mean and per-dim log-std; fills
// d/d(mean) and d/d(log_std) when requested.
double gaussian_loglik(const Vec& y, const Vec& mean, const Vec& log_std, Vec* dmean,
                       Vec* dlog_std) {
    double ll = 0.0;
    for (std::size_t d = 0; d < y.size(); ++d) {
        double inv_s = std::exp(-log_std[d]);
        double zd = (y[d] - mean[d]) * inv_s;
        ll += -kHalfLog2Pi - log_std[d] - 0.5 * zd * zd;
        if (dmean) (*dmean)[d] = zd * inv_s;
        if (dlog_std) (*dlog_std)[d] += zd * zd - 1.0;
    }
    return ll;
}

}  // namespace

int preact_unit_count(const NetArch& arch) {
    int n = 0;
    for (std::size_t k = 1; k < arch.sizes.size(); ++k) n += arch.sizes[k];
    return n;
}

PreactNoise draw_noise(const NetArch& arch, int n_samples, int rows, Rng& rng) {
    PreactNoise noise;
    noise.n_samples = n_samples;
    noise.rows = rows;
    noise.units = preact_unit_count(arch);
    noise.z = normal_vec(rng, static_cast<std::size_t>(n_samples) * rows * noise.units);
    return noise;
}

double sampled_log_likelihood(const VariationalPosterior& q, const TransitionBatch& batch,
                              const PreactNoise& noise, PosteriorGrad* grad) {
    const NetArch& arch = q.arch;
    std::size_t rows = batch.rows();
    if (static_cast<int>(batch.states.cols + batch.actions.cols) != arch.input_dim())
        throw std::invalid_argument("sampled_log_likelihood: input dimension mismatch");
    if (static_cast<int>(batch.next_states.cols) != arch.output_dim())
        throw std::invalid_argument("sampled_log_likelihood: output dimension mismatch");
    if (noise.rows != static_cast<int>(rows)) throw std::invalid_argument("sampled_log_likelihood: noise shape mismatch");

    Workspace ws(q);
    std::size_t P = q.param_count();
    Vec gmu, gsigma, glog_std;
    if (grad) {
        gmu.assign(P, 0.0);
        gsigma.assign(P, 0.0);
        glog_std.assign(arch.output_dim(), 0.0);
    }

    double total = 0.0;
    PassCache cache;
    Vec input(arch.input_dim());
    Vec dmean(arch.output_dim());
    for (int s = 0; s < noise.n_samples; ++s) {
        for (std::size_t r = 0; r < rows; ++r) {
            for (std::size_t j = 0; j < batch.states.cols; ++j) input[j] = batch.states(r, j);
            for (std::size_t j = 0; j < batch.actions.cols; ++j)
                input[batch.states.cols + j] = batch.actions(r, j);
            Vec out = forward_local_reparam(q, ws, input, noise, s, static_cast<int>(r),
                                            grad ? &cache : nullptr);
            if (!all_finite(out)) throw std::runtime_error("sampled_log_likelihood: non-finite network output");
            Vec y = batch_row(batch.next_states, r);
            total += gaussian_loglik(y, out, q.likelihood_log_std, grad ? &dmean : nullptr,
                                     grad ? &glog_std : nullptr);
            if (grad)
                backward_local_reparam(q, ws, cache, noise, s, static_cast<int>(r), dmean, gmu, gsigma);
        }
    }
    double inv_n = 1.0 / static_cast<double>(noise.n_samples);
    if (grad) {
        grad->mu.assign(P, 0.0);
        grad->rho.assign(P, 0.0);
        grad->log_std.assign(arch.output_dim(), 0.0);
        for (std::size_t i = 0; i < P; ++i) {
            grad->mu[i] = gmu[i] * inv_n;
            grad->rho[i] = gsigma[i] * ws.dsigma_drho[i] * inv_n;
        }
        for (int d = 0; d < arch.output_dim(); ++d) grad->log_std[d] = glog_std[d] * inv_n;
    }
    return total * inv_n;
}

double log_likelihood(const VariationalPosterior& q, const Vec& weight_sample,
                      const TransitionBatch& batch) {
    if (static_cast<int>(weight_sample.size()) != q.arch.param_count())
        throw std::invalid_argument("log_likelihood: weight sample does not match architecture");
    DenseNet net(q.arch);
    net.params = weight_sample;
    double total = 0.0;
    Vec input(q.arch.input_dim());
    for (std::size_t r = 0; r < batch.rows(); ++r) {
        for (std::size_t j = 0; j < batch.states.cols; ++j) input[j] = batch.states(r, j);
        for (std::size_t j = 0; j < batch.actions.cols; ++j)
            input[batch.states.cols + j] = batch.actions(r, j);
        Vec out = forward(net, input);
        if (!all_finite(out)) throw std::runtime_error("log_likelihood: non-finite network output");
        Vec y = batch_row(batch.next_states, r);
        total += gaussian_loglik(y, out, q.likelihood_log_std, nullptr, nullptr);
    }
    return total;
}

std::vector<Vec> sample_predict(const VariationalPosterior& q, const Vec& state, const Vec& action,
                                int n_samples, Rng& rng) {
    if (n_samples < 1) throw std::invalid_argument("sample_predict: n_samples must be >= 1");
    if (static_cast<int>(state.size() + action.size()) != q.arch.input_dim())
        throw std::invalid_argument("sample_predict: input dimension mismatch");
    Vec input(state);
    input.insert(input.end(), action.begin(), action.end());
    Workspace ws(q);
    PreactNoise noise = draw_noise(q.arch, n_samples, 1, rng);
    std::vector<Vec> draws;
    draws.reserve(n_samples);
    for (int s = 0; s < n_samples; ++s)
        draws.push_back(forward_local_reparam(q, ws, input, noise, s, 0, nullptr));
    return draws;
}

double elbo_with_noise(const VariationalPosterior& q, const BnnPrior& prior,
                       const TransitionBatch& batch, const PreactNoise& noise, double kl_weight,
                       PosteriorGrad* grad) {
    double ll = 0.0;
    if (batch.rows() > 0) {
        ll = sampled_log_likelihood(q, batch, noise, grad);
    } else if (grad) {
        grad->mu.assign(q.param_count(), 0.0);
        grad->rho.assign(q.param_count(), 0.0);
        grad->log_std.assign(q.arch.output_dim(), 0.0);
    }
    double kl = kl_to_prior(q, prior);
    if (grad && kl_weight != 0.0) {
        double inv_ps2 = 1.0 / (prior.sigma * prior.sigma);
        for (std::size_t i = 0; i < q.param_count(); ++i) {
            double s = softplus(q.rho[i]);
            double dkl_dmu = (q.mu[i] - prior.mu[i]) * inv_ps2;
            double dkl_dsigma = s * inv_ps2 - 1.0 / s;
            grad->mu[i] -= kl_weight * dkl_dmu;
            grad->rho[i] -= kl_weight * dkl_dsigma * sigmoid(q.rho[i]);
        }
    }
    return ll - kl_weight * kl;
}

double elbo(const VariationalPosterior& q, const BnnPrior& prior, const TransitionBatch& batch,
            int n_samples, double kl_weight, Rng& rng) {
    if (n_samples < 1) throw std::invalid_argument("elbo: n_samples must be >= 1");
    PreactNoise noise = draw_noise(q.arch, n_samples, static_cast<int>(batch.rows()), rng);
    return elbo_with_noise(q, prior, batch, noise, kl_weight, nullptr);
}

namespace {

Vec pack_posterior(const VariationalPosterior& q) {
    Vec p;
    p.reserve(2 * q.param_count() + q.likelihood_log_std.size());
    p.insert(p.end(), q.mu.begin(), q.mu.end());
    p.insert(p.end(), q.rho.begin(), q.rho.end());
    p.insert(p.end(), q.likelihood_log_std.begin(), q.likelihood_log_std.end());
    return p;
}

void unpack_posterior(const Vec& p, VariationalPosterior& q) {
    std::size_t P = q.param_count();
    std::copy(p.begin(), p.begin() + P, q.mu.begin());
    std::copy(p.begin() + P, p.begin() + 2 * P, q.rho.begin());
    std::copy(p.begin() + 2 * P, p.end(), q.likelihood_log_std.begin());
}

Vec pack_grad_negated(const PosteriorGrad& g) {
    Vec v;
    v.reserve(2 * g.mu.size() + g.log_std.size());
    for (double x : g.mu) v.push_back(-x);
    for (double x : g.rho) v.push_back(-x);
    for (double x : g.log_std) v.push_back(-x);
    return v;
}

}  // namespace

void train_elbo(VariationalPosterior& q, const BnnPrior& prior, const ReplayPool& pool,
                int iterations, int batch_size, AdamState& adam, int n_samples, Rng& rng) {
    if (pool.size() == 0) throw std::runtime_error("train_elbo: empty pool");
    double kl_weight = static_cast<double>(batch_size) / static_cast<double>(pool.size());
    Vec params = pack_posterior(q);
    for (int it = 0; it < iterations; ++it) {
        TransitionBatch batch = pool.sample(batch_size, rng);
        PreactNoise noise = draw_noise(q.arch, n_samples, batch_size, rng);
        PosteriorGrad grad;
        elbo_with_noise(q, prior, batch, noise, kl_weight, &grad);
        Vec g = pack_grad_negated(grad);  // ascend the bound
        adam_step(adam, params, g);
        unpack_posterior(params, q);
    }
}

double taylor_info_gain(const Vec& grad, const Vec& hessian_diag, double lambda) {
    if (grad.size() != hessian_diag.size())
        throw std::invalid_argument("taylor_info_gain: shape mismatch");
    double quad = 0.0;
    for (std::size_t i = 0; i < grad.size(); ++i) {
        if (!(hessian_diag[i] > 0.0)) throw std::runtime_error("taylor_info_gain: non-positive Hessian entry");
        quad += grad[i] * grad[i] / hessian_diag[i];
    }
    return 0.5 * lambda * lambda * quad;
}

double info_gain_step(const VariationalPosterior& q, const TransitionTriple& transition,
                      double lambda, InfoGainMode mode, int n_samples, KlDirection direction,
                      Rng& rng) {
    if (!(lambda > 0.0)) throw std::invalid_argument("info_gain_step: lambda must be positive");
    TransitionBatch batch = single_transition_batch(transition);
    PreactNoise noise = draw_noise(q.arch, n_samples, 1, rng);
    PosteriorGrad llgrad;
    sampled_log_likelihood(q, batch, noise, &llgrad);

    std::size_t P = q.param_count();
    Vec h = hessian_diag_kl(q);
    // grad of the step objective at the origin = -grad(log-likelihood)
    Vec obj_grad(2 * P);
    for (std::size_t i = 0; i < P; ++i) {
        obj_grad[i] = -llgrad.mu[i];
        obj_grad[P + i] = -llgrad.rho[i];
        if (!std::isfinite(obj_grad[i]) || !std::isfinite(obj_grad[P + i]))
            throw std::runtime_error("info_gain_step: non-finite gradient");
    }
    if (mode == InfoGainMode::approx) return taylor_info_gain(obj_grad, h, lambda);

    Vec mu2(P), sigma2(P);
    for (std::size_t i = 0; i < P; ++i) {
        mu2[i] = q.mu[i] + lambda * obj_grad[i] / h[i];
        sigma2[i] = softplus(q.rho[i] + lambda * obj_grad[P + i] / h[P + i]);
    }
    Vec sigma = q.sigma();
    if (direction == KlDirection::forward_kl) return kl_factorized(mu2, sigma2, q.mu, sigma);
    return kl_factorized(q.mu, sigma, mu2, sigma2);
}

VariationalPosterior posterior_refit(const VariationalPosterior& q,
                                     const TransitionTriple& transition, int refit_iterations,
                                     AdamState& adam, int n_samples, Rng& rng) {
    VariationalPosterior cand = q;
    Vec sigma0 = q.sigma();
    TransitionBatch batch = single_transition_batch(transition);
    std::size_t P = q.param_count();
    // phi = (mu, rho); the likelihood noise stays a fixed point estimate here
    Vec params;
    params.reserve(2 * P);
    params.insert(params.end(), cand.mu.begin(), cand.mu.end());
    params.insert(params.end(), cand.rho.begin(), cand.rho.end());
    for (int it = 0; it < refit_iterations; ++it) {
        PreactNoise noise = draw_noise(q.arch, n_samples, 1, rng);
        PosteriorGrad llgrad;
        sampled_log_likelihood(cand, batch, noise, &llgrad);
        Vec g(2 * P);
        for (std::size_t i = 0; i < P; ++i) {
            double s = softplus(cand.rho[i]);
            double dkl_dmu = (cand.mu[i] - q.mu[i]) / (sigma0[i] * sigma0[i]);
            double dkl_dsigma = s / (sigma0[i] * sigma0[i]) - 1.0 / s;
            g[i] = dkl_dmu - llgrad.mu[i];
            g[P + i] = dkl_dsigma * sigmoid(cand.rho[i]) - llgrad.rho[i];
        }
        adam_step(adam, params, g);
        std::copy(params.begin(), params.begin() + P, cand.mu.begin());
        std::copy(params.begin() + P, params.end(), cand.rho.begin());
    }
    return cand;
}

}  // namespace vime
