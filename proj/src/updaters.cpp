#include "vime/updaters.hpp"

#include <cmath>
#include <stdexcept>

namespace vime {

// ---------------------------------------------------------------------------
// Baseline

namespace {

// Cholesky solve of (A + ridge I) x = b for small symmetric A.
Vec solve_spd(Mat A, Vec b, double ridge) {
    std::size_t n = A.rows;
    for (std::size_t i = 0; i < n; ++i) A(i, i) += ridge;
    // in-place lower Cholesky
    for (std::size_t j = 0; j < n; ++j) {
        double d = A(j, j);
        for (std::size_t k = 0; k < j; ++k) d -= A(j, k) * A(j, k);
        if (d <= 0.0) throw std::runtime_error("solve_spd: matrix not positive definite");
        A(j, j) = std::sqrt(d);
        for (std::size_t i = j + 1; i < n; ++i) {
            double s = A(i, j);
            for (std::size_t k = 0; k < j; ++k) s -= A(i, k) * A(j, k);
            A(i, j) = s / A(j, j);
        }
    }
    // forward then backward substitution
    for (std::size_t i = 0; i < n; ++i) {
        double s = b[i];
        for (std::size_t k = 0; k < i; ++k) s -= A(i, k) * b[k];
        b[i] = s / A(i, i);
    }
    for (std::size_t i = n; i-- > 0;) {
        double s = b[i];
        for (std::size_t k = i + 1; k < n; ++k) s -= A(k, i) * b[k];
        b[i] = s / A(i, i);
    }
    return b;
}

}  // namespace

Baseline::Baseline(BaselineKind kind, int state_dim, Rng& rng)
    : kind_(kind),
      state_dim_(state_dim),
      net_(kind == BaselineKind::net
               ? make_random_net(NetArch{{state_dim + 1, 32, 1}, Activation::relu}, rng, 0.01)
               : DenseNet{}),
      net_adam_(kind == BaselineKind::net ? net_.params.size() : 0, 1e-2) {}

Vec Baseline::features(const Vec& state, double t_frac) const {
    Vec f;
    f.reserve(2 * state_dim_ + 4);
    for (double s : state) f.push_back(s);
    for (double s : state) f.push_back(s * s);
    f.push_back(t_frac);
    f.push_back(t_frac * t_frac);
    f.push_back(t_frac * t_frac * t_frac);
    f.push_back(1.0);
    return f;
}

double Baseline::predict(const Vec& state, double t_frac) const {
    if (!fitted_) return 0.0;
    if (kind_ == BaselineKind::linear) return dot(features(state, t_frac), coef_);
    Vec input = state;
    input.push_back(t_frac);
    return forward(net_, input)[0] * target_std_ + target_mean_;
}

void Baseline::fit(const std::vector<Vec>& states, const Vec& t_fracs, const Vec& targets) {
    if (states.empty()) return;
    if (kind_ == BaselineKind::linear) {
        std::size_t d = features(states[0], 0.0).size();
        Mat A(d, d, 0.0);
        Vec b(d, 0.0);
        for (std::size_t r = 0; r < states.size(); ++r) {
            Vec f = features(states[r], t_fracs[r]);
            for (std::size_t i = 0; i < d; ++i) {
                b[i] += f[i] * targets[r];
                for (std::size_t j = 0; j <= i; ++j) A(i, j) += f[i] * f[j];
            }
        }
        for (std::size_t i = 0; i < d; ++i)
            for (std::size_t j = i + 1; j < d; ++j) A(i, j) = A(j, i);
        coef_ = solve_spd(std::move(A), std::move(b), 1e-5);
        fitted_ = true;
        return;
    }

    target_mean_ = mean(targets);
    target_std_ = std::max(stddev(targets), 1e-8);
    const int fit_steps = 50;
    std::size_t n = states.size();
    for (int it = 0; it < fit_steps; ++it) {
        Vec grad(net_.params.size(), 0.0);
        for (std::size_t r = 0; r < n; ++r) {
            Vec input = states[r];
            input.push_back(t_fracs[r]);
            ForwardCache cache;
            double pred = forward(net_, input, &cache)[0];
            double err = pred - (targets[r] - target_mean_) / target_std_;
            BackwardResult back = backward(net_, cache, {err});
            axpy(2.0 / static_cast<double>(n), back.param_grad, grad);
        }
        adam_step(net_adam_, net_.params, grad);
    }
    fitted_ = true;
}

// ---------------------------------------------------------------------------
// Advantages and the likelihood-ratio gradient

AdvantageData compute_advantages(const std::vector<Trajectory>& trajs, const Baseline& baseline,
                                 double gamma, int horizon) {
    AdvantageData data;
    for (const Trajectory& traj : trajs) {
        Vec g = discounted_returns(traj.shaped_rewards, gamma);
        for (std::size_t t = 0; t < traj.length(); ++t) {
            double t_frac = static_cast<double>(t) / static_cast<double>(horizon);
            data.returns.push_back(g[t]);
            data.advantages.push_back(g[t] - baseline.predict(traj.states[t], t_frac));
            data.states.push_back(traj.states[t]);
            data.t_fracs.push_back(t_frac);
        }
    }
    double mu = mean(data.advantages);
    double sd = stddev(data.advantages);
    if (sd < 1e-12) {
        std::fill(data.advantages.begin(), data.advantages.end(), 0.0);
    } else {
        for (double& a : data.advantages) a = (a - mu) / sd;
    }
    return data;
}

double log_prob_surrogate(const GaussianPolicy& policy, const std::vector<Trajectory>& trajs,
                          const Vec& advantages) {
    double s = 0.0;
    std::size_t idx = 0;
    for (const Trajectory& traj : trajs)
        for (std::size_t t = 0; t < traj.length(); ++t, ++idx)
            s += log_prob(policy, traj.states[t], traj.actions[t]) * advantages[idx];
    return s / static_cast<double>(advantages.size());
}

Vec policy_gradient(const GaussianPolicy& policy, const std::vector<Trajectory>& trajs,
                    const Vec& advantages) {
    Vec grad(policy.param_count(), 0.0);
    std::size_t net_params = policy.mean_net.params.size();
    std::size_t idx = 0;
    std::size_t total = 0;
    for (const Trajectory& traj : trajs) total += traj.length();
    if (advantages.size() != total) throw std::invalid_argument("policy_gradient: advantage length mismatch");

    for (const Trajectory& traj : trajs) {
        for (std::size_t t = 0; t < traj.length(); ++t, ++idx) {
            double adv = advantages[idx];
            if (adv == 0.0) continue;
            ForwardCache cache;
            Vec mean = forward(policy.mean_net, traj.states[t], &cache);
            Vec dmean(mean.size());
            for (std::size_t d = 0; d < mean.size(); ++d) {
                double inv_s = std::exp(-policy.log_std[d]);
                double z = (traj.actions[t][d] - mean[d]) * inv_s;
                dmean[d] = adv * z * inv_s;
                grad[net_params + d] += adv * (z * z - 1.0);
            }
            BackwardResult back = backward(policy.mean_net, cache, dmean);
            for (std::size_t i = 0; i < net_params; ++i) grad[i] += back.param_grad[i];
        }
    }
    for (double& g : grad) g /= static_cast<double>(total);
    return grad;
}

UpdateReport reinforce_update(GaussianPolicy& policy, const std::vector<Trajectory>& trajs,
                              Baseline& baseline, double gamma, int horizon, AdamState& adam) {
    UpdateReport report;
    AdvantageData data = compute_advantages(trajs, baseline, gamma, horizon);
    Vec g = policy_gradient(policy, trajs, data.advantages);
    report.grad_norm = norm2(g);
    if (!all_finite(g)) return report;  // rejected, policy untouched

    Vec params = policy.flat_params();
    Vec descent = scaled(g, -1.0);  // ascend the surrogate
    adam_step(adam, params, descent);
    policy.set_flat_params(params);
    report.accepted = true;

    baseline.fit(data.states, data.t_fracs, data.returns);
    return report;
}

// ---------------------------------------------------------------------------
// Trust-region-lite

Vec conjugate_gradient(const std::function<Vec(const Vec&)>& matvec, const Vec& b, int iterations,
                       double tol) {
    Vec x(b.size(), 0.0);
    Vec r = b;
    Vec p = b;
    double rs = dot(r, r);
    for (int it = 0; it < iterations && rs > tol; ++it) {
        Vec Ap = matvec(p);
        double pAp = dot(p, Ap);
        if (pAp <= 0.0) break;  // non-PD direction; keep the current iterate
        double alpha = rs / pAp;
        axpy(alpha, p, x);
        axpy(-alpha, Ap, r);
        double rs_new = dot(r, r);
        double beta = rs_new / rs;
        for (std::size_t i = 0; i < p.size(); ++i) p[i] = r[i] + beta * p[i];
        rs = rs_new;
    }
    return x;
}

namespace {

// Fisher-vector product with the forward caches precomputed once per update.
Vec fvp_cached(const GaussianPolicy& policy, const std::vector<ForwardCache>& caches, const Vec& v,
               double damping) {
    std::size_t net_params = policy.mean_net.params.size();
    int adim = policy.action_dim();
    Vec vnet(v.begin(), v.begin() + net_params);
    Vec out(v.size(), 0.0);
    for (const ForwardCache& cache : caches) {
        Vec jv = forward_tangent(policy.mean_net, cache, vnet);
        for (int d = 0; d < adim; ++d) jv[d] *= std::exp(-2.0 * policy.log_std[d]);
        BackwardResult back = backward(policy.mean_net, cache, jv);
        for (std::size_t i = 0; i < net_params; ++i) out[i] += back.param_grad[i];
    }
    double inv_n = 1.0 / static_cast<double>(caches.size());
    for (std::size_t i = 0; i < net_params; ++i) out[i] *= inv_n;
    // state-independent log-std block: Fisher is exactly 2 per dimension
    for (int d = 0; d < adim; ++d) out[net_params + d] = 2.0 * v[net_params + d];
    axpy(damping, v, out);
    return out;
}

}  // namespace

Vec fisher_vector_product(const GaussianPolicy& policy, const std::vector<Vec>& states,
                          const Vec& v, double damping) {
    std::vector<ForwardCache> caches(states.size());
    for (std::size_t i = 0; i < states.size(); ++i) forward(policy.mean_net, states[i], &caches[i]);
    return fvp_cached(policy, caches, v, damping);
}

Vec natural_gradient_step(const std::function<Vec(const Vec&)>& fvp, const Vec& g, double kl_step,
                          int cg_iterations) {
    Vec x = conjugate_gradient(fvp, g, cg_iterations, 1e-12);
    double xFx = dot(x, fvp(x));
    if (!(xFx > 0.0)) return Vec(g.size(), 0.0);
    double beta = std::sqrt(2.0 * kl_step / xFx);
    return scaled(x, beta);
}

double mean_policy_kl(const GaussianPolicy& old_policy, const GaussianPolicy& new_policy,
                      const std::vector<Vec>& states) {
    double total = 0.0;
    for (const Vec& s : states) {
        Vec m1 = old_policy.mean(s);
        Vec m2 = new_policy.mean(s);
        for (std::size_t d = 0; d < m1.size(); ++d) {
            double s1 = std::exp(old_policy.log_std[d]);
            double s2 = std::exp(new_policy.log_std[d]);
            double diff = m1[d] - m2[d];
            total += new_policy.log_std[d] - old_policy.log_std[d] +
                     (s1 * s1 + diff * diff) / (2.0 * s2 * s2) - 0.5;
        }
    }
    return total / static_cast<double>(states.size());
}

namespace {

double surrogate_at(const GaussianPolicy& policy, const std::vector<Trajectory>& trajs,
                    const Vec& advantages) {
    double s = 0.0;
    std::size_t idx = 0;
    for (const Trajectory& traj : trajs)
        for (std::size_t t = 0; t < traj.length(); ++t, ++idx)
            s += std::exp(log_prob(policy, traj.states[t], traj.actions[t]) - traj.log_probs[t]) *
                 advantages[idx];
    return s / static_cast<double>(advantages.size());
}

}  // namespace

UpdateReport trust_region_update(GaussianPolicy& policy, const std::vector<Trajectory>& trajs,
                                 Baseline& baseline, double gamma, int horizon,
                                 const TrustRegionOptions& opts) {
    UpdateReport report;
    AdvantageData data = compute_advantages(trajs, baseline, gamma, horizon);
    Vec g = policy_gradient(policy, trajs, data.advantages);
    report.grad_norm = norm2(g);
    if (!all_finite(g) || report.grad_norm < 1e-12) {
        baseline.fit(data.states, data.t_fracs, data.returns);
        return report;
    }

    std::vector<ForwardCache> caches(data.states.size());
    for (std::size_t i = 0; i < data.states.size(); ++i)
        forward(policy.mean_net, data.states[i], &caches[i]);
    auto fvp = [&](const Vec& v) { return fvp_cached(policy, caches, v, opts.cg_damping); };

    Vec full_step = natural_gradient_step(fvp, g, opts.kl_step, opts.cg_iterations);
    if (max_abs(full_step) == 0.0) {
        baseline.fit(data.states, data.t_fracs, data.returns);
        return report;
    }

    GaussianPolicy old_policy = policy;
    Vec old_params = policy.flat_params();
    double surr_old = surrogate_at(policy, trajs, data.advantages);

    double scale = 1.0;
    for (int k = 0; k <= opts.max_backtracks; ++k, scale *= 0.5) {
        Vec candidate = old_params;
        axpy(scale, full_step, candidate);
        policy.set_flat_params(candidate);
        double kl = mean_policy_kl(old_policy, policy, data.states);
        double surr_new = surrogate_at(policy, trajs, data.advantages);
        if (std::isfinite(kl) && std::isfinite(surr_new) && kl <= 1.5 * opts.kl_step &&
            surr_new > surr_old) {
            report.accepted = true;
            report.measured_kl = kl;
            report.surrogate_improvement = surr_new - surr_old;
            report.backtracks = k;
            break;
        }
    }
    if (!report.accepted) policy.set_flat_params(old_params);

    baseline.fit(data.states, data.t_fracs, data.returns);
    return report;
}

}  // namespace vime
