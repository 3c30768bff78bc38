#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "vime/bnn_model.hpp"
#include "vime/finite_diff.hpp"

using namespace vime;

namespace {

constexpr double kLog2Pi = 1.8378770664093453;

// Independent Gaussian log-pdf for the Monte-Carlo KL oracle.
double gauss_logpdf(double x, double mu, double sigma) {
    double z = (x - mu) / sigma;
    return -0.5 * kLog2Pi - std::log(sigma) - 0.5 * z * z;
}

// MC estimate of E_q[log q - log q'] with its standard error.
std::pair<double, double> mc_kl(const Vec& mu, const Vec& sigma, const Vec& mu2, const Vec& sigma2,
                                int n_samples, Rng& rng) {
    double sum = 0.0, sumsq = 0.0;
    for (int s = 0; s < n_samples; ++s) {
        double ratio = 0.0;
        for (std::size_t i = 0; i < mu.size(); ++i) {
            double x = mu[i] + sigma[i] * normal(rng);
            ratio += gauss_logpdf(x, mu[i], sigma[i]) - gauss_logpdf(x, mu2[i], sigma2[i]);
        }
        sum += ratio;
        sumsq += ratio * ratio;
    }
    double m = sum / n_samples;
    double var = (sumsq / n_samples - m * m) / (n_samples - 1);
    return {m, std::sqrt(std::max(var, 0.0))};
}

VariationalPosterior random_posterior(const NetArch& arch, Rng& rng, double rho_lo = -3.0,
                                      double rho_hi = 1.0) {
    BnnPrior prior = make_prior(arch, softplus(0.5), rng());
    VariationalPosterior q = make_posterior(arch, prior);
    for (auto& m : q.mu) m = 0.5 * normal(rng);
    for (auto& r : q.rho) r = uniform(rng, rho_lo, rho_hi);
    for (auto& l : q.likelihood_log_std) l = uniform(rng, -1.0, 0.5);
    return q;
}

TransitionBatch random_batch(int rows, int sdim, int adim, Rng& rng, int out_dim = -1) {
    TransitionBatch b;
    b.states = Mat(rows, sdim);
    b.actions = Mat(rows, adim);
    b.next_states = Mat(rows, out_dim < 0 ? sdim : out_dim);
    for (auto& v : b.states.data) v = normal(rng);
    for (auto& v : b.actions.data) v = normal(rng);
    for (auto& v : b.next_states.data) v = normal(rng);
    return b;
}

Vec pack(const VariationalPosterior& q) {
    Vec p(q.mu);
    p.insert(p.end(), q.rho.begin(), q.rho.end());
    p.insert(p.end(), q.likelihood_log_std.begin(), q.likelihood_log_std.end());
    return p;
}

void unpack(const Vec& p, VariationalPosterior& q) {
    std::size_t P = q.param_count();
    std::copy(p.begin(), p.begin() + P, q.mu.begin());
    std::copy(p.begin() + P, p.begin() + 2 * P, q.rho.begin());
    std::copy(p.begin() + 2 * P, p.end(), q.likelihood_log_std.begin());
}

}  // namespace

TEST_CASE("sigma_from_rho: softplus values") {
    CHECK(sigma_from_rho({0.0})[0] == doctest::Approx(0.6931471805599453).epsilon(1e-14));
    CHECK(sigma_from_rho({0.5})[0] == doctest::Approx(0.9740769841801067).epsilon(1e-14));
    double tiny = sigma_from_rho({-20.0})[0];
    CHECK(tiny > 0.0);
    CHECK(tiny == doctest::Approx(std::exp(-20.0)).epsilon(1e-6));
}

TEST_CASE("sigma_from_rho: positive and monotone") {
    Rng rng = make_rng(1, 0);
    double prev = sigma_from_rho({-40.0})[0];
    CHECK(prev > 0.0);
    for (double r = -39.0; r <= 40.0; r += 0.5) {
        double s = sigma_from_rho({r})[0];
        CHECK(s > prev);
        prev = s;
    }
    (void)rng;
}

TEST_CASE("kl_factorized: zero iff equal") {
    Rng rng = make_rng(2, 0);
    for (int t = 0; t < 20; ++t) {
        Vec mu = normal_vec(rng, 6);
        Vec sigma(6);
        for (auto& s : sigma) s = std::exp(normal(rng));
        CHECK(kl_factorized(mu, sigma, mu, sigma) == doctest::Approx(0.0).epsilon(1e-12));
        CHECK(std::abs(kl_factorized(mu, sigma, mu, sigma)) < 1e-12);
    }
}

TEST_CASE("kl_factorized: frozen 1-dim values") {
    CHECK(kl_factorized({1.0}, {1.0}, {0.0}, {1.0}) == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(kl_factorized({0.0}, {2.0}, {0.0}, {1.0}) ==
          doctest::Approx(0.8068528194400546).epsilon(1e-14));
}

TEST_CASE("kl_factorized: rejects non-positive sigma and length mismatch") {
    CHECK_THROWS(kl_factorized({0.0}, {0.0}, {0.0}, {1.0}));
    CHECK_THROWS(kl_factorized({0.0}, {1.0}, {0.0}, {-1.0}));
    CHECK_THROWS(kl_factorized({0.0, 1.0}, {1.0, 1.0}, {0.0}, {1.0}));
}

TEST_CASE("kl_factorized: non-negative on random pairs") {
    Rng rng = make_rng(3, 0);
    for (int t = 0; t < 200; ++t) {
        Vec mu = normal_vec(rng, 4), mu2 = normal_vec(rng, 4);
        Vec s1(4), s2(4);
        for (auto& s : s1) s = softplus(uniform(rng, -3.0, 3.0));
        for (auto& s : s2) s = softplus(uniform(rng, -3.0, 3.0));
        CHECK(kl_factorized(mu, s1, mu2, s2) >= 0.0);
    }
}

TEST_CASE("kl_factorized: agrees with the Monte-Carlo log-density-ratio oracle") {
    Rng rng = make_rng(4, 0);
    for (int t = 0; t < 5; ++t) {
        Vec mu = normal_vec(rng, 10), mu2 = normal_vec(rng, 10);
        Vec s1(10), s2(10);
        for (auto& s : s1) s = std::exp(uniform(rng, -1.0, 1.0));
        for (auto& s : s2) s = std::exp(uniform(rng, -1.0, 1.0));
        double closed = kl_factorized(mu, s1, mu2, s2);
        auto [est, se] = mc_kl(mu, s1, mu2, s2, 200000, rng);
        CHECK(std::abs(closed - est) <= 3.0 * se);
    }
}

TEST_CASE("hessian_diag_kl: frozen values at rho = 0") {
    NetArch arch{{1, 1}, Activation::relu};
    BnnPrior prior = make_prior(arch, softplus(0.5), 1);
    VariationalPosterior q = make_posterior(arch, prior);
    q.rho.assign(q.rho.size(), 0.0);
    Vec h = hessian_diag_kl(q);
    std::size_t P = q.param_count();
    CHECK(h[0] == doctest::Approx(2.0813689810056077).epsilon(1e-13));      // mu entry
    CHECK(h[P] == doctest::Approx(1.0406844905028039).epsilon(1e-13));      // rho entry
}

TEST_CASE("hessian_diag_kl: matches second differences of the closed-form KL") {
    Rng rng = make_rng(5, 0);
    NetArch arch{{2, 3, 2}, Activation::relu};
    VariationalPosterior q = random_posterior(arch, rng, -3.0, 3.0);
    std::size_t P = q.param_count();
    Vec h = hessian_diag_kl(q);
    Vec sigma0 = q.sigma();

    double worst = 0.0;
    for (std::size_t i = 0; i < P; ++i) {
        auto f_mu = [&](const Vec& x) {
            Vec mu = q.mu;
            mu[i] = x[0];
            return kl_factorized(mu, sigma0, q.mu, sigma0);
        };
        double fd = finite_diff_second(f_mu, {q.mu[i]}, 0, 1e-4);
        worst = std::max(worst, std::abs(fd - h[i]) / std::abs(h[i]));

        auto f_rho = [&](const Vec& x) {
            Vec rho = q.rho;
            rho[i] = x[0];
            return kl_factorized(q.mu, sigma_from_rho(rho), q.mu, sigma0);
        };
        double fd_rho = finite_diff_second(f_rho, {q.rho[i]}, 0, 1e-4);
        worst = std::max(worst, std::abs(fd_rho - h[P + i]) / std::abs(h[P + i]));
    }
    CHECK(worst <= 1e-4);
}

TEST_CASE("hessian_diag_kl: rho entries vanish as rho grows") {
    NetArch arch{{1, 1}, Activation::relu};
    BnnPrior prior = make_prior(arch, softplus(0.5), 1);
    VariationalPosterior q = make_posterior(arch, prior);
    std::size_t P = q.param_count();
    double prev = 1e300;
    for (double r : {0.0, 2.0, 5.0, 10.0, 20.0}) {
        q.rho.assign(P, r);
        Vec h = hessian_diag_kl(q);
        CHECK(h[P] > 0.0);
        CHECK(h[P] < prev);
        prev = h[P];
    }
    // at rho = 10 the analytic value is within finite differences of Eq. 14
    q.rho.assign(P, 10.0);
    Vec h = hessian_diag_kl(q);
    Vec sigma0 = q.sigma();
    auto f_rho = [&](const Vec& x) {
        Vec rho = q.rho;
        rho[0] = x[0];
        return kl_factorized(q.mu, sigma_from_rho(rho), q.mu, sigma0);
    };
    double fd = finite_diff_second(f_rho, {10.0}, 0, 1e-4);
    CHECK(std::abs(fd - h[P]) / h[P] < 1e-4);
}

TEST_CASE("sample_predict: collapses to the mean network when sigma is tiny") {
    Rng rng = make_rng(6, 0);
    NetArch arch{{3, 4, 2}, Activation::relu};
    VariationalPosterior q = random_posterior(arch, rng);
    q.rho.assign(q.rho.size(), -60.0);

    Vec state = {0.3, -0.7};
    Vec action = {0.5};
    DenseNet mean_net(arch);
    mean_net.params = q.mu;
    Vec mean_out = forward(mean_net, {0.3, -0.7, 0.5});

    Rng draw_rng = make_rng(7, 0);
    auto draws = sample_predict(q, state, action, 32, draw_rng);
    for (const Vec& d : draws)
        for (std::size_t i = 0; i < d.size(); ++i) CHECK(std::abs(d[i] - mean_out[i]) <= 1e-15);
}

TEST_CASE("sample_predict: sample mean matches the mu-network output (1-layer linear)") {
    Rng rng = make_rng(8, 0);
    NetArch arch{{2, 1}, Activation::relu};  // single layer: linear output
    VariationalPosterior q = random_posterior(arch, rng, -1.0, 0.5);
    Vec state = {0.8};
    Vec action = {-0.4};

    DenseNet mean_net(arch);
    mean_net.params = q.mu;
    double analytic_mean = forward(mean_net, {0.8, -0.4})[0];

    Rng draw_rng = make_rng(9, 0);
    const int n = 100000;
    auto draws = sample_predict(q, state, action, n, draw_rng);
    Vec outs;
    outs.reserve(n);
    for (const Vec& d : draws) outs.push_back(d[0]);
    double m = mean(outs);
    double se = stddev(outs) / std::sqrt(static_cast<double>(n));
    CHECK(std::abs(m - analytic_mean) <= 3.0 * se);
}

TEST_CASE("sample_predict: same seed gives identical draws") {
    Rng rng = make_rng(10, 0);
    NetArch arch{{3, 4, 2}, Activation::relu};
    VariationalPosterior q = random_posterior(arch, rng);
    Rng a = make_rng(42, 1), b = make_rng(42, 1);
    auto da = sample_predict(q, {0.1, 0.2}, {0.3}, 10, a);
    auto db = sample_predict(q, {0.1, 0.2}, {0.3}, 10, b);
    CHECK(da == db);
}

TEST_CASE("log_likelihood: density at the mode, additivity, oracle") {
    Rng rng = make_rng(11, 0);
    NetArch arch{{2, 1}, Activation::relu};
    VariationalPosterior q = random_posterior(arch, rng);
    q.likelihood_log_std = {0.0};

    DenseNet net(arch);
    net.params = q.mu;

    // one row whose target equals the prediction exactly
    TransitionBatch b;
    b.states = Mat(1, 1);
    b.actions = Mat(1, 1);
    b.states(0, 0) = 0.4;
    b.actions(0, 0) = -0.2;
    double pred = forward(net, {0.4, -0.2})[0];
    b.next_states = Mat(1, 1);
    b.next_states(0, 0) = pred;
    CHECK(log_likelihood(q, q.mu, b) == doctest::Approx(-0.9189385332046727).epsilon(1e-14));

    // duplicating rows doubles the value
    TransitionBatch b2;
    b2.states = Mat(2, 1);
    b2.actions = Mat(2, 1);
    b2.next_states = Mat(2, 1);
    for (int r = 0; r < 2; ++r) {
        b2.states(r, 0) = 0.4;
        b2.actions(r, 0) = -0.2;
        b2.next_states(r, 0) = pred;
    }
    CHECK(log_likelihood(q, q.mu, b2) == doctest::Approx(2.0 * log_likelihood(q, q.mu, b)));

    // random case against the independent density formula
    q.likelihood_log_std = {-0.3};
    TransitionBatch b3 = random_batch(3, 1, 1, rng);
    double expected = 0.0;
    for (int r = 0; r < 3; ++r) {
        double out = forward(net, {b3.states(r, 0), b3.actions(r, 0)})[0];
        expected += gauss_logpdf(b3.next_states(r, 0), out, std::exp(-0.3));
    }
    CHECK(log_likelihood(q, q.mu, b3) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("elbo: posterior at prior with empty batch is zero") {
    NetArch arch{{3, 4, 2}, Activation::relu};
    BnnPrior prior = make_prior(arch, softplus(0.5), 3);
    VariationalPosterior q = make_posterior(arch, prior);
    TransitionBatch empty;
    empty.states = Mat(0, 2);
    empty.actions = Mat(0, 1);
    empty.next_states = Mat(0, 2);
    Rng rng = make_rng(12, 0);
    CHECK(elbo(q, prior, empty, 4, 1.0, rng) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("elbo: kl_weight = 0 reduces to the sampled log-likelihood") {
    Rng rng = make_rng(13, 0);
    NetArch arch{{3, 4, 2}, Activation::relu};
    VariationalPosterior q = random_posterior(arch, rng);
    BnnPrior prior = make_prior(arch, softplus(0.5), 11);
    TransitionBatch batch = random_batch(5, 2, 1, rng);
    PreactNoise noise = draw_noise(arch, 6, 5, rng);
    double e = elbo_with_noise(q, prior, batch, noise, 0.0, nullptr);
    double ll = sampled_log_likelihood(q, batch, noise, nullptr);
    CHECK(e == doctest::Approx(ll).epsilon(1e-15));
}

TEST_CASE("elbo: gradient matches finite differences under frozen noise") {
    Rng rng = make_rng(14, 0);
    NetArch arch{{4, 2, 1}, Activation::relu};
    VariationalPosterior q = random_posterior(arch, rng);
    BnnPrior prior = make_prior(arch, softplus(0.5), 77);
    TransitionBatch batch = random_batch(8, 3, 1, rng, /*out_dim=*/1);
    PreactNoise noise = draw_noise(arch, 10, 8, rng);

    PosteriorGrad grad;
    elbo_with_noise(q, prior, batch, noise, 0.37, &grad);
    Vec analytic(grad.mu);
    analytic.insert(analytic.end(), grad.rho.begin(), grad.rho.end());
    analytic.insert(analytic.end(), grad.log_std.begin(), grad.log_std.end());

    VariationalPosterior probe = q;
    auto f = [&](const Vec& p) {
        unpack(p, probe);
        return elbo_with_noise(probe, prior, batch, noise, 0.37, nullptr);
    };
    Vec fd = finite_diff_grad(f, pack(q), 1e-5);

    Vec diff(analytic.size());
    for (std::size_t i = 0; i < analytic.size(); ++i) diff[i] = analytic[i] - fd[i];
    CHECK(norm2(diff) / norm2(fd) <= 1e-3);
}

TEST_CASE("train_elbo: zero iterations leave the posterior unchanged") {
    NetArch arch{{2, 4, 1}, Activation::relu};
    BnnPrior prior = make_prior(arch, softplus(0.5), 5);
    VariationalPosterior q = make_posterior(arch, prior);
    std::string before = serialize_posterior(q, prior);

    ReplayPool pool(100, 0);
    pool.add({{0.5}, {0.1}, {0.6}});
    AdamState adam(2 * q.param_count() + 1, 1e-4);
    Rng rng = make_rng(15, 0);
    train_elbo(q, prior, pool, 0, 10, adam, 10, rng);
    CHECK(serialize_posterior(q, prior) == before);
}

TEST_CASE("train_elbo: empty pool is an error") {
    NetArch arch{{2, 4, 1}, Activation::relu};
    BnnPrior prior = make_prior(arch, softplus(0.5), 5);
    VariationalPosterior q = make_posterior(arch, prior);
    ReplayPool pool(100, 0);
    AdamState adam(2 * q.param_count() + 1, 1e-4);
    Rng rng = make_rng(16, 0);
    CHECK_THROWS(train_elbo(q, prior, pool, 10, 10, adam, 10, rng));
}

TEST_CASE("train_elbo: held-out bound improves on a linear toy for most seeds") {
    int improved = 0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        Rng rng = make_rng(seed, 100);
        NetArch arch{{2, 4, 1}, Activation::relu};
        BnnPrior prior = make_prior(arch, softplus(0.5), seed);
        VariationalPosterior q = make_posterior(arch, prior);

        ReplayPool pool(1000, 0);
        TransitionBatch held;
        held.states = Mat(20, 1);
        held.actions = Mat(20, 1);
        held.next_states = Mat(20, 1);
        for (int i = 0; i < 40; ++i) {
            double x = uniform(rng, -1.0, 1.0);
            double a = uniform(rng, -1.0, 1.0);
            double y = 0.5 * x - 0.2 * a + 0.01 * normal(rng);
            if (i < 20) {
                held.states(i, 0) = x;
                held.actions(i, 0) = a;
                held.next_states(i, 0) = y;
            } else {
                pool.add({{x}, {a}, {y}});
            }
        }
        PreactNoise eval_noise = draw_noise(arch, 20, 20, rng);
        double before = elbo_with_noise(q, prior, held, eval_noise, 0.05, nullptr);
        AdamState adam(2 * q.param_count() + 1, 1e-2);
        train_elbo(q, prior, pool, 300, 10, adam, 10, rng);
        double after = elbo_with_noise(q, prior, held, eval_noise, 0.05, nullptr);
        if (after > before) improved += 1;
    }
    CHECK(improved >= 9);
}

TEST_CASE("taylor_info_gain: hand arithmetic of the quadratic form") {
    // H = [2, 4], grad = [1, 2], lambda = 0.01 -> 0.5e-4 * (1/2 + 4/4)
    CHECK(taylor_info_gain({1.0, 2.0}, {2.0, 4.0}, 0.01) ==
          doctest::Approx(7.5e-5).epsilon(1e-14));
}

TEST_CASE("info_gain_step: vanishes as lambda goes to zero") {
    Rng rng = make_rng(17, 0);
    NetArch arch{{3, 4, 2}, Activation::relu};
    VariationalPosterior q = random_posterior(arch, rng);
    TransitionTriple t{{0.2, -0.5}, {0.7}, {0.1, 0.0}};
    for (InfoGainMode mode : {InfoGainMode::approx, InfoGainMode::exact}) {
        Rng r1 = make_rng(18, 0);
        double v = info_gain_step(q, t, 1e-8, mode, 10, KlDirection::forward_kl, r1);
        CHECK(v >= 0.0);
        CHECK(v < 1e-10);
    }
}

TEST_CASE("info_gain_step: approx converges to exact as lambda shrinks") {
    Rng rng = make_rng(19, 0);
    int ok = 0;
    for (int trial = 0; trial < 10; ++trial) {
        NetArch arch{{3, 4, 2}, Activation::relu};
        VariationalPosterior q = random_posterior(arch, rng);
        TransitionTriple t{{normal(rng), normal(rng)}, {normal(rng)}, {normal(rng), normal(rng)}};
        double prev_rel = 1e300;
        bool monotone = true;
        double rel_at_smallest = 0.0;
        for (double lambda : {1e-1, 1e-2, 1e-3}) {
            Rng ra = make_rng(20 + trial, 0), rb = make_rng(20 + trial, 0);
            double approx = info_gain_step(q, t, lambda, InfoGainMode::approx, 10,
                                           KlDirection::forward_kl, ra);
            double exact =
                info_gain_step(q, t, lambda, InfoGainMode::exact, 10, KlDirection::forward_kl, rb);
            double rel = std::abs(exact - approx) / exact;
            if (rel >= prev_rel) monotone = false;
            prev_rel = rel;
            rel_at_smallest = rel;
        }
        if (monotone && rel_at_smallest <= 1e-2) ok += 1;
    }
    CHECK(ok == 10);
}

TEST_CASE("info_gain_step: never mutates the posterior") {
    Rng rng = make_rng(21, 0);
    NetArch arch{{3, 4, 2}, Activation::relu};
    BnnPrior prior = make_prior(arch, softplus(0.5), 9);
    VariationalPosterior q = random_posterior(arch, rng);
    std::string before = serialize_posterior(q, prior);
    TransitionTriple t{{0.2, -0.5}, {0.7}, {0.1, 0.0}};
    for (InfoGainMode mode : {InfoGainMode::approx, InfoGainMode::exact}) {
        Rng r = make_rng(22, 0);
        info_gain_step(q, t, 0.01, mode, 10, KlDirection::reversed_kl, r);
    }
    CHECK(serialize_posterior(q, prior) == before);
}

TEST_CASE("posterior_refit: zero iterations give the current posterior back") {
    Rng rng = make_rng(23, 0);
    NetArch arch{{3, 4, 2}, Activation::relu};
    VariationalPosterior q = random_posterior(arch, rng);
    TransitionTriple t{{0.2, -0.5}, {0.7}, {0.1, 0.0}};
    AdamState adam(2 * q.param_count(), 1e-2);
    Rng r = make_rng(24, 0);
    VariationalPosterior cand = posterior_refit(q, t, 0, adam, 10, r);
    CHECK(kl_factorized(cand.mu, cand.sigma(), q.mu, q.sigma()) == doctest::Approx(0.0));
    CHECK(cand.mu == q.mu);
}

TEST_CASE("posterior_refit: surprising transitions move the posterior more") {
    // Train a model on a single repeated transition, then compare the refit
    // KL for that memorized transition against a far-off one.
    Rng rng = make_rng(25, 0);
    NetArch arch{{2, 8, 1}, Activation::relu};
    BnnPrior prior = make_prior(arch, softplus(0.5), 31);
    VariationalPosterior q = make_posterior(arch, prior);

    ReplayPool pool(200, 0);
    for (int i = 0; i < 50; ++i) pool.add({{0.5}, {0.2}, {0.3}});
    AdamState adam(2 * q.param_count() + 1, 1e-2);
    train_elbo(q, prior, pool, 400, 10, adam, 10, rng);

    TransitionTriple memorized{{0.5}, {0.2}, {0.3}};
    TransitionTriple surprising{{0.5}, {0.2}, {8.0}};

    AdamState a1(2 * q.param_count(), 1e-2), a2(2 * q.param_count(), 1e-2);
    Rng r1 = make_rng(26, 0), r2 = make_rng(26, 0);
    VariationalPosterior c1 = posterior_refit(q, memorized, 20, a1, 10, r1);
    VariationalPosterior c2 = posterior_refit(q, surprising, 20, a2, 10, r2);
    double kl_mem = kl_factorized(c1.mu, c1.sigma(), q.mu, q.sigma());
    double kl_sur = kl_factorized(c2.mu, c2.sigma(), q.mu, q.sigma());
    CHECK(kl_sur > kl_mem);

    // and the same ordering holds for the second-order scores
    Rng r3 = make_rng(27, 0), r4 = make_rng(27, 0);
    double ig_mem = info_gain_step(q, memorized, 0.01, InfoGainMode::approx, 10,
                                   KlDirection::forward_kl, r3);
    double ig_sur = info_gain_step(q, surprising, 0.01, InfoGainMode::approx, 10,
                                   KlDirection::forward_kl, r4);
    CHECK(ig_sur > ig_mem);
}

TEST_CASE("posterior serialization round-trips bitwise") {
    Rng rng = make_rng(28, 0);
    NetArch arch{{3, 4, 2}, Activation::relu};
    BnnPrior prior = make_prior(arch, softplus(0.5), 123);
    VariationalPosterior q = random_posterior(arch, rng);
    std::string text = serialize_posterior(q, prior);
    PosteriorSnapshot snap = deserialize_posterior(text);
    CHECK(snap.posterior.mu == q.mu);
    CHECK(snap.posterior.rho == q.rho);
    CHECK(snap.posterior.likelihood_log_std == q.likelihood_log_std);
    CHECK(snap.posterior.arch.sizes == q.arch.sizes);
    CHECK(snap.prior_seed == 123);
    CHECK(snap.prior_sigma == prior.sigma);
    CHECK(serialize_posterior(snap.posterior, prior) == text);
}
