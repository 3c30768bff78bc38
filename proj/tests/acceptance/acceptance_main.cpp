// Acceptance suite: runs every criterion end to end and prints one
// pass/fail line each. Exit code is the number of failed criteria.

#include <cmath>
#include <cstdio>
#include <deque>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "vime/experiment.hpp"
#include "vime/finite_diff.hpp"
#include "vime/updaters.hpp"

using namespace vime;
namespace fs = std::filesystem;

namespace {

int g_failures = 0;

void report(int idx, const std::string& name, bool pass, const std::string& detail) {
    std::printf("[%s] %2d. %s — %s\n", pass ? "PASS" : "FAIL", idx, name.c_str(), detail.c_str());
    std::fflush(stdout);
    if (!pass) g_failures += 1;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path work_dir() {
    fs::path p = fs::temp_directory_path() / "vime_acceptance";
    return p;
}

constexpr double kLog2Pi = 1.8378770664093453;

double gauss_logpdf(double x, double mu, double sigma) {
    double z = (x - mu) / sigma;
    return -0.5 * kLog2Pi - std::log(sigma) - 0.5 * z * z;
}

// ---------------------------------------------------------------------------

void criterion_1_kl_monte_carlo() {
    Rng rng = make_rng(101, 0);
    const int dims = 10, cases = 20, samples = 1000000;
    bool pass = true;
    double worst_z = 0.0;
    for (int c = 0; c < cases && pass; ++c) {
        Vec mu = normal_vec(rng, dims), mu2 = normal_vec(rng, dims);
        Vec s1(dims), s2(dims);
        for (auto& s : s1) s = std::exp(uniform(rng, -1.0, 1.0));
        for (auto& s : s2) s = std::exp(uniform(rng, -1.0, 1.0));
        double closed = kl_factorized(mu, s1, mu2, s2);
        double sum = 0.0, sumsq = 0.0;
        for (int i = 0; i < samples; ++i) {
            double ratio = 0.0;
            for (int d = 0; d < dims; ++d) {
                double x = mu[d] + s1[d] * normal(rng);
                ratio += gauss_logpdf(x, mu[d], s1[d]) - gauss_logpdf(x, mu2[d], s2[d]);
            }
            sum += ratio;
            sumsq += ratio * ratio;
        }
        double est = sum / samples;
        double se = std::sqrt(((sumsq / samples) - est * est) / (samples - 1));
        double z = std::abs(closed - est) / se;
        worst_z = std::max(worst_z, z);
        if (z > 3.0) pass = false;
    }
    char buf[128];
    std::snprintf(buf, sizeof(buf), "20 random 10-dim pairs vs 1e6-sample MC, worst |z| = %.2f",
                  worst_z);
    report(1, "closed-form KL matches Monte-Carlo estimate", pass, buf);
}

void criterion_2_hessian() {
    Rng rng = make_rng(102, 0);
    double worst = 0.0;
    for (int trial = 0; trial < 5; ++trial) {
        NetArch arch{{2, 3, 2}, Activation::relu};
        BnnPrior prior = make_prior(arch, softplus(0.5), rng());
        VariationalPosterior q = make_posterior(arch, prior);
        for (auto& m : q.mu) m = normal(rng);
        for (auto& r : q.rho) r = uniform(rng, -3.0, 3.0);
        std::size_t P = q.param_count();
        Vec h = hessian_diag_kl(q);
        Vec sigma0 = q.sigma();
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
            double fd2 = finite_diff_second(f_rho, {q.rho[i]}, 0, 1e-4);
            worst = std::max(worst, std::abs(fd2 - h[P + i]) / std::abs(h[P + i]));
        }
    }
    char buf[128];
    std::snprintf(buf, sizeof(buf), "max relative error %.3g (tolerance 1e-4)", worst);
    report(2, "analytic KL Hessian diagonal matches second differences", worst <= 1e-4, buf);
}

void criterion_3_taylor() {
    Rng rng = make_rng(103, 0);
    int ok = 0;
    double worst_small = 0.0;
    for (int trial = 0; trial < 10; ++trial) {
        NetArch arch{{3, 4, 2}, Activation::relu};
        BnnPrior prior = make_prior(arch, softplus(0.5), rng());
        VariationalPosterior q = make_posterior(arch, prior);
        for (auto& m : q.mu) m = 0.5 * normal(rng);
        for (auto& r : q.rho) r = uniform(rng, -3.0, 1.0);
        TransitionTriple t{{normal(rng), normal(rng)}, {normal(rng)}, {normal(rng), normal(rng)}};
        double prev = 1e300;
        bool monotone = true;
        double rel = 0.0;
        for (double lambda : {1e-1, 1e-2, 1e-3}) {
            Rng ra = make_rng(300 + trial, 1), rb = make_rng(300 + trial, 1);
            double approx =
                info_gain_step(q, t, lambda, InfoGainMode::approx, 10, KlDirection::forward_kl, ra);
            double exact =
                info_gain_step(q, t, lambda, InfoGainMode::exact, 10, KlDirection::forward_kl, rb);
            rel = std::abs(exact - approx) / exact;
            if (rel >= prev) monotone = false;
            prev = rel;
        }
        worst_small = std::max(worst_small, rel);
        if (monotone && rel <= 1e-2) ok += 1;
    }
    char buf[128];
    std::snprintf(buf, sizeof(buf), "%d/10 monotone, worst relative gap at lambda=1e-3: %.3g", ok,
                  worst_small);
    report(3, "second-order approximation tracks the exact stepped KL", ok == 10, buf);
}

void criterion_4_elbo_gradient() {
    Rng rng = make_rng(104, 0);
    NetArch arch{{4, 2, 1}, Activation::relu};
    BnnPrior prior = make_prior(arch, softplus(0.5), 44);
    VariationalPosterior q = make_posterior(arch, prior);
    for (auto& m : q.mu) m = 0.5 * normal(rng);
    for (auto& r : q.rho) r = uniform(rng, -2.0, 0.5);
    q.likelihood_log_std[0] = -0.4;

    TransitionBatch batch;
    batch.states = Mat(8, 3);
    batch.actions = Mat(8, 1);
    batch.next_states = Mat(8, 1);
    for (auto& v : batch.states.data) v = normal(rng);
    for (auto& v : batch.actions.data) v = normal(rng);
    for (auto& v : batch.next_states.data) v = normal(rng);
    PreactNoise noise = draw_noise(arch, 10, 8, rng);

    PosteriorGrad grad;
    elbo_with_noise(q, prior, batch, noise, 0.2, &grad);
    Vec analytic(grad.mu);
    analytic.insert(analytic.end(), grad.rho.begin(), grad.rho.end());
    analytic.insert(analytic.end(), grad.log_std.begin(), grad.log_std.end());

    std::size_t P = q.param_count();
    VariationalPosterior probe = q;
    auto f = [&](const Vec& p) {
        std::copy(p.begin(), p.begin() + P, probe.mu.begin());
        std::copy(p.begin() + P, p.begin() + 2 * P, probe.rho.begin());
        probe.likelihood_log_std[0] = p[2 * P];
        return elbo_with_noise(probe, prior, batch, noise, 0.2, nullptr);
    };
    Vec packed(q.mu);
    packed.insert(packed.end(), q.rho.begin(), q.rho.end());
    packed.push_back(q.likelihood_log_std[0]);
    Vec fd = finite_diff_grad(f, packed, 1e-5);
    Vec diff(analytic.size());
    for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = analytic[i] - fd[i];
    double rel = norm2(diff) / norm2(fd);
    char buf[128];
    std::snprintf(buf, sizeof(buf), "relative error %.3g on a 4-2-1 network, 8 rows", rel);
    report(4, "ELBO gradient matches finite differences under frozen noise", rel <= 1e-3, buf);
}

void criterion_5_surprise_spike() {
    BnnDemoConfig cfg;
    cfg.seed = 1;
    cfg.output_dir = (work_dir() / "demo_inject").string();
    BnnDemoResult inject = bnn_demo(cfg);

    BnnDemoConfig ctrl = cfg;
    ctrl.inject = false;
    ctrl.output_dir = (work_dir() / "demo_control").string();
    BnnDemoResult control = bnn_demo(ctrl);

    double std_ratio = inject.outside_std / std::max(inject.inside_std, 1e-300);
    bool pass = inject.spike_ratio >= 5.0 && control.control_max_ratio < 5.0 && std_ratio >= 3.0;
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "spike %.1fx (need >=5), control max %.2fx (need <5), std ratio %.1fx (need >=3)",
                  inject.spike_ratio, control.control_max_ratio, std_ratio);
    report(5, "out-of-range data spikes the posterior-shift trace", pass, buf);
}

}  // namespace

int main() {
    fs::remove_all(work_dir());
    fs::create_directories(work_dir());
    criterion_1_kl_monte_carlo();
    criterion_2_hessian();
    criterion_3_taylor();
    criterion_4_elbo_gradient();
    criterion_5_surprise_spike();
    std::printf("%d criteria failed\n", g_failures);
    return g_failures;
}
