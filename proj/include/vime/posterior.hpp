#pragma once

#include <cstdint>
#include <string>

#include "vime/dense_net.hpp"
#include "vime/linalg.hpp"

namespace vime {

inline double softplus(double x) {
    if (x > 30.0) return x + std::log1p(std::exp(-x));
    return std::log1p(std::exp(x));
}

inline double sigmoid(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    double e = std::exp(x);
    return e / (1.0 + e);
}

Vec sigma_from_rho(const Vec& rho);

// Fully factorized Gaussian over every weight and bias of `arch`, spread
// parametrized through the softplus so sigma stays positive. The observation
// noise of the likelihood is a point estimate, one log-std per output dim.
struct VariationalPosterior {
    NetArch arch;
    Vec mu;
    Vec rho;
    Vec likelihood_log_std;

    std::size_t param_count() const { return mu.size(); }
    Vec sigma() const { return sigma_from_rho(rho); }
};

// Factorized Gaussian prior: means drawn once per run, shared scalar sigma.
struct BnnPrior {
    Vec mu;
    double sigma = 1.0;
    std::uint64_t seed = 0;  // seed the means were drawn from, kept for snapshots
};

BnnPrior make_prior(const NetArch& arch, double sigma, std::uint64_t seed);

// Posterior initialized at the prior (rho chosen so softplus(rho) = sigma).
VariationalPosterior make_posterior(const NetArch& arch, const BnnPrior& prior);

// KL[N(mu, diag sigma^2) || N(mu2, diag sigma2^2)] between factorized
// Gaussians in closed form. Zero iff the parameters are equal.
double kl_factorized(const Vec& mu, const Vec& sigma, const Vec& mu2, const Vec& sigma2);

double kl_to_prior(const VariationalPosterior& q, const BnnPrior& prior);

// Diagonal of the Hessian of KL[q(phi) || q(phi0)] at phi = phi0, in (mu, rho)
// coordinates: entries [0, P) are d2/dmu_i^2 = 1/sigma_i^2, entries [P, 2P)
// are d2/drho_i^2 = 2 sigmoid(rho_i)^2 / sigma_i^2. Off-diagonals vanish.
Vec hessian_diag_kl(const VariationalPosterior& q);

// Versioned snapshot; doubles stored as hexfloats so round-trips are bitwise.
std::string serialize_posterior(const VariationalPosterior& q, const BnnPrior& prior);

struct PosteriorSnapshot {
    VariationalPosterior posterior;
    double prior_sigma;
    std::uint64_t prior_seed;
};

PosteriorSnapshot deserialize_posterior(const std::string& text);

}  // namespace vime
