#include "vime/posterior.hpp"

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <sstream>
#include <stdexcept>

#include "vime/rng.hpp"

namespace vime {

Vec sigma_from_rho(const Vec& rho) {
    Vec sigma(rho.size());
    for (std::size_t i = 0; i < rho.size(); ++i) sigma[i] = softplus(rho[i]);
    return sigma;
}

BnnPrior make_prior(const NetArch& arch, double sigma, std::uint64_t seed) {
    if (sigma <= 0.0) throw std::invalid_argument("make_prior: sigma must be positive");
    BnnPrior prior;
    prior.sigma = sigma;
    prior.seed = seed;
    Rng rng = make_rng(seed, /*stream=*/0xb11);
    prior.mu = normal_vec(rng, arch.param_count());
    return prior;
}

// softplus^{-1}(y) = log(e^y - 1)
static double inverse_softplus(double y) {
    if (y > 30.0) return y;
    return std::log(std::expm1(y));
}

VariationalPosterior make_posterior(const NetArch& arch, const BnnPrior& prior) {
    VariationalPosterior q;
    q.arch = arch;
    q.mu = prior.mu;
    q.rho.assign(arch.param_count(), inverse_softplus(prior.sigma));
    q.likelihood_log_std.assign(arch.output_dim(), 0.0);
    return q;
}

double kl_factorized(const Vec& mu, const Vec& sigma, const Vec& mu2, const Vec& sigma2) {
    std::size_t n = mu.size();
    if (sigma.size() != n || mu2.size() != n || sigma2.size() != n)
        throw std::invalid_argument("kl_factorized: length mismatch");
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (!(sigma[i] > 0.0) || !(sigma2[i] > 0.0))
            throw std::invalid_argument("kl_factorized: non-positive sigma");
        // (s/s')^2 - 1 - 2 log(s/s') + ((m'-m)/s')^2, folded to avoid the
        // cancellation of the raw per-term constants near q = q'.
        double d = sigma[i] / sigma2[i] - 1.0;
        double t = (mu2[i] - mu[i]) / sigma2[i];
        total += d * (d + 2.0) - 2.0 * std::log1p(d) + t * t;
    }
    return 0.5 * total;
}

double kl_to_prior(const VariationalPosterior& q, const BnnPrior& prior) {
    Vec ps(q.param_count(), prior.sigma);
    return kl_factorized(q.mu, q.sigma(), prior.mu, ps);
}

Vec hessian_diag_kl(const VariationalPosterior& q) {
    std::size_t P = q.param_count();
    Vec h(2 * P);
    for (std::size_t i = 0; i < P; ++i) {
        double sp = softplus(q.rho[i]);
        double sg = sigmoid(q.rho[i]);
        h[i] = 1.0 / (sp * sp);
        h[P + i] = 2.0 * sg * sg / (sp * sp);
    }
    return h;
}

static void write_hex_vec(std::ostringstream& out, const char* name, const Vec& v) {
    out << name;
    char buf[40];
    for (double x : v) {
        std::snprintf(buf, sizeof(buf), " %a", x);
        out << buf;
    }
    out << '\n';
}

std::string serialize_posterior(const VariationalPosterior& q, const BnnPrior& prior) {
    std::ostringstream out;
    out << "vime-posterior 1\n";
    out << "arch " << (q.arch.hidden == Activation::relu ? "relu" : "tanh");
    for (int s : q.arch.sizes) out << ' ' << s;
    out << '\n';
    char buf[64];
    std::snprintf(buf, sizeof(buf), "prior %a %" PRIu64 "\n", prior.sigma, prior.seed);
    out << buf;
    write_hex_vec(out, "mu", q.mu);
    write_hex_vec(out, "rho", q.rho);
    write_hex_vec(out, "log_std", q.likelihood_log_std);
    return out.str();
}

static Vec read_hex_vec(std::istringstream& line) {
    Vec v;
    std::string tok;
    while (line >> tok) v.push_back(std::strtod(tok.c_str(), nullptr));
    return v;
}

PosteriorSnapshot deserialize_posterior(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    PosteriorSnapshot snap{};
    bool saw_header = false;
    while (std::getline(in, line)) {
        std::istringstream ls(line);
        std::string key;
        ls >> key;
        if (key == "vime-posterior") {
            int version = 0;
            ls >> version;
            if (version != 1) throw std::runtime_error("deserialize_posterior: unsupported version");
            saw_header = true;
        } else if (key == "arch") {
            std::string act;
            ls >> act;
            snap.posterior.arch.hidden = (act == "relu") ? Activation::relu : Activation::tanh;
            int s;
            while (ls >> s) snap.posterior.arch.sizes.push_back(s);
        } else if (key == "prior") {
            std::string sig;
            ls >> sig >> snap.prior_seed;
            snap.prior_sigma = std::strtod(sig.c_str(), nullptr);
        } else if (key == "mu") {
            snap.posterior.mu = read_hex_vec(ls);
        } else if (key == "rho") {
            snap.posterior.rho = read_hex_vec(ls);
        } else if (key == "log_std") {
            snap.posterior.likelihood_log_std = read_hex_vec(ls);
        }
    }
    if (!saw_header) throw std::runtime_error("deserialize_posterior: missing header");
    if (snap.posterior.mu.size() != snap.posterior.rho.size() ||
        static_cast<int>(snap.posterior.mu.size()) != snap.posterior.arch.param_count())
        throw std::runtime_error("deserialize_posterior: inconsistent record");
    return snap;
}

}  // namespace vime
