#include "vime/envs.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace vime {

namespace {

void check_finite(const Vec& v, const char* what) {
    if (!all_finite(v)) throw std::invalid_argument(std::string(what) + ": non-finite values");
}

}  // namespace

// ---------------------------------------------------------------------------
// SparseMountainCar

SparseMountainCar::SparseMountainCar(int horizon, double reset_half_width)
    : reset_half_width_(reset_half_width) {
    spec_.state_dim = 2;
    spec_.action_dim = 1;
    spec_.horizon = horizon;
    spec_.action_bounds = {{-1.0, 1.0}};
}

Vec SparseMountainCar::reset(Rng& rng) const {
    double pos = -0.5;
    if (reset_half_width_ > 0.0)
        pos = uniform(rng, -0.5 - reset_half_width_, -0.5 + reset_half_width_);
    return {pos, 0.0};
}

StepResult SparseMountainCar::step(const Vec& state, const Vec& action) const {
    if (state.size() != 2 || action.size() != 1)
        throw std::invalid_argument("SparseMountainCar::step: dimension mismatch");
    check_finite(state, "SparseMountainCar state");
    check_finite(action, "SparseMountainCar action");
    double a = clip(action[0], -1.0, 1.0);
    double v = clip(state[1] + 0.001 * a - 0.0025 * std::cos(3.0 * state[0]), -0.07, 0.07);
    double x = clip(state[0] + v, -1.2, 0.6);
    if (x <= -1.2 && v < 0.0) v = 0.0;
    bool done = x >= 0.6;
    return {{x, v}, done ? 1.0 : 0.0, done};
}

// ---------------------------------------------------------------------------
// SparseCartpoleSwingup

namespace {
constexpr double kGravity = 9.8;
constexpr double kMassCart = 1.0;
constexpr double kMassPole = 0.1;
constexpr double kTotalMass = kMassCart + kMassPole;
constexpr double kPoleHalfLength = 0.5;
constexpr double kPoleMassLength = kMassPole * kPoleHalfLength;
constexpr double kForceScale = 10.0;
constexpr double kDt = 0.02;
constexpr double kTrackBound = 3.0;
}  // namespace

SparseCartpoleSwingup::SparseCartpoleSwingup(int horizon, double reset_perturbation)
    : reset_perturbation_(reset_perturbation) {
    spec_.state_dim = 4;
    spec_.action_dim = 1;
    spec_.horizon = horizon;
    spec_.action_bounds = {{-1.0, 1.0}};
}

Vec SparseCartpoleSwingup::reset(Rng& rng) const {
    double x = 0.0;
    double beta = std::numbers::pi;  // hanging down
    if (reset_perturbation_ > 0.0) {
        x += uniform(rng, -reset_perturbation_, reset_perturbation_);
        beta += uniform(rng, -reset_perturbation_, reset_perturbation_);
    }
    return {x, 0.0, beta, 0.0};
}

StepResult SparseCartpoleSwingup::step(const Vec& state, const Vec& action) const {
    if (state.size() != 4 || action.size() != 1)
        throw std::invalid_argument("SparseCartpoleSwingup::step: dimension mismatch");
    check_finite(state, "SparseCartpoleSwingup state");
    check_finite(action, "SparseCartpoleSwingup action");
    double x = state[0], x_dot = state[1], beta = state[2], beta_dot = state[3];
    double force = kForceScale * clip(action[0], -1.0, 1.0);
    double cos_b = std::cos(beta), sin_b = std::sin(beta);
    double temp = (force + kPoleMassLength * beta_dot * beta_dot * sin_b) / kTotalMass;
    double beta_acc = (kGravity * sin_b - cos_b * temp) /
                      (kPoleHalfLength * (4.0 / 3.0 - kMassPole * cos_b * cos_b / kTotalMass));
    double x_acc = temp - kPoleMassLength * beta_acc * cos_b / kTotalMass;

    x += kDt * x_dot;
    x_dot += kDt * x_acc;
    beta += kDt * beta_dot;
    beta_dot += kDt * beta_acc;

    bool done = std::abs(x) > kTrackBound;
    double reward = std::cos(beta) > 0.8 ? 1.0 : 0.0;
    return {{x, x_dot, beta, beta_dot}, reward, done};
}

// ---------------------------------------------------------------------------
// ChainEnv

ChainEnv::ChainEnv(int n, int horizon) : n_(n) {
    if (n < 2) throw std::invalid_argument("ChainEnv: need at least two states");
    spec_.state_dim = n;
    spec_.action_dim = 1;
    spec_.horizon = horizon;
    spec_.action_bounds = {{-1.0, 1.0}};
}

Vec ChainEnv::reset(Rng&) const {
    Vec s(n_, 0.0);
    s[0] = 1.0;
    return s;
}

StepResult ChainEnv::step(const Vec& state, const Vec& action) const {
    if (static_cast<int>(state.size()) != n_ || action.size() != 1)
        throw std::invalid_argument("ChainEnv::step: dimension mismatch");
    check_finite(action, "ChainEnv action");
    int pos = 0;
    for (int i = 0; i < n_; ++i)
        if (state[i] > 0.5) pos = i;
    int next = action[0] > 0.0 ? std::min(pos + 1, n_ - 1) : std::max(pos - 1, 0);
    Vec s(n_, 0.0);
    s[next] = 1.0;
    bool goal = (next == n_ - 1);
    return {std::move(s), goal ? 1.0 : 0.0, goal};
}

// ---------------------------------------------------------------------------

std::unique_ptr<Env> make_env(const std::string& name, int horizon) {
    if (name == "sparse-mountaincar") return std::make_unique<SparseMountainCar>(horizon);
    if (name == "sparse-cartpole-swingup") return std::make_unique<SparseCartpoleSwingup>(horizon);
    if (name.rfind("chain-", 0) == 0) {
        int n = std::stoi(name.substr(6));
        return std::make_unique<ChainEnv>(n, horizon);
    }
    throw std::invalid_argument("make_env: unknown environment '" + name + "'");
}

Mat visitation_grid(const std::vector<Vec>& states, int dim_i, int dim_j, int bins,
                    const std::array<double, 4>& bounds) {
    if (bins < 1) throw std::invalid_argument("visitation_grid: bins must be >= 1");
    Mat grid(bins, bins, 0.0);
    double xw = (bounds[1] - bounds[0]) / bins;
    double yw = (bounds[3] - bounds[2]) / bins;
    for (const Vec& s : states) {
        int bi = static_cast<int>(std::floor((s[dim_i] - bounds[0]) / xw));
        int bj = static_cast<int>(std::floor((s[dim_j] - bounds[2]) / yw));
        bi = std::max(0, std::min(bins - 1, bi));
        bj = std::max(0, std::min(bins - 1, bj));
        grid(bi, bj) += 1.0;
    }
    return grid;
}

}  // namespace vime
