#pragma once

#include <array>
#include <memory>
#include <string>
#include <vector>

#include "vime/linalg.hpp"
#include "vime/rng.hpp"

namespace vime {

struct EnvSpec {
    int state_dim = 0;
    int action_dim = 0;
    int horizon = 500;
    std::vector<std::array<double, 2>> action_bounds;  // per-dimension [low, high]
};

struct StepResult {
    Vec next_state;
    double reward = 0.0;
    bool done = false;
};

// Environments are pure: step is a function of (state, action) only, so
// rollouts can run in parallel without any shared mutable state.
class Env {
public:
    virtual ~Env() = default;
    virtual const EnvSpec& spec() const = 0;
    virtual Vec reset(Rng& rng) const = 0;
    virtual StepResult step(const Vec& state, const Vec& action) const = 0;
};

// Classic car-on-a-hill with reward only for escaping on the right.
// State (position, velocity); reward +1 and termination at position >= 0.6.
class SparseMountainCar final : public Env {
public:
    explicit SparseMountainCar(int horizon = 500, double reset_half_width = 0.1);
    const EnvSpec& spec() const override { return spec_; }
    Vec reset(Rng& rng) const override;
    StepResult step(const Vec& state, const Vec& action) const override;

private:
    EnvSpec spec_;
    double reset_half_width_;
};

// Cart-pole that starts hanging down; +1 per step while cos(angle) > 0.8.
// State (cart position, cart velocity, pole angle, pole angular velocity).
class SparseCartpoleSwingup final : public Env {
public:
    explicit SparseCartpoleSwingup(int horizon = 500, double reset_perturbation = 0.05);
    const EnvSpec& spec() const override { return spec_; }
    Vec reset(Rng& rng) const override;
    StepResult step(const Vec& state, const Vec& action) const override;

private:
    EnvSpec spec_;
    double reset_perturbation_;
};

// One-hot n-chain: action > 0 moves right, otherwise left; reward +1 only at
// the rightmost state, which terminates the episode.
class ChainEnv final : public Env {
public:
    explicit ChainEnv(int n, int horizon = 500);
    const EnvSpec& spec() const override { return spec_; }
    Vec reset(Rng& rng) const override;
    StepResult step(const Vec& state, const Vec& action) const override;
    int length() const { return n_; }

private:
    int n_;
    EnvSpec spec_;
};

// Registry: "sparse-mountaincar", "sparse-cartpole-swingup", "chain-N".
std::unique_ptr<Env> make_env(const std::string& name, int horizon = 500);

// 2-D histogram of visited states over two chosen dimensions. Out-of-range
// states land in the edge bins, so the counts always sum to states.size().
Mat visitation_grid(const std::vector<Vec>& states, int dim_i, int dim_j, int bins,
                    const std::array<double, 4>& bounds /* {xlo, xhi, ylo, yhi} */);

}  // namespace vime
