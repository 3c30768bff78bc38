#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>

#include "vime/linalg.hpp"

namespace vime {

// Adam with bias correction, minimizing convention.
struct AdamState {
    Vec first_moment;
    Vec second_moment;
    long step_count = 0;
    double learning_rate;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;

    AdamState(std::size_t n, double lr)
        : first_moment(n, 0.0), second_moment(n, 0.0), learning_rate(lr) {}
};

// One descent step in place. Rejects non-finite gradients before touching any
// state so a bad step leaves params, moments, and the counter unchanged.
inline void adam_step(AdamState& state, Vec& params, const Vec& grads) {
    if (params.size() != grads.size() || params.size() != state.first_moment.size())
        throw std::invalid_argument("adam_step: shape mismatch");
    if (!all_finite(grads)) throw std::runtime_error("adam_step: non-finite gradient");

    state.step_count += 1;
    double b1t = 1.0 - std::pow(state.beta1, static_cast<double>(state.step_count));
    double b2t = 1.0 - std::pow(state.beta2, static_cast<double>(state.step_count));
    for (std::size_t i = 0; i < params.size(); ++i) {
        double m = state.beta1 * state.first_moment[i] + (1.0 - state.beta1) * grads[i];
        double v = state.beta2 * state.second_moment[i] + (1.0 - state.beta2) * grads[i] * grads[i];
        state.first_moment[i] = m;
        state.second_moment[i] = v;
        double mhat = m / b1t;
        double vhat = v / b2t;
        params[i] -= state.learning_rate * mhat / (std::sqrt(vhat) + state.epsilon);
    }
}

}  // namespace vime
