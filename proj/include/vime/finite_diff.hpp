#pragma once

#include <cmath>
#include <functional>
#include <stdexcept>

#include "vime/linalg.hpp"

namespace vime {

// Central-difference gradient, (f(x+eps e_i) - f(x-eps e_i)) / (2 eps).
// Test oracle; deliberately independent of any backprop code path.
inline Vec finite_diff_grad(const std::function<double(const Vec&)>& f, Vec x, double eps) {
    Vec g(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        double xi = x[i];
        x[i] = xi + eps;
        double fp = f(x);
        x[i] = xi - eps;
        double fm = f(x);
        x[i] = xi;
        if (!std::isfinite(fp) || !std::isfinite(fm))
            throw std::runtime_error("finite_diff_grad: non-finite evaluation");
        g[i] = (fp - fm) / (2.0 * eps);
    }
    return g;
}

// Second central difference along coordinate i.
inline double finite_diff_second(const std::function<double(const Vec&)>& f, Vec x, std::size_t i,
                                 double eps) {
    double xi = x[i];
    double f0 = f(x);
    x[i] = xi + eps;
    double fp = f(x);
    x[i] = xi - eps;
    double fm = f(x);
    x[i] = xi;
    if (!std::isfinite(fp) || !std::isfinite(fm) || !std::isfinite(f0))
        throw std::runtime_error("finite_diff_second: non-finite evaluation");
    return (fp - 2.0 * f0 + fm) / (eps * eps);
}

}  // namespace vime
