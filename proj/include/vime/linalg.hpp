#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace vime {

using Vec = std::vector<double>;

// Dense row-major matrix. Small enough that we own the storage outright.
struct Mat {
    std::size_t rows = 0;
    std::size_t cols = 0;
    Vec data;

    Mat() = default;
    Mat(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}

    double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

    const double* row(std::size_t r) const { return data.data() + r * cols; }
    double* row(std::size_t r) { return data.data() + r * cols; }
};

inline double dot(const Vec& a, const Vec& b) {
    if (a.size() != b.size()) throw std::invalid_argument("dot: size mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

// y += alpha * x
inline void axpy(double alpha, const Vec& x, Vec& y) {
    if (x.size() != y.size()) throw std::invalid_argument("axpy: size mismatch");
    for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

inline Vec scaled(const Vec& x, double alpha) {
    Vec out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = alpha * x[i];
    return out;
}

inline double norm2(const Vec& x) { return std::sqrt(dot(x, x)); }

inline double max_abs(const Vec& x) {
    double m = 0.0;
    for (double v : x) m = std::max(m, std::abs(v));
    return m;
}

inline bool all_finite(const Vec& x) {
    for (double v : x)
        if (!std::isfinite(v)) return false;
    return true;
}

inline double clip(double v, double lo, double hi) { return std::min(hi, std::max(lo, v)); }

inline double mean(const Vec& x) {
    if (x.empty()) return 0.0;
    double s = 0.0;
    for (double v : x) s += v;
    return s / static_cast<double>(x.size());
}

// Population standard deviation (divides by n).
inline double stddev(const Vec& x) {
    if (x.empty()) return 0.0;
    double mu = mean(x);
    double s = 0.0;
    for (double v : x) s += (v - mu) * (v - mu);
    return std::sqrt(s / static_cast<double>(x.size()));
}

// Median with the midpoint rule for even lengths.
inline double median(Vec x) {
    if (x.empty()) throw std::invalid_argument("median: empty input");
    std::sort(x.begin(), x.end());
    std::size_t n = x.size();
    if (n % 2 == 1) return x[n / 2];
    return 0.5 * (x[n / 2 - 1] + x[n / 2]);
}

// Linear-interpolation quantile, q in [0, 1].
inline double quantile(Vec x, double q) {
    if (x.empty()) throw std::invalid_argument("quantile: empty input");
    std::sort(x.begin(), x.end());
    double pos = q * static_cast<double>(x.size() - 1);
    std::size_t lo = static_cast<std::size_t>(pos);
    std::size_t hi = std::min(lo + 1, x.size() - 1);
    double frac = pos - static_cast<double>(lo);
    return x[lo] * (1.0 - frac) + x[hi] * frac;
}

}  // namespace vime
