#pragma once

#include <deque>

#include "vime/linalg.hpp"

namespace vime {

// Scales raw per-step KLs by the average of the previous trajectories' median
// KLs. A trajectory never normalizes itself: its median enters the window only
// after its own values were divided.
class KlNormalizer {
public:
    explicit KlNormalizer(int window_length = 10, double floor = 1e-8)
        : window_length_(window_length), floor_(floor) {}

    double divisor() const {
        if (window_.empty()) return 1.0;
        double s = 0.0;
        for (double v : window_) s += v;
        double avg = s / static_cast<double>(window_.size());
        return avg > floor_ ? avg : floor_;
    }

    // Divide, then record this trajectory's median.
    Vec normalize_and_record(const Vec& raw_kls) {
        double div = divisor();
        Vec out(raw_kls.size());
        for (std::size_t i = 0; i < raw_kls.size(); ++i) out[i] = raw_kls[i] / div;
        if (!raw_kls.empty()) push(median(raw_kls));
        return out;
    }

    void push(double trajectory_median) {
        window_.push_back(trajectory_median);
        while (static_cast<int>(window_.size()) > window_length_) window_.pop_front();
    }

    std::size_t window_size() const { return window_.size(); }

private:
    int window_length_;
    double floor_;
    std::deque<double> window_;
};

}  // namespace vime
