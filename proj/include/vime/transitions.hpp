#pragma once

#include <deque>
#include <stdexcept>

#include "vime/linalg.hpp"
#include "vime/rng.hpp"

namespace vime {

// One (s_t, a_t, s_{t+1}) sample; the unit of replay storage and of
// information-gain scoring.
struct TransitionTriple {
    Vec state;
    Vec action;
    Vec next_state;
};

struct TransitionBatch {
    Mat states;
    Mat actions;
    Mat next_states;

    std::size_t rows() const { return states.rows; }
};

// Bounded FIFO store with uniform with-replacement sampling.
class ReplayPool {
public:
    ReplayPool(std::size_t capacity, std::size_t min_size)
        : capacity_(capacity), min_size_(min_size) {
        if (capacity == 0) throw std::invalid_argument("ReplayPool: capacity must be positive");
    }

    void add(TransitionTriple t) {
        if (!buf_.empty()) {
            if (t.state.size() != buf_.front().state.size() ||
                t.action.size() != buf_.front().action.size() ||
                t.next_state.size() != buf_.front().next_state.size())
                throw std::invalid_argument("ReplayPool::add: dimension mismatch");
        }
        buf_.push_back(std::move(t));
        if (buf_.size() > capacity_) buf_.pop_front();
    }

    std::size_t size() const { return buf_.size(); }
    std::size_t capacity() const { return capacity_; }
    std::size_t min_size() const { return min_size_; }
    bool ready() const { return buf_.size() >= min_size_; }

    const TransitionTriple& operator[](std::size_t i) const { return buf_[i]; }

    TransitionBatch sample(std::size_t n, Rng& rng) const {
        if (buf_.empty()) throw std::runtime_error("ReplayPool::sample: empty pool");
        std::size_t sd = buf_.front().state.size();
        std::size_t ad = buf_.front().action.size();
        std::size_t nd = buf_.front().next_state.size();
        TransitionBatch batch;
        batch.states = Mat(n, sd);
        batch.actions = Mat(n, ad);
        batch.next_states = Mat(n, nd);
        for (std::size_t r = 0; r < n; ++r) {
            const TransitionTriple& t = buf_[uniform_index(rng, buf_.size())];
            for (std::size_t j = 0; j < sd; ++j) batch.states(r, j) = t.state[j];
            for (std::size_t j = 0; j < ad; ++j) batch.actions(r, j) = t.action[j];
            for (std::size_t j = 0; j < nd; ++j) batch.next_states(r, j) = t.next_state[j];
        }
        return batch;
    }

private:
    std::size_t capacity_;
    std::size_t min_size_;
    std::deque<TransitionTriple> buf_;
};

inline TransitionBatch single_transition_batch(const TransitionTriple& t) {
    TransitionBatch b;
    b.states = Mat(1, t.state.size());
    b.actions = Mat(1, t.action.size());
    b.next_states = Mat(1, t.next_state.size());
    for (std::size_t j = 0; j < t.state.size(); ++j) b.states(0, j) = t.state[j];
    for (std::size_t j = 0; j < t.action.size(); ++j) b.actions(0, j) = t.action[j];
    for (std::size_t j = 0; j < t.next_state.size(); ++j) b.next_states(0, j) = t.next_state[j];
    return b;
}

}  // namespace vime
