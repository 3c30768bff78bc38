#pragma once

#include <string>
#include <vector>

#include "vime/linalg.hpp"
#include "vime/rng.hpp"

namespace vime {

enum class Activation { relu, tanh };

// Fixed MLP topology. Hidden layers share one nonlinearity; the output layer
// is always linear.
struct NetArch {
    std::vector<int> sizes;  // [in, hidden..., out]
    Activation hidden = Activation::tanh;

    int num_layers() const { return static_cast<int>(sizes.size()) - 1; }
    int input_dim() const { return sizes.front(); }
    int output_dim() const { return sizes.back(); }

    // Flat layout per layer: weights (out x in, row-major) then biases (out).
    int weight_offset(int layer) const;
    int bias_offset(int layer) const;
    int param_count() const;

    bool operator==(const NetArch&) const = default;
};

struct ForwardCache {
    Vec input;                  // network input
    std::vector<Vec> preacts;   // pre-activation per layer
    std::vector<Vec> postacts;  // post-activation per layer (last = output)
};

// Feed-forward network over a flat parameter vector. Flat storage keeps the
// optimizer, the variational posterior, and gradient checks aligned on one
// indexing scheme.
struct DenseNet {
    NetArch arch;
    Vec params;

    DenseNet() = default;
    explicit DenseNet(NetArch a) : arch(std::move(a)), params(arch.param_count(), 0.0) {}

    double weight(int layer, int row, int col) const;
    double bias(int layer, int row) const;
};

DenseNet make_random_net(NetArch arch, Rng& rng, double output_scale = 1.0);

Vec forward(const DenseNet& net, const Vec& input, ForwardCache* cache = nullptr);

struct BackwardResult {
    Vec param_grad;
    Vec input_grad;
};

BackwardResult backward(const DenseNet& net, const ForwardCache& cache, const Vec& output_grad);

// Directional derivative of the output w.r.t. the parameters along tangent
// (a Jacobian-vector product). Input held fixed.
Vec forward_tangent(const DenseNet& net, const ForwardCache& cache, const Vec& tangent);

}  // namespace vime
