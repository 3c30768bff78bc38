#include "vime/dense_net.hpp"

#include <cmath>
#include <stdexcept>

namespace vime {

int NetArch::weight_offset(int layer) const {
    int off = 0;
    for (int k = 0; k < layer; ++k) off += sizes[k + 1] * sizes[k] + sizes[k + 1];
    return off;
}

int NetArch::bias_offset(int layer) const {
    return weight_offset(layer) + sizes[layer + 1] * sizes[layer];
}

int NetArch::param_count() const {
    if (sizes.size() < 2) throw std::invalid_argument("NetArch: need at least two layer sizes");
    return weight_offset(num_layers());
}

double DenseNet::weight(int layer, int row, int col) const {
    return params[arch.weight_offset(layer) + row * arch.sizes[layer] + col];
}

double DenseNet::bias(int layer, int row) const {
    return params[arch.bias_offset(layer) + row];
}

DenseNet make_random_net(NetArch arch, Rng& rng, double output_scale) {
    DenseNet net(std::move(arch));
    int L = net.arch.num_layers();
    for (int k = 0; k < L; ++k) {
        int in = net.arch.sizes[k];
        int out = net.arch.sizes[k + 1];
        double scale = 1.0 / std::sqrt(static_cast<double>(in));
        if (k == L - 1) scale *= output_scale;
        int woff = net.arch.weight_offset(k);
        for (int i = 0; i < out * in; ++i) net.params[woff + i] = scale * normal(rng);
        // biases stay zero
    }
    return net;
}

static double activate(double x, Activation a) {
    return a == Activation::relu ? (x > 0.0 ? x : 0.0) : std::tanh(x);
}

static double activate_grad(double pre, double post, Activation a) {
    return a == Activation::relu ? (pre > 0.0 ? 1.0 : 0.0) : 1.0 - post * post;
}

Vec forward(const DenseNet& net, const Vec& input, ForwardCache* cache) {
    const NetArch& arch = net.arch;
    if (static_cast<int>(input.size()) != arch.input_dim())
        throw std::invalid_argument("forward: input dimension mismatch");
    if (static_cast<int>(net.params.size()) != arch.param_count())
        throw std::invalid_argument("forward: parameter vector does not match architecture");

    if (cache) {
        cache->input = input;
        cache->preacts.assign(arch.num_layers(), {});
        cache->postacts.assign(arch.num_layers(), {});
    }

    Vec x = input;
    int L = arch.num_layers();
    for (int k = 0; k < L; ++k) {
        int in = arch.sizes[k];
        int out = arch.sizes[k + 1];
        const double* W = net.params.data() + arch.weight_offset(k);
        const double* b = net.params.data() + arch.bias_offset(k);
        Vec pre(out);
        for (int i = 0; i < out; ++i) {
            double s = b[i];
            const double* wrow = W + i * in;
            for (int j = 0; j < in; ++j) s += wrow[j] * x[j];
            pre[i] = s;
        }
        Vec post(out);
        bool last = (k == L - 1);
        for (int i = 0; i < out; ++i) post[i] = last ? pre[i] : activate(pre[i], arch.hidden);
        if (cache) {
            cache->preacts[k] = pre;
            cache->postacts[k] = post;
        }
        x = std::move(post);
    }
    return x;
}

BackwardResult backward(const DenseNet& net, const ForwardCache& cache, const Vec& output_grad) {
    const NetArch& arch = net.arch;
    int L = arch.num_layers();
    if (static_cast<int>(output_grad.size()) != arch.output_dim())
        throw std::invalid_argument("backward: output gradient dimension mismatch");
    if (static_cast<int>(cache.preacts.size()) != L)
        throw std::invalid_argument("backward: cache does not match architecture");

    BackwardResult res;
    res.param_grad.assign(arch.param_count(), 0.0);

    Vec g = output_grad;  // gradient w.r.t. post-activation of layer k
    for (int k = L - 1; k >= 0; --k) {
        int in = arch.sizes[k];
        int out = arch.sizes[k + 1];
        const Vec& x = (k == 0) ? cache.input : cache.postacts[k - 1];
        Vec dpre(out);
        bool last = (k == L - 1);
        for (int i = 0; i < out; ++i)
            dpre[i] = last ? g[i] : g[i] * activate_grad(cache.preacts[k][i], cache.postacts[k][i], arch.hidden);

        double* gW = res.param_grad.data() + arch.weight_offset(k);
        double* gb = res.param_grad.data() + arch.bias_offset(k);
        const double* W = net.params.data() + arch.weight_offset(k);
        Vec gx(in, 0.0);
        for (int i = 0; i < out; ++i) {
            double d = dpre[i];
            gb[i] += d;
            double* gwrow = gW + i * in;
            const double* wrow = W + i * in;
            for (int j = 0; j < in; ++j) {
                gwrow[j] += d * x[j];
                gx[j] += d * wrow[j];
            }
        }
        g = std::move(gx);
    }
    res.input_grad = std::move(g);
    return res;
}

Vec forward_tangent(const DenseNet& net, const ForwardCache& cache, const Vec& tangent) {
    const NetArch& arch = net.arch;
    if (tangent.size() != net.params.size())
        throw std::invalid_argument("forward_tangent: tangent size mismatch");

    int L = arch.num_layers();
    Vec dx(arch.input_dim(), 0.0);
    for (int k = 0; k < L; ++k) {
        int in = arch.sizes[k];
        int out = arch.sizes[k + 1];
        const Vec& x = (k == 0) ? cache.input : cache.postacts[k - 1];
        const double* W = net.params.data() + arch.weight_offset(k);
        const double* dW = tangent.data() + arch.weight_offset(k);
        const double* db = tangent.data() + arch.bias_offset(k);
        Vec dpre(out);
        for (int i = 0; i < out; ++i) {
            double s = db[i];
            const double* wrow = W + i * in;
            const double* dwrow = dW + i * in;
            for (int j = 0; j < in; ++j) s += dwrow[j] * x[j] + wrow[j] * dx[j];
            dpre[i] = s;
        }
        bool last = (k == L - 1);
        Vec dpost(out);
        for (int i = 0; i < out; ++i)
            dpost[i] = last ? dpre[i]
                            : dpre[i] * activate_grad(cache.preacts[k][i], cache.postacts[k][i], arch.hidden);
        dx = std::move(dpost);
    }
    return dx;
}

}  // namespace vime
