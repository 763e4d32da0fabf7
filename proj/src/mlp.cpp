#include "aed/mlp.hpp"

#include <algorithm>
#include <cmath>

#include "aed/error.hpp"
#include "aed/rng.hpp"

namespace aed {
namespace mlp {

namespace {

struct Forward {
    std::vector<double> a1;   // tanh activations, after dropout scaling
    std::vector<double> tanh_z1;
    std::vector<double> prob; // softmax output
};

// mask entries are 0 or 1/keep (inverted dropout); pass nullptr for no dropout.
void forward_pass(const Network& net, const std::vector<double>& x, const double* mask,
                  Forward& f) {
    const int h = net.hidden_dim;
    f.tanh_z1.resize(h);
    f.a1.resize(h);
    for (int i = 0; i < h; ++i) {
        double z = net.b1[i];
        const double* row = net.w1.data() + static_cast<std::size_t>(i) * net.in_dim;
        for (int d = 0; d < net.in_dim; ++d) z += row[d] * x[d];
        f.tanh_z1[i] = std::tanh(z);
        f.a1[i] = mask ? f.tanh_z1[i] * mask[i] : f.tanh_z1[i];
    }
    double z2[Network::out_dim];
    for (int o = 0; o < Network::out_dim; ++o) {
        double z = net.b2[o];
        const double* row = net.w2.data() + static_cast<std::size_t>(o) * h;
        for (int i = 0; i < h; ++i) z += row[i] * f.a1[i];
        z2[o] = z;
    }
    const double mx = std::max(z2[0], z2[1]);
    const double e0 = std::exp(z2[0] - mx);
    const double e1 = std::exp(z2[1] - mx);
    f.prob.assign({e0 / (e0 + e1), e1 / (e0 + e1)});
}

struct Velocity {
    std::vector<double> w1, b1, w2, b2;
};

void accumulate_gradients(const Network& net, const std::vector<double>& x, int y,
                          const Forward& f, const double* mask, Gradients& g) {
    const int h = net.hidden_dim;
    double dz2[Network::out_dim];
    for (int o = 0; o < Network::out_dim; ++o) dz2[o] = f.prob[o] - (o == y ? 1.0 : 0.0);

    std::vector<double> dh(h, 0.0);
    for (int o = 0; o < Network::out_dim; ++o) {
        double* gw2 = g.w2.data() + static_cast<std::size_t>(o) * h;
        const double* w2 = net.w2.data() + static_cast<std::size_t>(o) * h;
        for (int i = 0; i < h; ++i) {
            gw2[i] += dz2[o] * f.a1[i];
            dh[i] += w2[i] * dz2[o];
        }
        g.b2[o] += dz2[o];
    }
    for (int i = 0; i < h; ++i) {
        const double da1 = mask ? dh[i] * mask[i] : dh[i];
        const double dz1 = da1 * (1.0 - f.tanh_z1[i] * f.tanh_z1[i]);
        g.b1[i] += dz1;
        double* gw1 = g.w1.data() + static_cast<std::size_t>(i) * net.in_dim;
        for (int d = 0; d < net.in_dim; ++d) gw1[d] += dz1 * x[d];
    }
}

void zero_gradients(const Network& net, Gradients& g) {
    g.w1.assign(net.w1.size(), 0.0);
    g.b1.assign(net.b1.size(), 0.0);
    g.w2.assign(net.w2.size(), 0.0);
    g.b2.assign(net.b2.size(), 0.0);
}

void apply_update(std::vector<double>& theta, std::vector<double>& vel,
                  const std::vector<double>& grad, double lr, double momentum, double inv_batch) {
    for (std::size_t i = 0; i < theta.size(); ++i) {
        vel[i] = momentum * vel[i] - lr * grad[i] * inv_batch;
        theta[i] += vel[i];
    }
}

} // namespace

Network init_network(int in_dim, int hidden_dim, std::uint64_t seed) {
    if (in_dim < 1 || hidden_dim < 1) throw ValidationError("network dimensions must be positive");
    Network net;
    net.in_dim = in_dim;
    net.hidden_dim = hidden_dim;
    net.w1.resize(static_cast<std::size_t>(hidden_dim) * in_dim);
    net.b1.assign(hidden_dim, 0.0);
    net.w2.resize(static_cast<std::size_t>(Network::out_dim) * hidden_dim);
    net.b2.assign(Network::out_dim, 0.0);

    Rng rng(derive_seed(seed, 0x6d6c70 /*mlp*/));
    const double lim1 = std::sqrt(6.0 / (in_dim + hidden_dim));
    for (double& w : net.w1) w = rng.uniform(-lim1, lim1);
    const double lim2 = std::sqrt(6.0 / (hidden_dim + Network::out_dim));
    for (double& w : net.w2) w = rng.uniform(-lim2, lim2);
    return net;
}

void train(Network& net, const std::vector<std::vector<double>>& xs, const std::vector<int>& ys,
           const TrainOptions& options, std::uint64_t seed) {
    const std::size_t n = xs.size();
    if (n == 0) throw ValidationError("empty training set");
    if (ys.size() != n) throw ValidationError("mismatched training array lengths");
    for (const auto& x : xs) {
        if (static_cast<int>(x.size()) != net.in_dim) {
            throw ValidationError("feature dimension does not match network input");
        }
        for (double v : x) {
            if (!std::isfinite(v)) throw NumericError("non-finite feature value");
        }
    }

    Rng rng(derive_seed(seed, 0x736764 /*sgd*/));
    const double keep = 1.0 - options.dropout;
    const bool use_dropout = options.dropout > 0.0;

    Velocity vel;
    vel.w1.assign(net.w1.size(), 0.0);
    vel.b1.assign(net.b1.size(), 0.0);
    vel.w2.assign(net.w2.size(), 0.0);
    vel.b2.assign(net.b2.size(), 0.0);

    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;

    Gradients grads;
    Forward f;
    std::vector<double> mask(net.hidden_dim, 1.0);

    for (int epoch = 0; epoch < options.epochs; ++epoch) {
        rng.shuffle(order);
        for (std::size_t start = 0; start < n; start += options.batch_size) {
            const std::size_t end = std::min(n, start + options.batch_size);
            zero_gradients(net, grads);
            for (std::size_t idx = start; idx < end; ++idx) {
                const std::size_t i = order[idx];
                const double* mask_ptr = nullptr;
                if (use_dropout) {
                    for (int hidx = 0; hidx < net.hidden_dim; ++hidx) {
                        mask[hidx] = rng.uniform() < keep ? 1.0 / keep : 0.0;
                    }
                    mask_ptr = mask.data();
                }
                forward_pass(net, xs[i], mask_ptr, f);
                accumulate_gradients(net, xs[i], ys[i], f, mask_ptr, grads);
            }
            const double inv_batch = 1.0 / static_cast<double>(end - start);
            apply_update(net.w1, vel.w1, grads.w1, options.learning_rate, options.momentum, inv_batch);
            apply_update(net.b1, vel.b1, grads.b1, options.learning_rate, options.momentum, inv_batch);
            apply_update(net.w2, vel.w2, grads.w2, options.learning_rate, options.momentum, inv_batch);
            apply_update(net.b2, vel.b2, grads.b2, options.learning_rate, options.momentum, inv_batch);
        }
    }
}

double score_positive(const Network& net, const std::vector<double>& x) {
    if (static_cast<int>(x.size()) != net.in_dim) {
        throw ValidationError("feature dimension " + std::to_string(x.size()) +
                              " does not match network input " + std::to_string(net.in_dim));
    }
    Forward f;
    forward_pass(net, x, nullptr, f);
    return f.prob[1];
}

double loss_and_gradients(const Network& net, const std::vector<std::vector<double>>& xs,
                          const std::vector<int>& ys, Gradients* grads) {
    if (xs.empty() || xs.size() != ys.size()) throw ValidationError("bad gradient-check batch");
    Gradients local;
    zero_gradients(net, local);
    Forward f;
    double loss = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        forward_pass(net, xs[i], nullptr, f);
        loss += -std::log(std::max(f.prob[ys[i]], 1e-300));
        accumulate_gradients(net, xs[i], ys[i], f, nullptr, local);
    }
    const double inv = 1.0 / static_cast<double>(xs.size());
    loss *= inv;
    if (grads) {
        auto scale = [&](std::vector<double>& v) {
            for (double& g : v) g *= inv;
        };
        *grads = std::move(local);
        scale(grads->w1);
        scale(grads->b1);
        scale(grads->w2);
        scale(grads->b2);
    }
    return loss;
}

} // namespace mlp
} // namespace aed
