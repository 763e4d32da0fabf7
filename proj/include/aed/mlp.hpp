#pragma once

#include <cstdint>
#include <vector>

namespace aed {
namespace mlp {

struct TrainOptions {
    int epochs = 10;
    int batch_size = 32;
    double learning_rate = 0.01;
    double momentum = 0.9;
    double dropout = 0.5; // on hidden activations, training only
};

// input -> hidden (tanh) -> 2 (softmax). Row-major weight storage.
struct Network {
    int in_dim = 0;
    int hidden_dim = 0;
    static constexpr int out_dim = 2;
    std::vector<double> w1; // hidden x in
    std::vector<double> b1; // hidden
    std::vector<double> w2; // out x hidden
    std::vector<double> b2; // out

    std::size_t num_params() const {
        return w1.size() + b1.size() + w2.size() + b2.size();
    }
};

// Glorot-uniform initialization, seeded.
Network init_network(int in_dim, int hidden_dim, std::uint64_t seed);

// Mini-batch SGD with momentum on the softmax cross-entropy loss. Training
// mutates `net` in place; velocities start at zero. Deterministic given seed.
void train(Network& net, const std::vector<std::vector<double>>& xs, const std::vector<int>& ys,
           const TrainOptions& options, std::uint64_t seed);

// Softmax probability of the positive unit, dropout off.
double score_positive(const Network& net, const std::vector<double>& x);

struct Gradients {
    std::vector<double> w1, b1, w2, b2;
};

// Mean cross-entropy over the batch plus analytic gradients, with dropout
// disabled. Used directly by training and by the finite-difference check.
double loss_and_gradients(const Network& net, const std::vector<std::vector<double>>& xs,
                          const std::vector<int>& ys, Gradients* grads);

} // namespace mlp
} // namespace aed
