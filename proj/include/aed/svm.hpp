#pragma once

#include <cstdint>
#include <vector>

namespace aed {
namespace svm {

struct TrainOptions {
    double c = 0.01;
    int max_epochs = 1000;
    double tol = 1e-4; // stop when the max projected-gradient violation drops below
};

struct Model {
    std::vector<double> weights;
    double bias = 0.0;

    double margin(const std::vector<double>& x) const;
};

struct TrainDiag {
    std::vector<double> alphas;      // dual variables at convergence
    std::vector<double> upper_bound; // c * weight_i per sample
    int epochs = 0;
    bool converged = false;
};

// L1-loss linear SVM via dual coordinate descent, with the bias handled as an
// augmented constant feature. Labels are +1/-1, per-sample costs are
// c * weight_i. Deterministic given the seed (hand-rolled epoch shuffles).
Model train(const std::vector<std::vector<double>>& xs, const std::vector<int>& ys,
            const std::vector<double>& sample_weights, const TrainOptions& options,
            std::uint64_t seed, TrainDiag* diag = nullptr);

// Platt sigmoid p = 1 / (1 + exp(a*margin + b)), fitted by the
// regularized-target Newton method. a < 0 for any sane fit; fit() falls back
// to (-1, 0) if the data is too degenerate to calibrate.
struct PlattCalibration {
    double a = -1.0;
    double b = 0.0;

    double operator()(double margin) const;
};

PlattCalibration fit_platt(const std::vector<double>& margins, const std::vector<int>& ys);

} // namespace svm
} // namespace aed
