#include "aed/svm.hpp"

#include <algorithm>
#include <cmath>

#include "aed/error.hpp"
#include "aed/rng.hpp"

namespace aed {
namespace svm {

double Model::margin(const std::vector<double>& x) const {
    if (x.size() != weights.size()) {
        throw ValidationError("feature dimension " + std::to_string(x.size()) +
                              " does not match SVM dimension " + std::to_string(weights.size()));
    }
    double acc = bias;
    for (std::size_t d = 0; d < x.size(); ++d) acc += weights[d] * x[d];
    return acc;
}

Model train(const std::vector<std::vector<double>>& xs, const std::vector<int>& ys,
            const std::vector<double>& sample_weights, const TrainOptions& options,
            std::uint64_t seed, TrainDiag* diag) {
    const std::size_t n = xs.size();
    if (n == 0) throw ValidationError("empty training set");
    if (ys.size() != n || sample_weights.size() != n) {
        throw ValidationError("mismatched training array lengths");
    }
    const std::size_t dim = xs[0].size();
    for (const auto& x : xs) {
        if (x.size() != dim) throw ValidationError("inconsistent feature dimensions");
        for (double v : x) {
            if (!std::isfinite(v)) throw NumericError("non-finite feature value");
        }
    }

    // Augmented-bias formulation: w has dim+1 entries, the last multiplying a
    // constant 1 feature.
    std::vector<double> w(dim + 1, 0.0);
    std::vector<double> alpha(n, 0.0);
    std::vector<double> upper(n);
    std::vector<double> q_ii(n);
    for (std::size_t i = 0; i < n; ++i) {
        upper[i] = options.c * sample_weights[i];
        double q = 1.0; // bias feature
        for (double v : xs[i]) q += v * v;
        q_ii[i] = q;
    }

    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;

    Rng rng(derive_seed(seed, 0x73766d /*svm*/));
    int epoch = 0;
    bool converged = false;
    for (; epoch < options.max_epochs; ++epoch) {
        rng.shuffle(order);
        double max_violation = 0.0;
        for (std::size_t idx = 0; idx < n; ++idx) {
            const std::size_t i = order[idx];
            const double y = ys[i] > 0 ? 1.0 : -1.0;
            double wx = w[dim];
            const auto& x = xs[i];
            for (std::size_t d = 0; d < dim; ++d) wx += w[d] * x[d];
            const double g = y * wx - 1.0;

            double pg = g;
            if (alpha[i] <= 0.0) {
                pg = std::min(g, 0.0);
            } else if (alpha[i] >= upper[i]) {
                pg = std::max(g, 0.0);
            }
            max_violation = std::max(max_violation, std::abs(pg));
            if (std::abs(pg) > 1e-12) {
                const double next = std::clamp(alpha[i] - g / q_ii[i], 0.0, upper[i]);
                const double delta = (next - alpha[i]) * y;
                alpha[i] = next;
                for (std::size_t d = 0; d < dim; ++d) w[d] += delta * x[d];
                w[dim] += delta;
            }
        }
        if (max_violation < options.tol) {
            converged = true;
            ++epoch;
            break;
        }
    }

    Model model;
    model.weights.assign(w.begin(), w.begin() + static_cast<std::ptrdiff_t>(dim));
    model.bias = w[dim];
    if (diag) {
        diag->alphas = alpha;
        diag->upper_bound = upper;
        diag->epochs = epoch;
        diag->converged = converged;
    }
    return model;
}

double PlattCalibration::operator()(double margin) const {
    const double z = a * margin + b;
    // numerically stable logistic
    if (z >= 0.0) {
        const double e = std::exp(-z);
        return e / (1.0 + e);
    }
    return 1.0 / (1.0 + std::exp(z));
}

PlattCalibration fit_platt(const std::vector<double>& margins, const std::vector<int>& ys) {
    // Newton fit of the two-parameter sigmoid with Platt's smoothed targets
    // (Lin, Lin & Weng 2007).
    const std::size_t n = margins.size();
    if (n == 0 || ys.size() != n) throw ValidationError("empty or mismatched calibration data");

    double num_pos = 0.0;
    double num_neg = 0.0;
    for (int y : ys) (y > 0 ? num_pos : num_neg) += 1.0;

    const double hi_target = (num_pos + 1.0) / (num_pos + 2.0);
    const double lo_target = 1.0 / (num_neg + 2.0);
    std::vector<double> target(n);
    for (std::size_t i = 0; i < n; ++i) target[i] = ys[i] > 0 ? hi_target : lo_target;

    double a = 0.0;
    double b = std::log((num_neg + 1.0) / (num_pos + 1.0));

    auto objective = [&](double aa, double bb) {
        double obj = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double z = margins[i] * aa + bb;
            if (z >= 0.0) {
                obj += target[i] * z + std::log(1.0 + std::exp(-z));
            } else {
                obj += (target[i] - 1.0) * z + std::log(1.0 + std::exp(z));
            }
        }
        return obj;
    };

    const double min_step = 1e-10;
    const double sigma = 1e-12;
    double fval = objective(a, b);
    for (int it = 0; it < 100; ++it) {
        double h11 = sigma, h22 = sigma, h21 = 0.0, g1 = 0.0, g2 = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double z = margins[i] * a + b;
            double p, q;
            if (z >= 0.0) {
                const double e = std::exp(-z);
                p = e / (1.0 + e);
                q = 1.0 / (1.0 + e);
            } else {
                const double e = std::exp(z);
                p = 1.0 / (1.0 + e);
                q = e / (1.0 + e);
            }
            const double d2 = p * q;
            h11 += margins[i] * margins[i] * d2;
            h22 += d2;
            h21 += margins[i] * d2;
            const double d1 = target[i] - p;
            g1 += margins[i] * d1;
            g2 += d1;
        }
        if (std::abs(g1) < 1e-5 && std::abs(g2) < 1e-5) break;

        const double det = h11 * h22 - h21 * h21;
        const double da = -(h22 * g1 - h21 * g2) / det;
        const double db = -(-h21 * g1 + h11 * g2) / det;
        const double gd = g1 * da + g2 * db;

        double step = 1.0;
        while (step >= min_step) {
            const double na = a + step * da;
            const double nb = b + step * db;
            const double nf = objective(na, nb);
            if (nf < fval + 1e-4 * step * gd) {
                a = na;
                b = nb;
                fval = nf;
                break;
            }
            step /= 2.0;
        }
        if (step < min_step) break;
    }

    PlattCalibration cal;
    if (!std::isfinite(a) || !std::isfinite(b) || a >= 0.0) {
        // Degenerate calibration data (e.g. anti-correlated margins on a tiny
        // holdout). Keep the score monotone in the margin.
        cal.a = -1.0;
        cal.b = 0.0;
    } else {
        cal.a = a;
        cal.b = b;
    }
    return cal;
}

} // namespace svm
} // namespace aed
