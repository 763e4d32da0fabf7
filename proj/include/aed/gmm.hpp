#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "aed/mfcc.hpp"

namespace aed {

// M-dimensional soft-count histogram for one recording: the per-component
// posterior probabilities averaged over all frames. Entries are nonnegative
// and sum to 1.
struct BoawVector {
    std::string clip_id;
    std::vector<double> alpha;
};

struct GmmTrainOptions {
    int max_iterations = 200;
    double tol_per_frame = 1e-5;   // stop when per-frame log-likelihood gains less
    double variance_floor = 1e-3;
    int max_reinits = 10;          // starved-component reinitializations before failure
    std::size_t subsample_max = 2'000'000;
    int jobs = 0;                  // 0 = hardware concurrency
};

struct GmmTrainInfo {
    int iterations = 0;
    int reinits = 0;
    bool converged = false;
    double final_ll_per_frame = 0.0;
    std::vector<double> ll_history; // per-frame log-likelihood at each iteration
};

// Diagonal-covariance GMM "audio vocabulary". Each component is one audio
// word; weights live on the simplex and variances are floored.
struct Vocabulary {
    int m = 0;
    int dim = 0;
    std::vector<double> weights;   // M
    std::vector<double> means;     // M x dim, row-major
    std::vector<double> variances; // M x dim, row-major
    std::vector<int> training_folds;
    std::uint64_t seed = 0;
    MfccParams dsp;
    GmmTrainOptions options;
    GmmTrainInfo info;
};

// Fits the vocabulary by EM over pooled training frames (row-major N x dim).
// Initialization is k-means++ seeded from `seed`; pools larger than
// options.subsample_max are uniformly subsampled first. Per-frame
// log-likelihood is checked to be non-decreasing (tolerance 1e-9) on every
// iteration that did not reinitialize a component. Deterministic given the
// seed, including across jobs counts.
Vocabulary train_vocabulary(const std::vector<double>& frames, std::size_t num_frames, int dim,
                            int m, std::uint64_t seed, const GmmTrainOptions& options = {});

// Pr(k | x) for one frame, computed in log-space with max subtraction.
// The result is a probability vector of length M.
std::vector<double> posterior(const Vocabulary& vocab, const double* frame, int dim);
std::vector<double> posterior(const Vocabulary& vocab, const std::vector<double>& frame);

// P(k) = (1/T) sum_t Pr(k | x_t): posteriors averaged in frame order.
BoawVector quantize(const Vocabulary& vocab, const MfccMatrix& mfcc);

void save_vocabulary(const Vocabulary& vocab, const std::string& path);
Vocabulary load_vocabulary(const std::string& path);
std::string vocabulary_to_json(const Vocabulary& vocab);
Vocabulary vocabulary_from_json(const std::string& text);

} // namespace aed
