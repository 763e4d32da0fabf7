#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "aed/gmm.hpp"
#include "aed/mlp.hpp"
#include "aed/svm.hpp"

namespace aed {

enum class DetectorKind { svm, mlp };

struct LabeledBoaw {
    BoawVector boaw;
    int y = 0;           // 1 = positive/target, 0 = negative
    double weight = 1.0; // per-sample cost multiplier (SVM only)
};

struct TrainLogEntry {
    int iteration = 0;
    int num_pseudo_pos = 0;
    int num_pseudo_neg = 0;
};

// Identifies what a detector was trained for; carried into the model file.
struct DetectorContext {
    std::string class_name;
    std::vector<int> fold_set;
};

// Binary scorer for one target class. Scores are always in [0, 1]: Platt
// calibrated margins for the SVM, softmax positive probability for the MLP.
struct Detector {
    DetectorKind kind = DetectorKind::svm;
    std::string class_name;
    std::vector<int> fold_set;
    int input_dim = 0;
    std::uint64_t seed = 0;
    std::vector<TrainLogEntry> train_log;

    svm::Model svm_model;
    svm::PlattCalibration calibration;
    mlp::Network net;

    double score(const BoawVector& x) const;
    double score(const std::vector<double>& alpha) const;
};

struct SvmTrainDiag {
    svm::TrainDiag dual;
    std::vector<double> raw_margins; // on the training data, in order
};

// Linear SVM on BoAW vectors, C defaulting to 0.01, followed by Platt
// calibration fitted on a seeded stratified 20% subset of `data`.
// Requires at least one positive and one negative.
Detector train_svm(const std::vector<LabeledBoaw>& data, double c, std::uint64_t seed,
                   const DetectorContext& ctx = {}, SvmTrainDiag* diag = nullptr);

// The SVM update path is a full retrain on everything accumulated so far;
// contract identical to train_svm.
Detector retrain_svm(const std::vector<LabeledBoaw>& data, double c, std::uint64_t seed,
                     const DetectorContext& ctx = {}, SvmTrainDiag* diag = nullptr);

// MLP detector: input -> 100 tanh units (dropout 0.5 while training) -> 2-way
// softmax, cross-entropy, SGD(batch 32, lr 0.01, momentum 0.9), 10 epochs.
// `options` is a test hook; the defaults are the production parameters.
Detector train_mlp(const std::vector<LabeledBoaw>& data, std::uint64_t seed,
                   const DetectorContext& ctx = {}, const mlp::TrainOptions& options = {});

// Quick update: two further SGD epochs over new_data plus replay, without
// reinitializing weights. Appends a train_log entry counting the new
// pseudo-labels.
Detector update_mlp(const Detector& det, const std::vector<LabeledBoaw>& new_data,
                    const std::vector<LabeledBoaw>& replay);

// Seeded 25% sample of the original labeled training set, used as replay when
// updating MLPs.
std::vector<LabeledBoaw> make_replay_sample(const std::vector<LabeledBoaw>& base,
                                            std::uint64_t seed, double fraction = 0.25);

std::string detector_to_json(const Detector& det);
Detector detector_from_json(const std::string& text);
void save_detector(const Detector& det, const std::string& path);
Detector load_detector(const std::string& path);

} // namespace aed
