#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "aed/detector.hpp"
#include "aed/evaluation.hpp"
#include "aed/gmm.hpp"
#include "aed/manifest.hpp"
#include "aed/selection.hpp"

namespace aed {

struct SelfTrainConfig {
    DetectorKind detector_kind = DetectorKind::svm;
    Criterion criterion = Criterion::clarity;
    double score_theta_pos = 0.95;
    double score_theta_neg = 0.05;
    double precision_tau = 0.95;
    double clarity_theta_pos = 0.9;
    double clarity_theta_neg = -0.9;
    int cap = 2000;                          // per class per polarity per iteration
    int max_iterations = 10;
    double convergence_epsilon_points = 0.1; // Mean-AP percentage points
    bool include_pseudo_negatives = true;
    double svm_c = 0.01;
    std::uint64_t seed = 1;
    int jobs = 0;
};

struct AddedCounts {
    int pseudo_pos = 0;
    int pseudo_neg = 0;
};

// One row of the run history. Iteration 0 is the baseline and is written once,
// before any unlabeled data is touched.
struct IterationRecord {
    int iteration = 0;
    std::map<std::string, std::map<int, double>> per_class_fold_ap;
    double mean_ap = 0.0;
    std::map<std::string, AddedCounts> added; // per class, summed over fold sets
    double wall_time_s = 0.0;
    bool stalled = false;
};

struct RunHistory {
    std::vector<IterationRecord> records;
    int best_iteration = 0; // argmax mean AP over all records
    bool converged = false;
    bool stalled = false;
    std::uint64_t seed = 0;
    std::string manifest_hash;
};

// Everything derived from the corpus before any detector exists: features,
// one vocabulary per fold combination, and BoAW vectors for every clip under
// each fold-set's vocabulary.
struct FoldSetData {
    int left_out_fold = 0;
    std::vector<int> training_folds;
    Vocabulary vocabulary;
    std::map<std::string, std::vector<double>> labeled_alpha;
    std::map<std::string, std::vector<double>> unlabeled_alpha;
};

struct PreparedCorpus {
    Manifest labeled;
    Manifest unlabeled;
    std::vector<std::string> classes;
    std::vector<FoldSetData> fold_sets;
    int vocab_m = 0;
    MfccParams dsp;
    std::uint64_t seed = 0;
    std::string manifest_hash;
};

struct PrepareOptions {
    MfccParams dsp;
    int vocab_m = 128;
    GmmTrainOptions gmm;
    std::uint64_t seed = 1;
    int jobs = 0;
    std::string cache_dir; // feature cache, optional
};

// Decodes and featurizes every clip, trains the ten per-fold-set vocabularies
// and quantizes all clips under each. Manifest paths are resolved against the
// given base directories when relative.
PreparedCorpus prepare_corpus(const Manifest& labeled, const std::string& labeled_base,
                              const Manifest& unlabeled, const std::string& unlabeled_base,
                              const PrepareOptions& options);

struct DetectorSlot {
    Detector detector;
    std::vector<LabeledBoaw> base_train; // the 9 training folds, fixed at baseline
    std::vector<LabeledBoaw> pseudo;     // accumulated pseudo-labels
    double last_ap = 0.0;
};

struct LedgerEntry {
    int left_out_fold = 0;
    CandidateDecision decision;
};

struct SelfTrainState {
    const PreparedCorpus* corpus = nullptr;
    SelfTrainConfig config;
    // slot (fold_set index, class index) -> detector + training data
    std::vector<std::vector<DetectorSlot>> slots;
    std::vector<std::set<std::string>> pools; // remaining unlabeled ids per fold set
    std::vector<LedgerEntry> ledger;
    RunHistory history;
    int iteration = 0;
};

// Trains all per-class, per-fold-set detectors on labeled data only and
// records the baseline AP table as history record 0.
SelfTrainState run_baseline(const PreparedCorpus& corpus, const SelfTrainConfig& config);

// One self-training pass: score pools, select candidates, retrain, re-evaluate
// on the left-out folds, append history and ledger entries.
void run_iteration(SelfTrainState& state);

// Full loop: baseline, then iterations until the Mean-AP gain drops below
// convergence_epsilon_points, the selection stalls, or max_iterations.
// If persist_dir is nonempty, per-iteration models, the ledger and the run
// history are written beneath it.
RunHistory run_loop(const PreparedCorpus& corpus, const SelfTrainConfig& config,
                    SelfTrainState* out_state = nullptr, const std::string& persist_dir = "");

EvalReport report_from_record(const IterationRecord& record,
                              const std::map<int, int>& num_test_items = {});
std::map<int, int> test_item_counts(const PreparedCorpus& corpus);

std::string history_to_json(const RunHistory& history);
RunHistory history_from_json(const std::string& text);
// Serialization with wall times zeroed; equal signatures mean equal runs.
std::string history_signature(const RunHistory& history);

std::string config_to_json(const SelfTrainConfig& config);
SelfTrainConfig config_from_json(const std::string& text);

} // namespace aed
