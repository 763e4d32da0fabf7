#pragma once

#include <map>
#include <string>
#include <vector>

#include "aed/detector.hpp"

namespace aed {

enum class Criterion { score, precision, clarity };
enum class Polarity { pseudo_positive, pseudo_negative, rejected };

std::string to_string(Criterion c);
std::string to_string(Polarity p);
Criterion criterion_from_string(const std::string& s);

// One pseudo-label decision: the audit-trail record written to the ledger.
struct CandidateDecision {
    std::string segment_id;
    std::string class_name;
    Criterion criterion = Criterion::score;
    double value = 0.0; // the criterion statistic (score, curve precision, or CI)
    Polarity polarity = Polarity::rejected;
    int iteration = 1;
};

// Detector scores needed by the selection criteria: labeled training
// positives (D0), labeled training negatives (D1), and the unlabeled pool.
struct ScoreBank {
    std::vector<double> pos_train_scores;        // D0
    std::vector<double> neg_train_scores;        // D1
    std::map<std::string, double> unlabeled_scores;
};

// Score thresholding: pseudo-positive iff score >= theta_pos, pseudo-negative
// iff score <= theta_neg, at most `cap` per polarity taken in order of
// extremity (ties by segment id, ascending).
std::vector<CandidateDecision> select_by_score(const ScoreBank& bank, double theta_pos,
                                               double theta_neg, int cap,
                                               const std::string& class_name, int iteration = 1);

// Step function score -> held-out precision. Raw precision is TP/(TP+FP)
// among held-out points scoring at or above each distinct score; the final
// curve is the running max from the lowest threshold up, which makes it
// non-increasing as recall grows.
struct PrecisionCurve {
    std::vector<double> thresholds; // ascending distinct held-out scores
    std::vector<double> precision;  // regularized value at each threshold

    double operator()(double score) const;
};

// Both directions from one held-out set: the positive-class curve over raw
// scores and the negative-class curve over (1 - score).
struct PrecisionCurves {
    PrecisionCurve positive;
    PrecisionCurve negative;
};

PrecisionCurve precision_curve_from_scores(const std::vector<double>& scores,
                                           const std::vector<int>& labels);
PrecisionCurves estimate_precision_curve(const Detector& det,
                                         const std::vector<LabeledBoaw>& heldout);

std::vector<CandidateDecision> select_by_precision(const ScoreBank& bank,
                                                   const PrecisionCurves& curves, double tau,
                                                   int cap, const std::string& class_name,
                                                   int iteration = 1);

// Clarity Index: IL - RL with I(z) = 1 iff z > 0 (ties contribute nothing).
// RL is the fraction of labeled positives outscoring the segment; IL the
// fraction of labeled negatives it outscores. Range [-1, 1].
double clarity_index(const ScoreBank& bank, const std::string& segment_id);

std::vector<CandidateDecision> select_by_clarity(const ScoreBank& bank, double theta_pos,
                                                 double theta_neg, int cap,
                                                 const std::string& class_name, int iteration = 1);

// Ledger serialization: one JSON object per line.
std::string decision_to_json_line(const CandidateDecision& d);
CandidateDecision decision_from_json_line(const std::string& line);

} // namespace aed
