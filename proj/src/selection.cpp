#include "aed/selection.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "aed/error.hpp"

namespace aed {

using nlohmann::json;

std::string to_string(Criterion c) {
    switch (c) {
        case Criterion::score: return "score";
        case Criterion::precision: return "precision";
        case Criterion::clarity: return "clarity";
    }
    return "score";
}

std::string to_string(Polarity p) {
    switch (p) {
        case Polarity::pseudo_positive: return "pseudo_positive";
        case Polarity::pseudo_negative: return "pseudo_negative";
        case Polarity::rejected: return "rejected";
    }
    return "rejected";
}

Criterion criterion_from_string(const std::string& s) {
    if (s == "score") return Criterion::score;
    if (s == "precision") return Criterion::precision;
    if (s == "clarity") return Criterion::clarity;
    throw ParseError("unknown criterion: " + s);
}

namespace {

// Candidates ranked by extremity: larger statistic first for positives,
// smaller first for negatives, ties by segment id ascending. `cap` bounds
// each polarity separately.
std::vector<CandidateDecision> assemble(std::vector<CandidateDecision> pos,
                                        std::vector<CandidateDecision> neg, int cap) {
    auto more_extreme_pos = [](const CandidateDecision& a, const CandidateDecision& b) {
        if (a.value != b.value) return a.value > b.value;
        return a.segment_id < b.segment_id;
    };
    auto more_extreme_neg = [](const CandidateDecision& a, const CandidateDecision& b) {
        if (a.value != b.value) return a.value < b.value;
        return a.segment_id < b.segment_id;
    };
    std::sort(pos.begin(), pos.end(), more_extreme_pos);
    std::sort(neg.begin(), neg.end(), more_extreme_neg);
    if (cap >= 0) {
        if (pos.size() > static_cast<std::size_t>(cap)) pos.resize(cap);
        if (neg.size() > static_cast<std::size_t>(cap)) neg.resize(cap);
    }
    pos.insert(pos.end(), neg.begin(), neg.end());
    return pos;
}

} // namespace

std::vector<CandidateDecision> select_by_score(const ScoreBank& bank, double theta_pos,
                                               double theta_neg, int cap,
                                               const std::string& class_name, int iteration) {
    if (!(theta_neg >= 0.0 && theta_neg < theta_pos && theta_pos <= 1.0)) {
        throw ValidationError("invalid score thresholds: need 0 <= theta_neg < theta_pos <= 1");
    }
    std::vector<CandidateDecision> pos, neg;
    for (const auto& [id, s] : bank.unlabeled_scores) {
        if (s >= theta_pos) {
            pos.push_back({id, class_name, Criterion::score, s, Polarity::pseudo_positive, iteration});
        } else if (s <= theta_neg) {
            neg.push_back({id, class_name, Criterion::score, s, Polarity::pseudo_negative, iteration});
        }
    }
    return assemble(std::move(pos), std::move(neg), cap);
}

double PrecisionCurve::operator()(double score) const {
    if (thresholds.empty()) throw ValidationError("empty precision curve");
    // Items scoring >= `score` are exactly the items at or above the smallest
    // threshold >= score; clamp outside the observed range.
    auto it = std::lower_bound(thresholds.begin(), thresholds.end(), score);
    if (it == thresholds.end()) return precision.back();
    return precision[static_cast<std::size_t>(it - thresholds.begin())];
}

PrecisionCurve precision_curve_from_scores(const std::vector<double>& scores,
                                           const std::vector<int>& labels) {
    if (scores.size() != labels.size()) throw ValidationError("mismatched curve input lengths");
    bool has_pos = false;
    bool has_neg = false;
    for (int y : labels) (y == 1 ? has_pos : has_neg) = true;
    if (!has_pos || !has_neg) throw ValidationError("precision curve needs both classes held out");

    std::vector<std::size_t> order(scores.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

    // Raw precision at each distinct score, walking thresholds downward.
    std::vector<double> desc_thresholds;
    std::vector<double> desc_precision;
    std::size_t tp = 0;
    std::size_t seen = 0;
    std::size_t i = 0;
    while (i < order.size()) {
        const double s = scores[order[i]];
        while (i < order.size() && scores[order[i]] == s) {
            ++seen;
            if (labels[order[i]] == 1) ++tp;
            ++i;
        }
        desc_thresholds.push_back(s);
        desc_precision.push_back(static_cast<double>(tp) / static_cast<double>(seen));
    }

    // Ascending order with the running max applied from the lowest threshold
    // up (equivalently: interpolated precision, non-increasing in recall).
    PrecisionCurve curve;
    curve.thresholds.assign(desc_thresholds.rbegin(), desc_thresholds.rend());
    curve.precision.assign(desc_precision.rbegin(), desc_precision.rend());
    double running = 0.0;
    for (double& p : curve.precision) {
        running = std::max(running, p);
        p = running;
    }
    return curve;
}

PrecisionCurves estimate_precision_curve(const Detector& det,
                                         const std::vector<LabeledBoaw>& heldout) {
    if (heldout.empty()) throw ValidationError("empty held-out set");
    std::vector<double> scores(heldout.size());
    std::vector<int> labels(heldout.size());
    for (std::size_t i = 0; i < heldout.size(); ++i) {
        scores[i] = det.score(heldout[i].boaw);
        labels[i] = heldout[i].y;
    }
    PrecisionCurves curves;
    curves.positive = precision_curve_from_scores(scores, labels);
    std::vector<double> neg_scores(scores.size());
    std::vector<int> neg_labels(labels.size());
    for (std::size_t i = 0; i < scores.size(); ++i) {
        neg_scores[i] = 1.0 - scores[i];
        neg_labels[i] = 1 - labels[i];
    }
    curves.negative = precision_curve_from_scores(neg_scores, neg_labels);
    return curves;
}

std::vector<CandidateDecision> select_by_precision(const ScoreBank& bank,
                                                   const PrecisionCurves& curves, double tau,
                                                   int cap, const std::string& class_name,
                                                   int iteration) {
    if (!(tau >= 0.0 && tau <= 1.0)) throw ValidationError("invalid precision threshold");
    std::vector<CandidateDecision> pos, neg;
    for (const auto& [id, s] : bank.unlabeled_scores) {
        const double p_pos = curves.positive(s);
        const double p_neg = curves.negative(1.0 - s);
        const bool take_pos = p_pos >= tau;
        const bool take_neg = p_neg >= tau;
        if (take_pos && take_neg) continue; // ambiguous under both curves
        if (take_pos) {
            pos.push_back(
                {id, class_name, Criterion::precision, p_pos, Polarity::pseudo_positive, iteration});
        } else if (take_neg) {
            neg.push_back(
                {id, class_name, Criterion::precision, p_neg, Polarity::pseudo_negative, iteration});
        }
    }
    // Negative extremity means higher negative-curve precision first.
    auto by_value_desc = [](const CandidateDecision& a, const CandidateDecision& b) {
        if (a.value != b.value) return a.value > b.value;
        return a.segment_id < b.segment_id;
    };
    std::sort(pos.begin(), pos.end(), by_value_desc);
    std::sort(neg.begin(), neg.end(), by_value_desc);
    if (cap >= 0) {
        if (pos.size() > static_cast<std::size_t>(cap)) pos.resize(cap);
        if (neg.size() > static_cast<std::size_t>(cap)) neg.resize(cap);
    }
    pos.insert(pos.end(), neg.begin(), neg.end());
    return pos;
}

double clarity_index(const ScoreBank& bank, const std::string& segment_id) {
    if (bank.pos_train_scores.empty() || bank.neg_train_scores.empty()) {
        throw ValidationError("clarity index needs nonempty positive and negative training scores");
    }
    const auto it = bank.unlabeled_scores.find(segment_id);
    if (it == bank.unlabeled_scores.end()) {
        throw ValidationError("unknown segment id: " + segment_id);
    }
    const double s = it->second;
    std::size_t pos_above = 0;
    for (double d : bank.pos_train_scores) {
        if (d > s) ++pos_above;
    }
    std::size_t neg_below = 0;
    for (double d : bank.neg_train_scores) {
        if (d < s) ++neg_below;
    }
    const double rl = static_cast<double>(pos_above) / bank.pos_train_scores.size();
    const double il = static_cast<double>(neg_below) / bank.neg_train_scores.size();
    return il - rl;
}

std::vector<CandidateDecision> select_by_clarity(const ScoreBank& bank, double theta_pos,
                                                 double theta_neg, int cap,
                                                 const std::string& class_name, int iteration) {
    if (!(theta_neg >= -1.0 && theta_neg < theta_pos && theta_pos <= 1.0)) {
        throw ValidationError("invalid clarity thresholds: need -1 <= theta_neg < theta_pos <= 1");
    }
    if (bank.pos_train_scores.empty() || bank.neg_train_scores.empty()) {
        throw ValidationError("clarity index needs nonempty positive and negative training scores");
    }

    // Pre-sorted training scores turn each CI into two binary searches.
    std::vector<double> d0 = bank.pos_train_scores;
    std::vector<double> d1 = bank.neg_train_scores;
    std::sort(d0.begin(), d0.end());
    std::sort(d1.begin(), d1.end());

    std::vector<CandidateDecision> pos, neg;
    for (const auto& [id, s] : bank.unlabeled_scores) {
        const auto pos_above =
            static_cast<double>(d0.end() - std::upper_bound(d0.begin(), d0.end(), s));
        const auto neg_below =
            static_cast<double>(std::lower_bound(d1.begin(), d1.end(), s) - d1.begin());
        const double ci = neg_below / static_cast<double>(d1.size()) -
                          pos_above / static_cast<double>(d0.size());
        if (ci >= theta_pos) {
            pos.push_back({id, class_name, Criterion::clarity, ci, Polarity::pseudo_positive, iteration});
        } else if (ci <= theta_neg) {
            neg.push_back({id, class_name, Criterion::clarity, ci, Polarity::pseudo_negative, iteration});
        }
    }
    return assemble(std::move(pos), std::move(neg), cap);
}

std::string decision_to_json_line(const CandidateDecision& d) {
    json j;
    j["segment_id"] = d.segment_id;
    j["class_name"] = d.class_name;
    j["criterion"] = to_string(d.criterion);
    j["value"] = d.value;
    j["polarity"] = to_string(d.polarity);
    j["iteration"] = d.iteration;
    return j.dump();
}

CandidateDecision decision_from_json_line(const std::string& line) {
    json j;
    try {
        j = json::parse(line);
    } catch (const json::exception& ex) {
        throw ParseError(std::string("bad ledger line: ") + ex.what());
    }
    CandidateDecision d;
    d.segment_id = j.at("segment_id").get<std::string>();
    d.class_name = j.at("class_name").get<std::string>();
    d.criterion = criterion_from_string(j.at("criterion").get<std::string>());
    d.value = j.at("value").get<double>();
    const std::string p = j.at("polarity").get<std::string>();
    if (p == "pseudo_positive") {
        d.polarity = Polarity::pseudo_positive;
    } else if (p == "pseudo_negative") {
        d.polarity = Polarity::pseudo_negative;
    } else if (p == "rejected") {
        d.polarity = Polarity::rejected;
    } else {
        throw ParseError("unknown polarity: " + p);
    }
    d.iteration = j.at("iteration").get<int>();
    return d;
}

} // namespace aed
