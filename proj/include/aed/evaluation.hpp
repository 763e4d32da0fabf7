#pragma once

#include <map>
#include <string>
#include <vector>

namespace aed {

// AP over the descending-score ranking, ties broken by stable original order:
// the mean of precision-at-rank over the positive items. Throws when there is
// no positive or the lengths differ.
double average_precision(const std::vector<double>& scores, const std::vector<int>& labels);

struct ApDetail {
    double ap = 0.0;
    int num_tied_items = 0; // items sharing a score with at least one other item
};

ApDetail average_precision_detail(const std::vector<double>& scores,
                                  const std::vector<int>& labels);

struct ClassApSummary {
    std::map<int, double> per_fold; // fold -> AP
    double fold_mean = 0.0;
};

struct EvalReport {
    std::map<std::string, ClassApSummary> per_class;
    double mean_ap = 0.0;               // mean over classes of fold-mean AP
    std::map<int, int> num_test_items;  // fold -> count
};

EvalReport build_report(const std::map<std::string, std::map<int, double>>& per_class_fold_ap,
                        const std::map<int, int>& num_test_items = {});

struct DiffReport {
    std::map<std::string, double> per_class_delta; // fold-mean(b) - fold-mean(a)
    double mean_delta = 0.0;
    std::vector<std::string> regressions; // classes whose fold-mean dropped
};

DiffReport diff_reports(const EvalReport& a, const EvalReport& b);

// Plain-text table: one row per class, one column per report, AP in
// percentage points, a Mean AP row at the bottom.
std::string render_comparison_table(const EvalReport& a, const EvalReport& b,
                                    const std::string& label_a, const std::string& label_b);
std::string render_report_table(const EvalReport& report, const std::string& label);

std::string report_to_json(const EvalReport& report);
EvalReport report_from_json(const std::string& text);
void save_report(const EvalReport& report, const std::string& path);
EvalReport load_report(const std::string& path);

} // namespace aed
