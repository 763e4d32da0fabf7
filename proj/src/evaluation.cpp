#include "aed/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <json.hpp>

#include "aed/error.hpp"

namespace aed {

using nlohmann::json;

ApDetail average_precision_detail(const std::vector<double>& scores,
                                  const std::vector<int>& labels) {
    if (scores.size() != labels.size()) throw ValidationError("scores/labels length mismatch");
    if (scores.empty()) throw ValidationError("empty ranking");
    std::size_t num_pos = 0;
    for (int y : labels) {
        if (y == 1) ++num_pos;
    }
    if (num_pos == 0) throw ValidationError("no positives in ranking");

    std::vector<std::size_t> order(scores.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

    double sum = 0.0;
    std::size_t tp = 0;
    for (std::size_t rank = 0; rank < order.size(); ++rank) {
        if (labels[order[rank]] == 1) {
            ++tp;
            sum += static_cast<double>(tp) / static_cast<double>(rank + 1);
        }
    }

    ApDetail out;
    out.ap = sum / static_cast<double>(num_pos);

    std::vector<double> sorted = scores;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t i = 0; i < sorted.size();) {
        std::size_t j = i;
        while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
        if (j - i > 1) out.num_tied_items += static_cast<int>(j - i);
        i = j;
    }
    return out;
}

double average_precision(const std::vector<double>& scores, const std::vector<int>& labels) {
    return average_precision_detail(scores, labels).ap;
}

EvalReport build_report(const std::map<std::string, std::map<int, double>>& per_class_fold_ap,
                        const std::map<int, int>& num_test_items) {
    if (per_class_fold_ap.empty()) throw ValidationError("empty report input");
    EvalReport report;
    double class_mean_sum = 0.0;
    for (const auto& [class_name, folds] : per_class_fold_ap) {
        if (folds.empty()) throw ValidationError("class with no fold APs: " + class_name);
        ClassApSummary summary;
        summary.per_fold = folds;
        double s = 0.0;
        for (const auto& [fold, ap] : folds) {
            if (ap < 0.0 || ap > 1.0) {
                throw ValidationError("AP outside [0,1] for class " + class_name + " fold " +
                                      std::to_string(fold));
            }
            s += ap;
        }
        summary.fold_mean = s / static_cast<double>(folds.size());
        class_mean_sum += summary.fold_mean;
        report.per_class.emplace(class_name, std::move(summary));
    }
    report.mean_ap = class_mean_sum / static_cast<double>(per_class_fold_ap.size());
    report.num_test_items = num_test_items;
    return report;
}

DiffReport diff_reports(const EvalReport& a, const EvalReport& b) {
    if (a.per_class.size() != b.per_class.size()) {
        throw ValidationError("reports cover different class sets");
    }
    DiffReport diff;
    for (const auto& [class_name, summary_a] : a.per_class) {
        const auto it = b.per_class.find(class_name);
        if (it == b.per_class.end()) {
            throw ValidationError("class missing from second report: " + class_name);
        }
        const double delta = it->second.fold_mean - summary_a.fold_mean;
        diff.per_class_delta[class_name] = delta;
        if (delta < 0.0) diff.regressions.push_back(class_name);
    }
    diff.mean_delta = b.mean_ap - a.mean_ap;
    return diff;
}

namespace {

std::string fmt_pct(double v) {
    std::ostringstream os;
    os << std::fixed << std::setprecision(1) << v * 100.0;
    return os.str();
}

std::string fmt_delta(double v) {
    std::ostringstream os;
    os << std::showpos << std::fixed << std::setprecision(1) << v * 100.0;
    return os.str();
}

void emit_row(std::ostringstream& os, const std::string& name, const std::string& a,
              const std::string& b, const std::string& d) {
    os << std::left << std::setw(20) << name << std::right << std::setw(10) << a << std::setw(10)
       << b << std::setw(10) << d << "\n";
}

} // namespace

std::string render_comparison_table(const EvalReport& a, const EvalReport& b,
                                    const std::string& label_a, const std::string& label_b) {
    const DiffReport diff = diff_reports(a, b);
    std::ostringstream os;
    emit_row(os, "Category", label_a, label_b, "Delta");
    for (const auto& [class_name, summary_a] : a.per_class) {
        const auto& summary_b = b.per_class.at(class_name);
        emit_row(os, class_name, fmt_pct(summary_a.fold_mean), fmt_pct(summary_b.fold_mean),
                 fmt_delta(diff.per_class_delta.at(class_name)));
    }
    emit_row(os, "Mean AP", fmt_pct(a.mean_ap), fmt_pct(b.mean_ap), fmt_delta(diff.mean_delta));
    return os.str();
}

std::string render_report_table(const EvalReport& report, const std::string& label) {
    std::ostringstream os;
    os << std::left << std::setw(20) << "Category" << std::right << std::setw(10) << label << "\n";
    for (const auto& [class_name, summary] : report.per_class) {
        os << std::left << std::setw(20) << class_name << std::right << std::setw(10)
           << fmt_pct(summary.fold_mean) << "\n";
    }
    os << std::left << std::setw(20) << "Mean AP" << std::right << std::setw(10)
       << fmt_pct(report.mean_ap) << "\n";
    return os.str();
}

std::string report_to_json(const EvalReport& report) {
    json j;
    j["format"] = "aed-report";
    j["version"] = 1;
    j["mean_ap"] = report.mean_ap;
    json classes = json::object();
    for (const auto& [class_name, summary] : report.per_class) {
        json folds = json::object();
        for (const auto& [fold, ap] : summary.per_fold) folds[std::to_string(fold)] = ap;
        classes[class_name] = json{{"per_fold", folds}, {"fold_mean", summary.fold_mean}};
    }
    j["per_class"] = classes;
    json counts = json::object();
    for (const auto& [fold, count] : report.num_test_items) counts[std::to_string(fold)] = count;
    j["num_test_items"] = counts;
    return j.dump(2);
}

EvalReport report_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& ex) {
        throw ParseError(std::string("bad report file: ") + ex.what());
    }
    if (j.value("format", "") != "aed-report") throw ParseError("not a report file");
    EvalReport report;
    report.mean_ap = j.at("mean_ap").get<double>();
    for (const auto& [class_name, body] : j.at("per_class").items()) {
        ClassApSummary summary;
        summary.fold_mean = body.at("fold_mean").get<double>();
        for (const auto& [fold, ap] : body.at("per_fold").items()) {
            summary.per_fold[std::stoi(fold)] = ap.get<double>();
        }
        report.per_class.emplace(class_name, std::move(summary));
    }
    for (const auto& [fold, count] : j.at("num_test_items").items()) {
        report.num_test_items[std::stoi(fold)] = count.get<int>();
    }
    return report;
}

void save_report(const EvalReport& report, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw IoError("cannot write report: " + path);
    f << report_to_json(report);
    if (!f) throw IoError("short write: " + path);
}

EvalReport load_report(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot open report: " + path);
    std::string text((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    return report_from_json(text);
}

} // namespace aed
