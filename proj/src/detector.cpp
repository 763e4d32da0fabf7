#include "aed/detector.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <json.hpp>

#include "aed/error.hpp"
#include "aed/rng.hpp"

namespace aed {

using nlohmann::json;

namespace {

void check_two_classes(const std::vector<LabeledBoaw>& data) {
    if (data.empty()) throw ValidationError("empty training set");
    bool has_pos = false;
    bool has_neg = false;
    for (const auto& d : data) {
        if (d.y != 0 && d.y != 1) throw ValidationError("labels must be 0 or 1");
        (d.y == 1 ? has_pos : has_neg) = true;
    }
    if (!has_pos || !has_neg) throw ValidationError("single-class data");
}

// Stratified seeded subset with at least one sample per class.
std::vector<std::size_t> calibration_subset(const std::vector<LabeledBoaw>& data,
                                            std::uint64_t seed, double fraction) {
    std::vector<std::size_t> pos, neg;
    for (std::size_t i = 0; i < data.size(); ++i) (data[i].y == 1 ? pos : neg).push_back(i);
    Rng rng(derive_seed(seed, 0x63616c /*cal*/));
    rng.shuffle(pos);
    rng.shuffle(neg);
    const auto take = [&](std::vector<std::size_t>& v) {
        const std::size_t k =
            std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(fraction * v.size())));
        v.resize(std::min(k, v.size()));
    };
    take(pos);
    take(neg);
    std::vector<std::size_t> subset;
    subset.insert(subset.end(), pos.begin(), pos.end());
    subset.insert(subset.end(), neg.begin(), neg.end());
    std::sort(subset.begin(), subset.end());
    return subset;
}

Detector train_svm_impl(const std::vector<LabeledBoaw>& data, double c, std::uint64_t seed,
                        const DetectorContext& ctx, SvmTrainDiag* diag) {
    check_two_classes(data);
    if (c <= 0.0) throw ValidationError("svm cost parameter must be positive");

    std::vector<std::vector<double>> xs(data.size());
    std::vector<int> ys(data.size());
    std::vector<double> weights(data.size());
    for (std::size_t i = 0; i < data.size(); ++i) {
        xs[i] = data[i].boaw.alpha;
        ys[i] = data[i].y == 1 ? 1 : -1;
        weights[i] = data[i].weight;
    }

    svm::TrainOptions options;
    options.c = c;
    Detector det;
    det.kind = DetectorKind::svm;
    det.class_name = ctx.class_name;
    det.fold_set = ctx.fold_set;
    det.input_dim = static_cast<int>(xs[0].size());
    det.seed = seed;
    det.svm_model = svm::train(xs, ys, weights, options, seed, diag ? &diag->dual : nullptr);

    const auto subset = calibration_subset(data, seed, 0.2);
    std::vector<double> cal_margins;
    std::vector<int> cal_ys;
    cal_margins.reserve(subset.size());
    for (std::size_t i : subset) {
        cal_margins.push_back(det.svm_model.margin(xs[i]));
        cal_ys.push_back(ys[i]);
    }
    det.calibration = svm::fit_platt(cal_margins, cal_ys);

    if (diag) {
        diag->raw_margins.resize(xs.size());
        for (std::size_t i = 0; i < xs.size(); ++i) diag->raw_margins[i] = det.svm_model.margin(xs[i]);
    }
    det.train_log.push_back({0, 0, 0});
    return det;
}

} // namespace

double Detector::score(const std::vector<double>& alpha) const {
    if (static_cast<int>(alpha.size()) != input_dim) {
        throw ValidationError("BoAW dimension " + std::to_string(alpha.size()) +
                              " does not match detector input " + std::to_string(input_dim));
    }
    if (kind == DetectorKind::svm) {
        return calibration(svm_model.margin(alpha));
    }
    return mlp::score_positive(net, alpha);
}

double Detector::score(const BoawVector& x) const { return score(x.alpha); }

Detector train_svm(const std::vector<LabeledBoaw>& data, double c, std::uint64_t seed,
                   const DetectorContext& ctx, SvmTrainDiag* diag) {
    return train_svm_impl(data, c, seed, ctx, diag);
}

Detector retrain_svm(const std::vector<LabeledBoaw>& data, double c, std::uint64_t seed,
                     const DetectorContext& ctx, SvmTrainDiag* diag) {
    return train_svm_impl(data, c, seed, ctx, diag);
}

Detector train_mlp(const std::vector<LabeledBoaw>& data, std::uint64_t seed,
                   const DetectorContext& ctx, const mlp::TrainOptions& options) {
    check_two_classes(data);

    std::vector<std::vector<double>> xs(data.size());
    std::vector<int> ys(data.size());
    for (std::size_t i = 0; i < data.size(); ++i) {
        xs[i] = data[i].boaw.alpha;
        ys[i] = data[i].y;
    }

    Detector det;
    det.kind = DetectorKind::mlp;
    det.class_name = ctx.class_name;
    det.fold_set = ctx.fold_set;
    det.input_dim = static_cast<int>(xs[0].size());
    det.seed = seed;
    det.net = mlp::init_network(det.input_dim, 100, seed);
    mlp::train(det.net, xs, ys, options, seed);
    det.train_log.push_back({0, 0, 0});
    return det;
}

Detector update_mlp(const Detector& det, const std::vector<LabeledBoaw>& new_data,
                    const std::vector<LabeledBoaw>& replay) {
    if (det.kind != DetectorKind::mlp) throw ValidationError("update_mlp requires an mlp detector");
    if (new_data.empty()) throw ValidationError("update_mlp requires nonempty new data");

    std::vector<std::vector<double>> xs;
    std::vector<int> ys;
    xs.reserve(new_data.size() + replay.size());
    int num_pos = 0;
    int num_neg = 0;
    for (const auto& d : new_data) {
        xs.push_back(d.boaw.alpha);
        ys.push_back(d.y);
        (d.y == 1 ? num_pos : num_neg) += 1;
    }
    for (const auto& d : replay) {
        xs.push_back(d.boaw.alpha);
        ys.push_back(d.y);
    }

    Detector updated = det;
    const int iteration = det.train_log.empty() ? 1 : det.train_log.back().iteration + 1;
    mlp::TrainOptions options;
    options.epochs = 2;
    mlp::train(updated.net, xs, ys, options, derive_seed(det.seed, 0x757064 /*upd*/, iteration));
    updated.train_log.push_back({iteration, num_pos, num_neg});
    return updated;
}

std::vector<LabeledBoaw> make_replay_sample(const std::vector<LabeledBoaw>& base,
                                            std::uint64_t seed, double fraction) {
    Rng rng(derive_seed(seed, 0x72706c /*rpl*/));
    const std::size_t k = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::llround(fraction * base.size())));
    auto idx = rng.sample_indices(base.size(), k);
    std::sort(idx.begin(), idx.end());
    std::vector<LabeledBoaw> out;
    out.reserve(idx.size());
    for (std::size_t i : idx) out.push_back(base[i]);
    return out;
}

std::string detector_to_json(const Detector& det) {
    json j;
    j["format"] = "aed-detector";
    j["version"] = 1;
    j["kind"] = det.kind == DetectorKind::svm ? "svm" : "mlp";
    j["class_name"] = det.class_name;
    j["fold_set"] = det.fold_set;
    j["input_dim"] = det.input_dim;
    j["seed"] = det.seed;
    json log = json::array();
    for (const auto& e : det.train_log) {
        log.push_back(json{{"iteration", e.iteration},
                           {"num_pseudo_pos", e.num_pseudo_pos},
                           {"num_pseudo_neg", e.num_pseudo_neg}});
    }
    j["train_log"] = log;
    if (det.kind == DetectorKind::svm) {
        j["svm"] = json{{"weights", det.svm_model.weights},
                        {"bias", det.svm_model.bias},
                        {"calibration", json{{"a", det.calibration.a}, {"b", det.calibration.b}}}};
    } else {
        j["mlp"] = json{{"hidden_dim", det.net.hidden_dim},
                        {"w1", det.net.w1},
                        {"b1", det.net.b1},
                        {"w2", det.net.w2},
                        {"b2", det.net.b2}};
    }
    return j.dump(2);
}

Detector detector_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& ex) {
        throw ParseError(std::string("bad detector file: ") + ex.what());
    }
    if (j.value("format", "") != "aed-detector") throw ParseError("not a detector file");

    Detector det;
    det.kind = j.at("kind").get<std::string>() == "svm" ? DetectorKind::svm : DetectorKind::mlp;
    det.class_name = j.at("class_name").get<std::string>();
    det.fold_set = j.at("fold_set").get<std::vector<int>>();
    det.input_dim = j.at("input_dim").get<int>();
    det.seed = j.at("seed").get<std::uint64_t>();
    for (const auto& e : j.at("train_log")) {
        det.train_log.push_back({e.at("iteration").get<int>(),
                                 e.at("num_pseudo_pos").get<int>(),
                                 e.at("num_pseudo_neg").get<int>()});
    }
    if (det.kind == DetectorKind::svm) {
        const json& s = j.at("svm");
        det.svm_model.weights = s.at("weights").get<std::vector<double>>();
        det.svm_model.bias = s.at("bias").get<double>();
        det.calibration.a = s.at("calibration").at("a").get<double>();
        det.calibration.b = s.at("calibration").at("b").get<double>();
    } else {
        const json& m = j.at("mlp");
        det.net.in_dim = det.input_dim;
        det.net.hidden_dim = m.at("hidden_dim").get<int>();
        det.net.w1 = m.at("w1").get<std::vector<double>>();
        det.net.b1 = m.at("b1").get<std::vector<double>>();
        det.net.w2 = m.at("w2").get<std::vector<double>>();
        det.net.b2 = m.at("b2").get<std::vector<double>>();
    }
    return det;
}

void save_detector(const Detector& det, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw IoError("cannot write detector: " + path);
    f << detector_to_json(det);
    if (!f) throw IoError("short write: " + path);
}

Detector load_detector(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot open detector: " + path);
    std::string text((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    return detector_from_json(text);
}

} // namespace aed
