#include "aed/selftrain.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <memory>

#include <json.hpp>

#include "aed/audio.hpp"
#include "aed/error.hpp"
#include "aed/feature_cache.hpp"
#include "aed/parallel.hpp"
#include "aed/rng.hpp"

namespace aed {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr std::uint64_t kTagVocab = 0x766f63;
constexpr std::uint64_t kTagDetector = 0x646574;
constexpr std::uint64_t kTagReplay = 0x72706c;

std::string resolve_path(const std::string& base, const std::string& path) {
    fs::path p(path);
    if (p.is_absolute() || base.empty()) return path;
    return (fs::path(base) / p).string();
}

MfccMatrix features_for_entry(const ManifestEntry& entry, const std::string& base,
                              const MfccParams& dsp, const FeatureCache* cache) {
    if (cache) {
        if (auto hit = cache->load(entry.id, dsp)) return std::move(*hit);
    }
    AudioClip clip = decode_and_normalize(resolve_path(base, entry.path));
    clip.id = entry.id;
    MfccMatrix m = extract_mfcc(clip, dsp);
    round_to_float32(m);
    if (cache) cache->store(m, dsp);
    return m;
}

double elapsed_s(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

json added_to_json(const std::map<std::string, AddedCounts>& added) {
    json j = json::object();
    for (const auto& [class_name, counts] : added) {
        j[class_name] = json{{"pseudo_pos", counts.pseudo_pos}, {"pseudo_neg", counts.pseudo_neg}};
    }
    return j;
}

} // namespace

PreparedCorpus prepare_corpus(const Manifest& labeled, const std::string& labeled_base,
                              const Manifest& unlabeled, const std::string& unlabeled_base,
                              const PrepareOptions& options) {
    validate_manifest(labeled);
    validate_manifest(unlabeled);
    if (labeled.entries.empty()) throw ValidationError("labeled manifest is empty");

    PreparedCorpus corpus;
    corpus.labeled = labeled;
    corpus.unlabeled = unlabeled;
    corpus.classes = labeled.class_names();
    corpus.vocab_m = options.vocab_m;
    corpus.dsp = options.dsp;
    corpus.seed = options.seed;

    {
        std::string blob;
        for (const auto& e : labeled.entries) blob += e.id + "|" + (e.label ? *e.label : "") + "\n";
        for (const auto& e : unlabeled.entries) blob += e.id + "\n";
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%016llx",
                      static_cast<unsigned long long>(fnv1a64(blob.data(), blob.size())));
        corpus.manifest_hash = buf;
    }

    std::unique_ptr<FeatureCache> cache;
    if (!options.cache_dir.empty()) cache = std::make_unique<FeatureCache>(options.cache_dir);

    // Features for every clip, parallel across clips.
    const std::size_t n_lab = labeled.entries.size();
    const std::size_t n_unl = unlabeled.entries.size();
    std::vector<MfccMatrix> lab_feats(n_lab);
    std::vector<MfccMatrix> unl_feats(n_unl);
    parallel_for(n_lab + n_unl, options.jobs, [&](std::size_t i) {
        if (i < n_lab) {
            lab_feats[i] = features_for_entry(labeled.entries[i], labeled_base, options.dsp,
                                              cache.get());
        } else {
            unl_feats[i - n_lab] = features_for_entry(unlabeled.entries[i - n_lab], unlabeled_base,
                                                      options.dsp, cache.get());
        }
    });

    std::set<int> fold_ids;
    for (const auto& e : labeled.entries) fold_ids.insert(*e.fold);

    corpus.fold_sets.resize(fold_ids.size());
    std::vector<int> folds(fold_ids.begin(), fold_ids.end());

    // One vocabulary per fold combination. Parallel across fold sets; the EM
    // and quantization inside each worker run single-threaded.
    parallel_for(folds.size(), options.jobs, [&](std::size_t fi) {
        const int left_out = folds[fi];
        FoldSetData& fsd = corpus.fold_sets[fi];
        fsd.left_out_fold = left_out;
        for (int f : folds) {
            if (f != left_out) fsd.training_folds.push_back(f);
        }

        std::size_t total_frames = 0;
        for (std::size_t i = 0; i < n_lab; ++i) {
            if (*labeled.entries[i].fold != left_out) total_frames += lab_feats[i].rows;
        }
        const int dim = options.dsp.feature_dim();
        std::vector<double> pool;
        pool.reserve(total_frames * static_cast<std::size_t>(dim));
        for (std::size_t i = 0; i < n_lab; ++i) {
            if (*labeled.entries[i].fold == left_out) continue;
            const MfccMatrix& m = lab_feats[i];
            pool.insert(pool.end(), m.data.begin(), m.data.end());
        }

        GmmTrainOptions gmm_options = options.gmm;
        gmm_options.jobs = 1;
        fsd.vocabulary = train_vocabulary(pool, total_frames, dim, options.vocab_m,
                                          derive_seed(options.seed, kTagVocab, left_out),
                                          gmm_options);
        fsd.vocabulary.training_folds = fsd.training_folds;
        fsd.vocabulary.dsp = options.dsp;

        for (std::size_t i = 0; i < n_lab; ++i) {
            fsd.labeled_alpha[labeled.entries[i].id] =
                quantize(fsd.vocabulary, lab_feats[i]).alpha;
        }
        for (std::size_t i = 0; i < n_unl; ++i) {
            fsd.unlabeled_alpha[unlabeled.entries[i].id] =
                quantize(fsd.vocabulary, unl_feats[i]).alpha;
        }
    });

    return corpus;
}

namespace {

Detector train_detector(const SelfTrainConfig& config, const std::vector<LabeledBoaw>& data,
                        const DetectorContext& ctx, std::uint64_t seed) {
    if (config.detector_kind == DetectorKind::svm) {
        return train_svm(data, config.svm_c, seed, ctx);
    }
    return train_mlp(data, seed, ctx);
}

double evaluate_slot(const PreparedCorpus& corpus, const FoldSetData& fsd,
                     const Detector& detector, const std::string& class_name) {
    std::vector<double> scores;
    std::vector<int> labels;
    for (const auto& e : corpus.labeled.entries) {
        if (*e.fold != fsd.left_out_fold) continue;
        scores.push_back(detector.score(fsd.labeled_alpha.at(e.id)));
        labels.push_back(*e.label == class_name ? 1 : 0);
    }
    return average_precision(scores, labels);
}

IterationRecord snapshot_record(const SelfTrainState& state, int iteration) {
    IterationRecord rec;
    rec.iteration = iteration;
    const auto& corpus = *state.corpus;
    double class_sum = 0.0;
    for (std::size_t ci = 0; ci < corpus.classes.size(); ++ci) {
        std::map<int, double> per_fold;
        double s = 0.0;
        for (std::size_t fi = 0; fi < corpus.fold_sets.size(); ++fi) {
            const double ap = state.slots[fi][ci].last_ap;
            per_fold[corpus.fold_sets[fi].left_out_fold] = ap;
            s += ap;
        }
        rec.per_class_fold_ap[corpus.classes[ci]] = std::move(per_fold);
        class_sum += s / static_cast<double>(corpus.fold_sets.size());
    }
    rec.mean_ap = class_sum / static_cast<double>(corpus.classes.size());
    return rec;
}

} // namespace

std::map<int, int> test_item_counts(const PreparedCorpus& corpus) {
    std::map<int, int> counts;
    for (const auto& e : corpus.labeled.entries) ++counts[*e.fold];
    return counts;
}

SelfTrainState run_baseline(const PreparedCorpus& corpus, const SelfTrainConfig& config) {
    if (corpus.fold_sets.size() != 10) {
        throw ValidationError("baseline protocol needs 10 folds, manifest has " +
                              std::to_string(corpus.fold_sets.size()));
    }
    if (corpus.classes.empty()) throw ValidationError("no classes in labeled manifest");

    // Every class must appear in every fold, otherwise some left-out fold has
    // no positives to rank.
    for (const auto& class_name : corpus.classes) {
        std::set<int> folds_with;
        for (const auto& e : corpus.labeled.entries) {
            if (*e.label == class_name) folds_with.insert(*e.fold);
        }
        for (const auto& fsd : corpus.fold_sets) {
            if (!folds_with.count(fsd.left_out_fold)) {
                throw ValidationError("class \"" + class_name + "\" missing from fold " +
                                      std::to_string(fsd.left_out_fold));
            }
        }
    }

    const auto start = std::chrono::steady_clock::now();
    SelfTrainState state;
    state.corpus = &corpus;
    state.config = config;
    state.slots.resize(corpus.fold_sets.size());
    state.pools.resize(corpus.fold_sets.size());
    for (std::size_t fi = 0; fi < corpus.fold_sets.size(); ++fi) {
        state.slots[fi].resize(corpus.classes.size());
        for (const auto& [id, alpha] : corpus.fold_sets[fi].unlabeled_alpha) {
            state.pools[fi].insert(id);
        }
    }

    const std::size_t n_classes = corpus.classes.size();
    const std::size_t n_work = corpus.fold_sets.size() * n_classes;
    parallel_for(n_work, config.jobs, [&](std::size_t w) {
        const std::size_t fi = w / n_classes;
        const std::size_t ci = w % n_classes;
        const FoldSetData& fsd = corpus.fold_sets[fi];
        const std::string& class_name = corpus.classes[ci];

        DetectorSlot& slot = state.slots[fi][ci];
        for (const auto& e : corpus.labeled.entries) {
            if (*e.fold == fsd.left_out_fold) continue;
            LabeledBoaw lb;
            lb.boaw.clip_id = e.id;
            lb.boaw.alpha = fsd.labeled_alpha.at(e.id);
            lb.y = *e.label == class_name ? 1 : 0;
            slot.base_train.push_back(std::move(lb));
        }
        const std::uint64_t det_seed =
            derive_seed(config.seed, kTagDetector, fsd.left_out_fold * 1000 + ci);
        DetectorContext ctx{class_name, fsd.training_folds};
        slot.detector = train_detector(config, slot.base_train, ctx, det_seed);
        slot.last_ap = evaluate_slot(corpus, fsd, slot.detector, class_name);
    });

    IterationRecord rec = snapshot_record(state, 0);
    rec.wall_time_s = elapsed_s(start);
    state.history.records.push_back(std::move(rec));
    state.history.seed = config.seed;
    state.history.manifest_hash = corpus.manifest_hash;
    return state;
}

void run_iteration(SelfTrainState& state) {
    const PreparedCorpus& corpus = *state.corpus;
    const SelfTrainConfig& config = state.config;
    const int iteration = ++state.iteration;
    const auto start = std::chrono::steady_clock::now();

    const std::size_t n_classes = corpus.classes.size();
    const std::size_t n_folds = corpus.fold_sets.size();

    // Phase 1: score the pools and select candidates, per (fold set, class).
    std::vector<std::vector<std::vector<CandidateDecision>>> selected(n_folds);
    for (auto& per_class : selected) per_class.resize(n_classes);

    parallel_for(n_folds * n_classes, config.jobs, [&](std::size_t w) {
        const std::size_t fi = w / n_classes;
        const std::size_t ci = w % n_classes;
        const FoldSetData& fsd = corpus.fold_sets[fi];
        const DetectorSlot& slot = state.slots[fi][ci];
        const std::string& class_name = corpus.classes[ci];

        ScoreBank bank;
        for (const auto& lb : slot.base_train) {
            const double s = slot.detector.score(lb.boaw.alpha);
            (lb.y == 1 ? bank.pos_train_scores : bank.neg_train_scores).push_back(s);
        }
        for (const auto& id : state.pools[fi]) {
            bank.unlabeled_scores[id] = slot.detector.score(fsd.unlabeled_alpha.at(id));
        }

        std::vector<CandidateDecision> picks;
        switch (config.criterion) {
            case Criterion::score:
                picks = select_by_score(bank, config.score_theta_pos, config.score_theta_neg,
                                        config.cap, class_name, iteration);
                break;
            case Criterion::clarity:
                picks = select_by_clarity(bank, config.clarity_theta_pos, config.clarity_theta_neg,
                                          config.cap, class_name, iteration);
                break;
            case Criterion::precision: {
                // Held-out fold of this fold set; the same fold drives the
                // stopping rule (documented optimistic-bias caveat).
                std::vector<LabeledBoaw> heldout;
                for (const auto& e : corpus.labeled.entries) {
                    if (*e.fold != fsd.left_out_fold) continue;
                    LabeledBoaw lb;
                    lb.boaw.clip_id = e.id;
                    lb.boaw.alpha = fsd.labeled_alpha.at(e.id);
                    lb.y = *e.label == class_name ? 1 : 0;
                    heldout.push_back(std::move(lb));
                }
                const PrecisionCurves curves = estimate_precision_curve(slot.detector, heldout);
                picks = select_by_precision(bank, curves, config.precision_tau, config.cap,
                                            class_name, iteration);
                break;
            }
        }
        if (!config.include_pseudo_negatives) {
            std::erase_if(picks, [](const CandidateDecision& d) {
                return d.polarity == Polarity::pseudo_negative;
            });
        }
        selected[fi][ci] = std::move(picks);
    });

    // Phase 2 (coordinator): apply selections in fixed order - ledger, pseudo
    // sets, pool removal.
    std::map<std::string, AddedCounts> added;
    bool any_selected = false;
    for (std::size_t fi = 0; fi < n_folds; ++fi) {
        std::set<std::string> remove;
        for (std::size_t ci = 0; ci < n_classes; ++ci) {
            const FoldSetData& fsd = corpus.fold_sets[fi];
            DetectorSlot& slot = state.slots[fi][ci];
            for (const auto& d : selected[fi][ci]) {
                any_selected = true;
                state.ledger.push_back({fsd.left_out_fold, d});
                LabeledBoaw lb;
                lb.boaw.clip_id = d.segment_id;
                lb.boaw.alpha = fsd.unlabeled_alpha.at(d.segment_id);
                lb.y = d.polarity == Polarity::pseudo_positive ? 1 : 0;
                slot.pseudo.push_back(std::move(lb));
                remove.insert(d.segment_id);
                auto& counts = added[d.class_name];
                (d.polarity == Polarity::pseudo_positive ? counts.pseudo_pos : counts.pseudo_neg) += 1;
            }
        }
        for (const auto& id : remove) state.pools[fi].erase(id);
    }

    // Phase 3: retrain slots that received candidates and re-evaluate.
    if (any_selected) {
        parallel_for(n_folds * n_classes, config.jobs, [&](std::size_t w) {
            const std::size_t fi = w / n_classes;
            const std::size_t ci = w % n_classes;
            if (selected[fi][ci].empty()) return;
            const FoldSetData& fsd = corpus.fold_sets[fi];
            DetectorSlot& slot = state.slots[fi][ci];
            const std::string& class_name = corpus.classes[ci];
            const std::uint64_t det_seed =
                derive_seed(config.seed, kTagDetector, fsd.left_out_fold * 1000 + ci);

            if (config.detector_kind == DetectorKind::svm) {
                // From scratch on labeled plus all accumulated pseudo-labels.
                std::vector<LabeledBoaw> all = slot.base_train;
                all.insert(all.end(), slot.pseudo.begin(), slot.pseudo.end());
                DetectorContext ctx{class_name, fsd.training_folds};
                slot.detector = retrain_svm(all, config.svm_c, det_seed, ctx);
            } else {
                std::vector<LabeledBoaw> fresh;
                for (const auto& d : selected[fi][ci]) {
                    LabeledBoaw lb;
                    lb.boaw.clip_id = d.segment_id;
                    lb.boaw.alpha = fsd.unlabeled_alpha.at(d.segment_id);
                    lb.y = d.polarity == Polarity::pseudo_positive ? 1 : 0;
                    fresh.push_back(std::move(lb));
                }
                const auto replay = make_replay_sample(
                    slot.base_train,
                    derive_seed(config.seed, kTagReplay,
                                (static_cast<std::uint64_t>(iteration) << 16) +
                                    fsd.left_out_fold * 1000 + ci));
                slot.detector = update_mlp(slot.detector, fresh, replay);
            }
            slot.last_ap = evaluate_slot(corpus, fsd, slot.detector, class_name);
        });
    }

    IterationRecord rec = snapshot_record(state, iteration);
    rec.added = std::move(added);
    rec.stalled = !any_selected;
    rec.wall_time_s = elapsed_s(start);
    state.history.records.push_back(std::move(rec));
}

namespace {

void persist_models(const SelfTrainState& state, const std::string& dir, int iteration) {
    const PreparedCorpus& corpus = *state.corpus;
    const fs::path model_dir = fs::path(dir) / "models" / ("iter" + std::to_string(iteration));
    fs::create_directories(model_dir);
    for (std::size_t fi = 0; fi < corpus.fold_sets.size(); ++fi) {
        for (std::size_t ci = 0; ci < corpus.classes.size(); ++ci) {
            const std::string name = corpus.classes[ci] + "_fold" +
                                     std::to_string(corpus.fold_sets[fi].left_out_fold) + ".json";
            save_detector(state.slots[fi][ci].detector, (model_dir / name).string());
        }
    }
}

void persist_ledger(const SelfTrainState& state, const std::string& dir) {
    const fs::path ledger_dir = fs::path(dir) / "ledger";
    fs::create_directories(ledger_dir);
    std::map<std::string, std::ofstream> files;
    for (const auto& entry : state.ledger) {
        const std::string key =
            entry.decision.class_name + "_fold" + std::to_string(entry.left_out_fold) + ".jsonl";
        auto it = files.find(key);
        if (it == files.end()) {
            it = files.emplace(key, std::ofstream((ledger_dir / key).string())).first;
        }
        it->second << decision_to_json_line(entry.decision) << "\n";
    }
}

} // namespace

RunHistory run_loop(const PreparedCorpus& corpus, const SelfTrainConfig& config,
                    SelfTrainState* out_state, const std::string& persist_dir) {
    if (config.max_iterations < 1) throw ValidationError("max_iterations must be >= 1");
    if (config.convergence_epsilon_points < 0.0) {
        throw ValidationError("convergence_epsilon must be >= 0");
    }

    SelfTrainState state = run_baseline(corpus, config);
    if (!persist_dir.empty()) persist_models(state, persist_dir, 0);

    for (int i = 1; i <= config.max_iterations; ++i) {
        run_iteration(state);
        if (!persist_dir.empty()) persist_models(state, persist_dir, i);
        const auto& records = state.history.records;
        if (records.back().stalled) {
            state.history.stalled = true;
            break;
        }
        const double gain_points =
            (records[records.size() - 1].mean_ap - records[records.size() - 2].mean_ap) * 100.0;
        if (gain_points < config.convergence_epsilon_points) {
            state.history.converged = true;
            break;
        }
    }

    // Persist the best iteration, not just the last: performance commonly
    // drifts down after convergence.
    int best = 0;
    for (std::size_t i = 1; i < state.history.records.size(); ++i) {
        if (state.history.records[i].mean_ap > state.history.records[best].mean_ap) {
            best = static_cast<int>(i);
        }
    }
    state.history.best_iteration = best;

    if (!persist_dir.empty()) {
        persist_ledger(state, persist_dir);
        const fs::path best_dir = fs::path(persist_dir) / "models" / "best";
        fs::create_directories(best_dir.parent_path());
        fs::remove_all(best_dir);
        fs::copy(fs::path(persist_dir) / "models" / ("iter" + std::to_string(best)), best_dir,
                 fs::copy_options::recursive);
        std::ofstream hf((fs::path(persist_dir) / "run.history.json").string());
        hf << history_to_json(state.history);
    }

    RunHistory history = state.history;
    if (out_state) *out_state = std::move(state);
    return history;
}

EvalReport report_from_record(const IterationRecord& record,
                              const std::map<int, int>& num_test_items) {
    return build_report(record.per_class_fold_ap, num_test_items);
}

namespace {

json record_to_json(const IterationRecord& rec, bool with_wall_time) {
    json per_class = json::object();
    for (const auto& [class_name, folds] : rec.per_class_fold_ap) {
        json fj = json::object();
        for (const auto& [fold, ap] : folds) fj[std::to_string(fold)] = ap;
        per_class[class_name] = fj;
    }
    json j{{"iteration", rec.iteration},
           {"mean_ap", rec.mean_ap},
           {"per_class_fold_ap", per_class},
           {"added", added_to_json(rec.added)},
           {"stalled", rec.stalled},
           {"wall_time_s", with_wall_time ? rec.wall_time_s : 0.0}};
    return j;
}

json history_json(const RunHistory& history, bool with_wall_time) {
    json records = json::array();
    for (const auto& rec : history.records) records.push_back(record_to_json(rec, with_wall_time));
    return json{{"format", "aed-run-history"},
                {"version", 1},
                {"records", records},
                {"best_iteration", history.best_iteration},
                {"converged", history.converged},
                {"stalled", history.stalled},
                {"seed", history.seed},
                {"manifest_hash", history.manifest_hash}};
}

} // namespace

std::string history_to_json(const RunHistory& history) {
    return history_json(history, true).dump(2);
}

std::string history_signature(const RunHistory& history) {
    return history_json(history, false).dump();
}

RunHistory history_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& ex) {
        throw ParseError(std::string("bad history file: ") + ex.what());
    }
    if (j.value("format", "") != "aed-run-history") throw ParseError("not a run history file");
    RunHistory history;
    history.best_iteration = j.at("best_iteration").get<int>();
    history.converged = j.at("converged").get<bool>();
    history.stalled = j.at("stalled").get<bool>();
    history.seed = j.at("seed").get<std::uint64_t>();
    history.manifest_hash = j.at("manifest_hash").get<std::string>();
    for (const auto& rj : j.at("records")) {
        IterationRecord rec;
        rec.iteration = rj.at("iteration").get<int>();
        rec.mean_ap = rj.at("mean_ap").get<double>();
        rec.stalled = rj.at("stalled").get<bool>();
        rec.wall_time_s = rj.at("wall_time_s").get<double>();
        for (const auto& [class_name, folds] : rj.at("per_class_fold_ap").items()) {
            for (const auto& [fold, ap] : folds.items()) {
                rec.per_class_fold_ap[class_name][std::stoi(fold)] = ap.get<double>();
            }
        }
        for (const auto& [class_name, counts] : rj.at("added").items()) {
            rec.added[class_name] = {counts.at("pseudo_pos").get<int>(),
                                     counts.at("pseudo_neg").get<int>()};
        }
        history.records.push_back(std::move(rec));
    }
    return history;
}

std::string config_to_json(const SelfTrainConfig& config) {
    json j{{"detector", config.detector_kind == DetectorKind::svm ? "svm" : "mlp"},
           {"criterion", to_string(config.criterion)},
           {"score_theta_pos", config.score_theta_pos},
           {"score_theta_neg", config.score_theta_neg},
           {"precision_tau", config.precision_tau},
           {"clarity_theta_pos", config.clarity_theta_pos},
           {"clarity_theta_neg", config.clarity_theta_neg},
           {"cap", config.cap},
           {"max_iterations", config.max_iterations},
           {"convergence_epsilon", config.convergence_epsilon_points},
           {"include_pseudo_negatives", config.include_pseudo_negatives},
           {"svm_c", config.svm_c},
           {"seed", config.seed},
           {"jobs", config.jobs}};
    return j.dump(2);
}

SelfTrainConfig config_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& ex) {
        throw ParseError(std::string("bad config: ") + ex.what());
    }
    SelfTrainConfig config;
    const std::string kind = j.value("detector", "svm");
    if (kind == "svm") {
        config.detector_kind = DetectorKind::svm;
    } else if (kind == "mlp") {
        config.detector_kind = DetectorKind::mlp;
    } else {
        throw ParseError("unknown detector kind: " + kind);
    }
    config.criterion = criterion_from_string(j.value("criterion", "clarity"));
    config.score_theta_pos = j.value("score_theta_pos", config.score_theta_pos);
    config.score_theta_neg = j.value("score_theta_neg", config.score_theta_neg);
    config.precision_tau = j.value("precision_tau", config.precision_tau);
    config.clarity_theta_pos = j.value("clarity_theta_pos", config.clarity_theta_pos);
    config.clarity_theta_neg = j.value("clarity_theta_neg", config.clarity_theta_neg);
    config.cap = j.value("cap", config.cap);
    config.max_iterations = j.value("max_iterations", config.max_iterations);
    config.convergence_epsilon_points = j.value("convergence_epsilon", config.convergence_epsilon_points);
    config.include_pseudo_negatives =
        j.value("include_pseudo_negatives", config.include_pseudo_negatives);
    config.svm_c = j.value("svm_c", config.svm_c);
    config.seed = j.value("seed", config.seed);
    config.jobs = j.value("jobs", config.jobs);
    return config;
}

} // namespace aed
