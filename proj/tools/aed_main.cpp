#include <atomic>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <memory>
#include <optional>
#include <set>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "aed/audio.hpp"
#include "aed/error.hpp"
#include "aed/evaluation.hpp"
#include "aed/feature_cache.hpp"
#include "aed/manifest.hpp"
#include "aed/parallel.hpp"
#include "aed/selftrain.hpp"
#include "aed/synthetic.hpp"

using namespace aed;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitRuntime = 2;

class RunLog {
public:
    void open(const std::string& path) { file_.open(path, std::ios::app); }
    void line(const std::string& msg) {
        if (file_) file_ << msg << "\n";
    }

private:
    std::ofstream file_;
};

std::string manifest_dir(const std::string& manifest_path) {
    return fs::path(manifest_path).parent_path().string();
}

// Full run configuration: one document holds every hyperparameter so that a
// run can be reproduced from the file alone. Flags may override single keys.
struct RunConfig {
    std::string labeled_manifest;
    std::string unlabeled_manifest;
    std::string output_dir;
    std::string cache_dir;
    int vocab_m = 128;
    MfccParams dsp;
    SelfTrainConfig st;
};

const std::set<std::string>& allowed_keys() {
    static const std::set<std::string> keys = {
        "labeled_manifest", "unlabeled_manifest", "output_dir", "cache_dir", "vocab_m", "dsp",
        "detector", "criterion", "score_theta_pos", "score_theta_neg", "precision_tau",
        "clarity_theta_pos", "clarity_theta_neg", "cap", "max_iterations", "convergence_epsilon",
        "include_pseudo_negatives", "svm_c", "seed", "jobs"};
    return keys;
}

const std::set<std::string>& allowed_dsp_keys() {
    static const std::set<std::string> keys = {
        "sample_rate_hz", "frame_len", "frame_shift", "fft_size", "num_mel_filters", "mel_low_hz",
        "mel_high_hz", "num_cepstra", "preemphasis", "log_floor", "delta_window"};
    return keys;
}

RunConfig parse_run_config(const std::string& path, bool need_unlabeled) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot open config: " + path);
    json j;
    try {
        j = json::parse(f);
    } catch (const json::exception& ex) {
        throw ParseError(std::string("bad config: ") + ex.what());
    }
    if (!j.is_object()) throw ParseError("config must be a JSON object");

    for (const auto& [key, value] : j.items()) {
        if (!allowed_keys().count(key)) throw ParseError("unknown config key \"" + key + "\"");
        (void)value;
    }
    for (const char* required : {"labeled_manifest", "output_dir"}) {
        if (!j.contains(required)) {
            throw ParseError("missing required config key \"" + std::string(required) + "\"");
        }
    }
    if (need_unlabeled && !j.contains("unlabeled_manifest")) {
        throw ParseError("missing required config key \"unlabeled_manifest\"");
    }

    RunConfig config;
    config.labeled_manifest = j.at("labeled_manifest").get<std::string>();
    if (j.contains("unlabeled_manifest")) {
        config.unlabeled_manifest = j.at("unlabeled_manifest").get<std::string>();
    }
    config.output_dir = j.at("output_dir").get<std::string>();
    config.cache_dir = j.value("cache_dir", std::string());
    if (config.cache_dir.empty()) {
        if (const char* env = std::getenv("AED_CACHE_DIR")) config.cache_dir = env;
    }
    config.vocab_m = j.value("vocab_m", config.vocab_m);
    if (j.contains("dsp")) {
        const json& d = j.at("dsp");
        for (const auto& [key, value] : d.items()) {
            if (!allowed_dsp_keys().count(key)) {
                throw ParseError("unknown dsp config key \"" + key + "\"");
            }
            (void)value;
        }
        MfccParams& p = config.dsp;
        p.sample_rate_hz = d.value("sample_rate_hz", p.sample_rate_hz);
        p.frame_len = d.value("frame_len", p.frame_len);
        p.frame_shift = d.value("frame_shift", p.frame_shift);
        p.fft_size = d.value("fft_size", p.fft_size);
        p.num_mel_filters = d.value("num_mel_filters", p.num_mel_filters);
        p.mel_low_hz = d.value("mel_low_hz", p.mel_low_hz);
        p.mel_high_hz = d.value("mel_high_hz", p.mel_high_hz);
        p.num_cepstra = d.value("num_cepstra", p.num_cepstra);
        p.preemphasis = d.value("preemphasis", p.preemphasis);
        p.log_floor = d.value("log_floor", p.log_floor);
        p.delta_window = d.value("delta_window", p.delta_window);
    }

    json st = j;
    for (const char* key : {"labeled_manifest", "unlabeled_manifest", "output_dir", "cache_dir",
                            "vocab_m", "dsp"}) {
        st.erase(key);
    }
    config.st = config_from_json(st.dump());
    return config;
}

struct Overrides {
    std::optional<std::uint64_t> seed;
    std::optional<int> jobs;
    std::optional<int> max_iterations;
    std::optional<int> cap;
    std::optional<int> vocab_m;
    std::optional<std::string> detector;
    std::optional<std::string> criterion;
    std::optional<std::string> output_dir;

    void apply(RunConfig& config) const {
        if (seed) config.st.seed = *seed;
        if (jobs) config.st.jobs = *jobs;
        if (max_iterations) config.st.max_iterations = *max_iterations;
        if (cap) config.st.cap = *cap;
        if (vocab_m) config.vocab_m = *vocab_m;
        if (detector) {
            if (*detector == "svm") {
                config.st.detector_kind = DetectorKind::svm;
            } else if (*detector == "mlp") {
                config.st.detector_kind = DetectorKind::mlp;
            } else {
                throw ParseError("unknown detector kind: " + *detector);
            }
        }
        if (criterion) config.st.criterion = criterion_from_string(*criterion);
        if (output_dir) config.output_dir = *output_dir;
    }
};

void add_override_flags(CLI::App* cmd, Overrides& o) {
    cmd->add_option("--seed", o.seed, "Override the run seed");
    cmd->add_option("--jobs", o.jobs, "Worker thread count (0 = auto)");
    cmd->add_option("--max-iterations", o.max_iterations, "Override max self-training iterations");
    cmd->add_option("--cap", o.cap, "Override per-class candidate cap");
    cmd->add_option("--vocab-m", o.vocab_m, "Override vocabulary size M");
    cmd->add_option("--detector", o.detector, "Override detector kind (svm|mlp)");
    cmd->add_option("--criterion", o.criterion, "Override selection criterion");
    cmd->add_option("--output-dir", o.output_dir, "Override the output directory");
}

PreparedCorpus prepare_from_config(const RunConfig& config, bool with_unlabeled, RunLog& log) {
    const Manifest labeled = load_manifest(config.labeled_manifest);
    Manifest unlabeled;
    std::string unlabeled_base;
    if (with_unlabeled && !config.unlabeled_manifest.empty()) {
        unlabeled = load_manifest(config.unlabeled_manifest);
        unlabeled_base = manifest_dir(config.unlabeled_manifest);
    }
    log.line("loaded manifests: " + std::to_string(labeled.entries.size()) + " labeled, " +
             std::to_string(unlabeled.entries.size()) + " unlabeled");

    PrepareOptions options;
    options.dsp = config.dsp;
    options.vocab_m = config.vocab_m;
    options.seed = config.st.seed;
    options.jobs = config.st.jobs;
    options.cache_dir = config.cache_dir;
    const auto t0 = std::chrono::steady_clock::now();
    PreparedCorpus corpus = prepare_corpus(labeled, manifest_dir(config.labeled_manifest),
                                           unlabeled, unlabeled_base, options);
    const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    log.line("prepared corpus in " + std::to_string(dt) + " s (" +
             std::to_string(corpus.classes.size()) + " classes, M=" +
             std::to_string(config.vocab_m) + ")");
    return corpus;
}

void write_config_copy(const RunConfig& config, const std::string& dir) {
    json j = json::parse(config_to_json(config.st));
    j["labeled_manifest"] = config.labeled_manifest;
    if (!config.unlabeled_manifest.empty()) j["unlabeled_manifest"] = config.unlabeled_manifest;
    j["output_dir"] = config.output_dir;
    if (!config.cache_dir.empty()) j["cache_dir"] = config.cache_dir;
    j["vocab_m"] = config.vocab_m;
    std::ofstream f(fs::path(dir) / "run.config.json");
    f << j.dump(2);
}

int cmd_synth(const std::string& spec_path, const std::string& out_dir) {
    const SynthSpec spec = load_synth_spec(spec_path);
    const GeneratedCorpus corpus = generate(spec, out_dir);
    std::cout << "synth: " << corpus.labeled.entries.size() << " labeled + "
              << corpus.unlabeled.entries.size() << " unlabeled clips -> " << out_dir << "\n";
    return kExitOk;
}

int cmd_features(const std::string& manifest_path, const std::string& cache_dir, int jobs) {
    const Manifest manifest = load_manifest(manifest_path);
    const std::string base = manifest_dir(manifest_path);
    FeatureCache cache(cache_dir);
    const MfccParams params;
    std::atomic<int> fresh{0};
    parallel_for(manifest.entries.size(), jobs, [&](std::size_t i) {
        const ManifestEntry& e = manifest.entries[i];
        if (cache.load(e.id, params)) return;
        AudioClip clip = decode_and_normalize(
            fs::path(e.path).is_absolute() ? e.path : (fs::path(base) / e.path).string());
        clip.id = e.id;
        MfccMatrix m = extract_mfcc(clip, params);
        round_to_float32(m);
        cache.store(m, params);
        ++fresh;
    });
    std::cout << "features: " << manifest.entries.size() << " clips cached (" << fresh.load()
              << " new) -> " << cache_dir << "\n";
    return kExitOk;
}

int cmd_vocab(const std::string& manifest_path, int m, std::uint64_t seed,
              const std::string& out_path, int exclude_fold, const std::string& cache_dir,
              int jobs) {
    const Manifest manifest = load_manifest(manifest_path);
    const std::string base = manifest_dir(manifest_path);
    const MfccParams params;
    std::unique_ptr<FeatureCache> cache;
    if (!cache_dir.empty()) cache = std::make_unique<FeatureCache>(cache_dir);

    std::vector<const ManifestEntry*> used;
    std::set<int> folds;
    for (const auto& e : manifest.entries) {
        if (e.fold && *e.fold == exclude_fold) continue;
        used.push_back(&e);
        if (e.fold) folds.insert(*e.fold);
    }
    if (used.empty()) throw ValidationError("no manifest entries left to train on");

    std::vector<MfccMatrix> feats(used.size());
    parallel_for(used.size(), jobs, [&](std::size_t i) {
        const ManifestEntry& e = *used[i];
        if (cache) {
            if (auto hit = cache->load(e.id, params)) {
                feats[i] = std::move(*hit);
                return;
            }
        }
        AudioClip clip = decode_and_normalize(
            fs::path(e.path).is_absolute() ? e.path : (fs::path(base) / e.path).string());
        clip.id = e.id;
        feats[i] = extract_mfcc(clip, params);
        round_to_float32(feats[i]);
        if (cache) cache->store(feats[i], params);
    });

    std::size_t total_frames = 0;
    for (const auto& f : feats) total_frames += f.rows;
    std::vector<double> pool;
    pool.reserve(total_frames * static_cast<std::size_t>(params.feature_dim()));
    for (const auto& f : feats) pool.insert(pool.end(), f.data.begin(), f.data.end());

    GmmTrainOptions options;
    options.jobs = jobs;
    Vocabulary vocab =
        train_vocabulary(pool, total_frames, params.feature_dim(), m, seed, options);
    vocab.training_folds.assign(folds.begin(), folds.end());
    vocab.dsp = params;
    save_vocabulary(vocab, out_path);
    std::cout << "vocab: M=" << m << " over " << total_frames << " frames, "
              << vocab.info.iterations << " EM iterations"
              << (vocab.info.converged ? "" : " (not converged)") << " -> " << out_path << "\n";
    return kExitOk;
}

int cmd_baseline(const std::string& config_path, const Overrides& overrides) {
    RunConfig config = parse_run_config(config_path, /*need_unlabeled=*/false);
    overrides.apply(config);
    fs::create_directories(config.output_dir);
    RunLog log;
    log.open((fs::path(config.output_dir) / "run.log").string());
    write_config_copy(config, config.output_dir);

    const PreparedCorpus corpus = prepare_from_config(config, /*with_unlabeled=*/false, log);
    const SelfTrainState state = run_baseline(corpus, config.st);
    const EvalReport report =
        report_from_record(state.history.records[0], test_item_counts(corpus));
    save_report(report, (fs::path(config.output_dir) / "report.json").string());
    {
        std::ofstream f(fs::path(config.output_dir) / "report.txt");
        f << render_report_table(report, "Baseline");
    }
    {
        std::ofstream f(fs::path(config.output_dir) / "run.history.json");
        f << history_to_json(state.history);
    }
    log.line("baseline mean AP " + std::to_string(report.mean_ap * 100.0));
    std::cout << "baseline: mean AP " << std::fixed << std::setprecision(1)
              << report.mean_ap * 100.0 << " over " << corpus.classes.size() << " classes -> "
              << config.output_dir << "\n";
    return kExitOk;
}

int cmd_selftrain(const std::string& config_path, const Overrides& overrides) {
    RunConfig config = parse_run_config(config_path, /*need_unlabeled=*/true);
    overrides.apply(config);
    fs::create_directories(config.output_dir);
    RunLog log;
    log.open((fs::path(config.output_dir) / "run.log").string());
    write_config_copy(config, config.output_dir);

    const PreparedCorpus corpus = prepare_from_config(config, /*with_unlabeled=*/true, log);
    SelfTrainState state;
    const RunHistory history = run_loop(corpus, config.st, &state, config.output_dir);

    const auto counts = test_item_counts(corpus);
    const EvalReport baseline = report_from_record(history.records[0], counts);
    const EvalReport best = report_from_record(
        history.records[static_cast<std::size_t>(history.best_iteration)], counts);
    save_report(baseline, (fs::path(config.output_dir) / "report_baseline.json").string());
    save_report(best, (fs::path(config.output_dir) / "report_best.json").string());
    {
        std::ofstream f(fs::path(config.output_dir) / "report.txt");
        f << render_comparison_table(baseline, best, "Baseline", "Best");
    }
    for (const auto& rec : history.records) {
        log.line("iteration " + std::to_string(rec.iteration) + ": mean AP " +
                 std::to_string(rec.mean_ap * 100.0) + (rec.stalled ? " (stalled)" : ""));
    }
    std::cout << "selftrain: " << history.records.size() - 1 << " iterations, best iteration "
              << history.best_iteration << ", mean AP " << std::fixed << std::setprecision(1)
              << baseline.mean_ap * 100.0 << " -> " << best.mean_ap * 100.0 << " -> "
              << config.output_dir << "\n";
    return kExitOk;
}

EvalReport best_report_of_run(const std::string& run_dir) {
    const fs::path hist_path = fs::path(run_dir) / "run.history.json";
    std::ifstream f(hist_path);
    if (!f) throw IoError("cannot open run history: " + hist_path.string());
    std::string text((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    const RunHistory history = history_from_json(text);
    return report_from_record(history.records[static_cast<std::size_t>(history.best_iteration)]);
}

int cmd_report(const std::string& run_a, const std::string& run_b, const std::string& out_dir) {
    const EvalReport a = best_report_of_run(run_a);
    const EvalReport b = best_report_of_run(run_b);
    const std::string table = render_comparison_table(a, b, "A(best)", "B(best)");
    std::cout << table;
    if (!out_dir.empty()) {
        fs::create_directories(out_dir);
        std::ofstream f(fs::path(out_dir) / "diff.txt");
        f << table;
        const DiffReport diff = diff_reports(a, b);
        json j{{"mean_delta", diff.mean_delta},
               {"per_class_delta", diff.per_class_delta},
               {"regressions", diff.regressions}};
        std::ofstream jf(fs::path(out_dir) / "diff.json");
        jf << j.dump(2);
    }
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Bag-of-audio-words event detectors with semi-supervised self-training"};
    app.require_subcommand(1);

    std::string spec_path, out_dir, manifest_path, cache_dir, config_path, vocab_out;
    std::string run_a, run_b, report_out;
    int vocab_m = 128;
    std::uint64_t vocab_seed = 1;
    int exclude_fold = -1;
    int jobs = 0;
    Overrides overrides;

    auto* synth = app.add_subcommand("synth", "Generate a synthetic labeled/unlabeled corpus");
    synth->add_option("spec", spec_path, "Synthetic spec JSON")->required();
    synth->add_option("out", out_dir, "Output directory")->required();

    auto* features = app.add_subcommand("features", "Extract MFCC features into a cache");
    features->add_option("manifest", manifest_path, "Manifest (JSON lines)")->required();
    features->add_option("cache", cache_dir, "Feature cache directory")->required();
    features->add_option("--jobs", jobs, "Worker thread count");

    auto* vocab = app.add_subcommand("vocab", "Train a GMM vocabulary");
    vocab->add_option("manifest", manifest_path)->required();
    vocab->add_option("out", vocab_out, "Output vocabulary JSON")->required();
    vocab->add_option("--m", vocab_m, "Number of audio words");
    vocab->add_option("--seed", vocab_seed, "Training seed");
    vocab->add_option("--exclude-fold", exclude_fold, "Leave this fold out of the pool");
    vocab->add_option("--cache", cache_dir, "Feature cache directory");
    vocab->add_option("--jobs", jobs, "Worker thread count");

    auto* baseline = app.add_subcommand("baseline", "Train and evaluate the supervised baseline");
    baseline->add_option("--config", config_path, "Run config JSON")->required();
    add_override_flags(baseline, overrides);

    auto* selftrain = app.add_subcommand("selftrain", "Run the full self-training loop");
    selftrain->add_option("--config", config_path, "Run config JSON")->required();
    add_override_flags(selftrain, overrides);

    auto* report = app.add_subcommand("report", "Diff two runs' best reports");
    report->add_option("run_a", run_a)->required();
    report->add_option("run_b", run_b)->required();
    report->add_option("--out", report_out, "Directory for diff.{json,txt}");

    CLI11_PARSE(app, argc, argv);

    try {
        if (synth->parsed()) return cmd_synth(spec_path, out_dir);
        if (features->parsed()) return cmd_features(manifest_path, cache_dir, jobs);
        if (vocab->parsed()) {
            return cmd_vocab(manifest_path, vocab_m, vocab_seed, vocab_out, exclude_fold,
                             cache_dir, jobs);
        }
        if (baseline->parsed()) return cmd_baseline(config_path, overrides);
        if (selftrain->parsed()) return cmd_selftrain(config_path, overrides);
        if (report->parsed()) return cmd_report(run_a, run_b, report_out);
    } catch (const ParseError& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return kExitValidation;
    } catch (const ValidationError& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return kExitValidation;
    } catch (const IoError& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return kExitValidation;
    } catch (const std::exception& ex) {
        std::cerr << "runtime failure: " << ex.what() << "\n";
        return kExitRuntime;
    }
    return kExitOk;
}
