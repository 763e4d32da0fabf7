#include "aed/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "aed/audio.hpp"
#include "aed/error.hpp"
#include "aed/rng.hpp"

namespace aed {

using nlohmann::json;

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr int kRate = kTargetRateHz;

double db_to_gain(double db) { return std::pow(10.0, db / 20.0); }

void fade_edges(std::vector<float>& x, int fade_samples) {
    const int n = static_cast<int>(x.size());
    const int f = std::min(fade_samples, n / 2);
    for (int i = 0; i < f; ++i) {
        const float g = static_cast<float>(i) / f;
        x[i] *= g;
        x[n - 1 - i] *= g;
    }
}

// RBJ cookbook biquad, direct form 1.
struct Biquad {
    double b0 = 1, b1 = 0, b2 = 0, a1 = 0, a2 = 0;

    static Biquad bandpass(double center_hz, double q) {
        const double w0 = 2.0 * kPi * center_hz / kRate;
        const double alpha = std::sin(w0) / (2.0 * q);
        const double a0 = 1.0 + alpha;
        Biquad f;
        f.b0 = alpha / a0;
        f.b1 = 0.0;
        f.b2 = -alpha / a0;
        f.a1 = -2.0 * std::cos(w0) / a0;
        f.a2 = (1.0 - alpha) / a0;
        return f;
    }

    static Biquad lowpass(double cutoff_hz, double q = 0.7071) {
        const double w0 = 2.0 * kPi * cutoff_hz / kRate;
        const double alpha = std::sin(w0) / (2.0 * q);
        const double cw = std::cos(w0);
        const double a0 = 1.0 + alpha;
        Biquad f;
        f.b0 = (1.0 - cw) / 2.0 / a0;
        f.b1 = (1.0 - cw) / a0;
        f.b2 = (1.0 - cw) / 2.0 / a0;
        f.a1 = -2.0 * cw / a0;
        f.a2 = (1.0 - alpha) / a0;
        return f;
    }

    void apply(std::vector<float>& x) const {
        double x1 = 0, x2 = 0, y1 = 0, y2 = 0;
        for (float& s : x) {
            const double x0 = s;
            const double y0 = b0 * x0 + b1 * x1 + b2 * x2 - a1 * y1 - a2 * y2;
            x2 = x1;
            x1 = x0;
            y2 = y1;
            y1 = y0;
            s = static_cast<float>(y0);
        }
    }
};

void normalize_rms(std::vector<float>& x, double target_rms) {
    double p = 0.0;
    for (float s : x) p += static_cast<double>(s) * s;
    p /= static_cast<double>(x.size());
    if (p <= 0.0) return;
    const double g = target_rms / std::sqrt(p);
    for (float& s : x) s = static_cast<float>(s * g);
}

void clamp_peak(std::vector<float>& x, float peak = 0.99f) {
    float mx = 0.0f;
    for (float s : x) mx = std::max(mx, std::abs(s));
    if (mx > peak) {
        const float g = peak / mx;
        for (float& s : x) s *= g;
    }
}

std::vector<float> gen_tone(const GeneratorParams& p, int n, Rng& rng) {
    const double f = rng.uniform(p.freq_lo_hz, p.freq_hi_hz);
    const double phase = rng.uniform(0.0, 2.0 * kPi);
    const double amp = 0.4 * db_to_gain(rng.uniform(-p.amp_jitter_db, 0.0));
    std::vector<float> x(n);
    for (int i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) / kRate;
        x[i] = static_cast<float>(amp * (std::sin(2.0 * kPi * f * t + phase) +
                                         p.harmonic * std::sin(4.0 * kPi * f * t + 2.0 * phase)));
    }
    return x;
}

std::vector<float> gen_chirp(const GeneratorParams& p, int n, Rng& rng) {
    const double f0 = rng.uniform(p.freq_lo_hz, p.freq_hi_hz);
    double f1 = f0 * rng.uniform(1.0 / p.sweep_ratio, p.sweep_ratio);
    f1 = std::clamp(f1, p.freq_lo_hz / p.sweep_ratio, p.freq_hi_hz * p.sweep_ratio);
    const double phase = rng.uniform(0.0, 2.0 * kPi);
    const double amp = 0.4 * db_to_gain(rng.uniform(-p.amp_jitter_db, 0.0));
    const double duration = static_cast<double>(n) / kRate;
    std::vector<float> x(n);
    for (int i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) / kRate;
        const double inst_phase =
            2.0 * kPi * (f0 * t + (f1 - f0) * t * t / (2.0 * duration)) + phase;
        x[i] = static_cast<float>(amp * std::sin(inst_phase));
    }
    return x;
}

std::vector<float> gen_noiseband(const GeneratorParams& p, int n, Rng& rng) {
    const double center = rng.uniform(p.freq_lo_hz, p.freq_hi_hz);
    std::vector<float> x(n);
    for (float& s : x) s = static_cast<float>(rng.normal());
    const Biquad bp = Biquad::bandpass(center, p.bandwidth_q);
    bp.apply(x);
    bp.apply(x);
    normalize_rms(x, 0.15 * db_to_gain(rng.uniform(-p.amp_jitter_db, 0.0)));
    return x;
}

std::vector<float> gen_impulse_train(const GeneratorParams& p, int n, Rng& rng) {
    const double rate = rng.uniform(p.rate_lo_hz, p.rate_hi_hz);
    const double ring_hz = rng.uniform(p.freq_lo_hz, p.freq_hi_hz);
    const double amp = 0.55 * db_to_gain(rng.uniform(-p.amp_jitter_db, 0.0));
    const double decay_s = 0.02;
    const double attack_s = 0.003; // raised-cosine onset, keeps the burst narrowband
    const int period = std::max(1, static_cast<int>(std::lround(kRate / rate)));
    const int start = static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(period)));
    std::vector<float> x(n, 0.0f);
    for (int onset = start; onset < n; onset += period) {
        const int end = std::min(n, onset + static_cast<int>(0.08 * kRate));
        for (int i = onset; i < end; ++i) {
            const double t = static_cast<double>(i - onset) / kRate;
            const double attack =
                t >= attack_s ? 1.0 : 0.5 * (1.0 - std::cos(kPi * t / attack_s));
            x[i] += static_cast<float>(amp * attack * std::exp(-t / decay_s) *
                                       std::sin(2.0 * kPi * ring_hz * t));
        }
    }
    return x;
}

// Per-clip recording floor, drawn from a 10 dB range above the nominal level
// so clean exemplars vary in how pristine they are.
void add_noise_floor(std::vector<float>& x, double floor_db, Rng& rng) {
    const double floor_amp = 0.4 * db_to_gain(floor_db + rng.uniform(0.0, 10.0));
    for (float& s : x) s = static_cast<float>(s + floor_amp * rng.normal());
}

std::vector<float> gen_class_clip(const SynthClass& cls, int n, Rng& rng) {
    std::vector<float> x;
    switch (cls.generator) {
        case GeneratorKind::tone: x = gen_tone(cls.params, n, rng); break;
        case GeneratorKind::chirp: x = gen_chirp(cls.params, n, rng); break;
        case GeneratorKind::noiseband: x = gen_noiseband(cls.params, n, rng); break;
        case GeneratorKind::impulse_train: x = gen_impulse_train(cls.params, n, rng); break;
    }
    add_noise_floor(x, cls.params.noise_floor_db, rng);
    fade_edges(x, kRate / 100); // 10 ms
    clamp_peak(x);
    return x;
}

// Out-of-vocabulary sounds kept spectrally clear of the class bands: rumble,
// low-passed roar, slow AM rumble, high whistle.
std::vector<float> gen_distractor(int n, Rng& rng) {
    const std::uint64_t pick = rng.uniform_index(4);
    std::vector<float> x(n);
    if (pick == 0) {
        const double f = rng.uniform(60.0, 150.0);
        const double amp = 0.4 * db_to_gain(rng.uniform(-6.0, 0.0));
        for (int i = 0; i < n; ++i) {
            x[i] = static_cast<float>(amp * std::sin(2.0 * kPi * f * i / kRate));
        }
    } else if (pick == 1) {
        for (float& s : x) s = static_cast<float>(rng.normal());
        Biquad::lowpass(rng.uniform(120.0, 260.0), 0.9).apply(x);
        normalize_rms(x, 0.15);
    } else if (pick == 2) {
        const double am = rng.uniform(0.5, 2.0);
        const double f = rng.uniform(70.0, 180.0);
        for (int i = 0; i < n; ++i) {
            const double env = 0.5 * (1.0 + std::sin(2.0 * kPi * am * i / kRate));
            x[i] = static_cast<float>(0.5 * env * std::sin(2.0 * kPi * f * i / kRate));
        }
    } else {
        const double f = rng.uniform(5000.0, 7000.0);
        const double amp = 0.3 * db_to_gain(rng.uniform(-6.0, 0.0));
        for (int i = 0; i < n; ++i) {
            x[i] = static_cast<float>(amp * std::sin(2.0 * kPi * f * i / kRate));
        }
    }
    add_noise_floor(x, -35.0, rng);
    fade_edges(x, kRate / 100);
    clamp_peak(x);
    return x;
}

void apply_mismatch(std::vector<float>& x, const MismatchSpec& mismatch, Rng& rng) {
    double p = 0.0;
    for (float s : x) p += static_cast<double>(s) * s;
    p /= static_cast<double>(x.size());
    const double noise_std = std::sqrt(p / std::pow(10.0, mismatch.snr_db / 10.0));
    for (float& s : x) s = static_cast<float>(s + noise_std * rng.normal());
    const double gain =
        db_to_gain(rng.uniform(-mismatch.gain_jitter_db, mismatch.gain_jitter_db));
    for (float& s : x) s = static_cast<float>(s * gain);
    if (mismatch.bandlimit_hz) {
        Biquad::lowpass(*mismatch.bandlimit_hz).apply(x);
    }
    clamp_peak(x);
}

GeneratorKind generator_from_string(const std::string& s) {
    if (s == "tone") return GeneratorKind::tone;
    if (s == "chirp") return GeneratorKind::chirp;
    if (s == "noiseband") return GeneratorKind::noiseband;
    if (s == "impulse_train") return GeneratorKind::impulse_train;
    throw ParseError("unknown generator: " + s);
}

std::string generator_to_string(GeneratorKind g) {
    switch (g) {
        case GeneratorKind::tone: return "tone";
        case GeneratorKind::chirp: return "chirp";
        case GeneratorKind::noiseband: return "noiseband";
        case GeneratorKind::impulse_train: return "impulse_train";
    }
    return "tone";
}

void validate_spec(const SynthSpec& spec) {
    if (spec.classes.size() < 2) throw ValidationError("synthetic spec needs at least 2 classes");
    if (spec.distractor_fraction < 0.0 || spec.distractor_fraction >= 1.0) {
        throw ValidationError("distractor_fraction must be in [0, 1)");
    }
    if (spec.n_labeled_per_class < 10) {
        throw ValidationError("need at least 10 labeled clips per class (one per fold)");
    }
    if (spec.n_unlabeled < 0) throw ValidationError("n_unlabeled must be nonnegative");
    if (spec.clip_duration_s <= 0.1) throw ValidationError("clip duration too short");
}

} // namespace

GeneratedCorpus generate(const SynthSpec& spec, const std::string& out_dir) {
    validate_spec(spec);

    namespace fs = std::filesystem;
    const fs::path root(out_dir);
    fs::create_directories(root / "audio");

    const int n = static_cast<int>(std::lround(spec.clip_duration_s * kRate));
    GeneratedCorpus corpus;

    // Labeled: clean exemplars, stratified round-robin into folds 1..10.
    for (std::size_t c = 0; c < spec.classes.size(); ++c) {
        const SynthClass& cls = spec.classes[c];
        for (int i = 0; i < spec.n_labeled_per_class; ++i) {
            Rng rng(derive_seed(spec.seed, 0x6c61 /*labeled*/, c * 100000 + i));
            const std::vector<float> x = gen_class_clip(cls, n, rng);
            char idbuf[64];
            std::snprintf(idbuf, sizeof(idbuf), "%s_%03d", cls.name.c_str(), i);
            const std::string rel = "audio/" + std::string(idbuf) + ".wav";
            write_wav_16bit_mono((root / rel).string(), x);
            ManifestEntry e;
            e.id = idbuf;
            e.path = rel;
            e.label = cls.name;
            e.fold = (i % 10) + 1;
            e.source = SourceKind::labeled;
            e.duration_s = spec.clip_duration_s;
            corpus.labeled.entries.push_back(std::move(e));
        }
    }

    // Unlabeled: shuffled mix of mismatched exemplars and distractors.
    const int n_distract = static_cast<int>(std::llround(spec.distractor_fraction * spec.n_unlabeled));
    std::vector<std::string> roles;
    roles.reserve(spec.n_unlabeled);
    for (int i = 0; i < spec.n_unlabeled - n_distract; ++i) {
        roles.push_back(spec.classes[i % spec.classes.size()].name);
    }
    for (int i = 0; i < n_distract; ++i) roles.push_back(kDistractorTruthLabel);
    {
        Rng role_rng(derive_seed(spec.seed, 0x726f6c /*rol*/));
        role_rng.shuffle(roles);
    }

    for (int i = 0; i < spec.n_unlabeled; ++i) {
        Rng rng(derive_seed(spec.seed, 0x756e /*unlabeled*/, i));
        std::vector<float> x;
        if (roles[i] == kDistractorTruthLabel) {
            x = gen_distractor(n, rng);
        } else {
            const auto it = std::find_if(spec.classes.begin(), spec.classes.end(),
                                         [&](const SynthClass& c) { return c.name == roles[i]; });
            x = gen_class_clip(*it, n, rng);
        }
        apply_mismatch(x, spec.mismatch, rng);
        char idbuf[32];
        std::snprintf(idbuf, sizeof(idbuf), "u%05d", i);
        const std::string rel = "audio/" + std::string(idbuf) + ".wav";
        write_wav_16bit_mono((root / rel).string(), x);
        ManifestEntry e;
        e.id = idbuf;
        e.path = rel;
        e.source = SourceKind::unlabeled;
        e.duration_s = spec.clip_duration_s;
        corpus.unlabeled.entries.push_back(std::move(e));
        corpus.truth[idbuf] = roles[i];
    }

    validate_manifest(corpus.labeled);
    validate_manifest(corpus.unlabeled);

    corpus.labeled_manifest_path = (root / "labeled.jsonl").string();
    corpus.unlabeled_manifest_path = (root / "unlabeled.jsonl").string();
    corpus.truth_path = (root / "truth.json").string();
    save_manifest(corpus.labeled, corpus.labeled_manifest_path);
    save_manifest(corpus.unlabeled, corpus.unlabeled_manifest_path);

    json truth = json::object();
    for (const auto& [id, label] : corpus.truth) truth[id] = label;
    std::ofstream tf(corpus.truth_path);
    if (!tf) throw IoError("cannot write truth table: " + corpus.truth_path);
    tf << truth.dump(2);

    return corpus;
}

SynthSpec synth_spec_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& ex) {
        throw ParseError(std::string("bad synthetic spec: ") + ex.what());
    }

    SynthSpec spec;
    for (const auto& cj : j.at("classes")) {
        SynthClass cls;
        cls.name = cj.at("name").get<std::string>();
        cls.generator = generator_from_string(cj.at("generator").get<std::string>());
        if (cj.contains("params")) {
            const json& p = cj.at("params");
            GeneratorParams& gp = cls.params;
            gp.freq_lo_hz = p.value("freq_lo_hz", gp.freq_lo_hz);
            gp.freq_hi_hz = p.value("freq_hi_hz", gp.freq_hi_hz);
            gp.sweep_ratio = p.value("sweep_ratio", gp.sweep_ratio);
            gp.bandwidth_q = p.value("bandwidth_q", gp.bandwidth_q);
            gp.rate_lo_hz = p.value("rate_lo_hz", gp.rate_lo_hz);
            gp.rate_hi_hz = p.value("rate_hi_hz", gp.rate_hi_hz);
            gp.harmonic = p.value("harmonic", gp.harmonic);
            gp.amp_jitter_db = p.value("amp_jitter_db", gp.amp_jitter_db);
            gp.noise_floor_db = p.value("noise_floor_db", gp.noise_floor_db);
        }
        spec.classes.push_back(std::move(cls));
    }
    spec.n_labeled_per_class = j.value("n_labeled_per_class", spec.n_labeled_per_class);
    spec.n_unlabeled = j.value("n_unlabeled", spec.n_unlabeled);
    spec.clip_duration_s = j.value("clip_duration_s", spec.clip_duration_s);
    if (j.contains("mismatch")) {
        const json& m = j.at("mismatch");
        spec.mismatch.snr_db = m.value("snr_db", spec.mismatch.snr_db);
        spec.mismatch.gain_jitter_db = m.value("gain_jitter_db", spec.mismatch.gain_jitter_db);
        if (m.contains("bandlimit_hz") && !m.at("bandlimit_hz").is_null()) {
            spec.mismatch.bandlimit_hz = m.at("bandlimit_hz").get<double>();
        }
    }
    spec.distractor_fraction = j.value("distractor_fraction", spec.distractor_fraction);
    spec.seed = j.value("seed", spec.seed);
    validate_spec(spec);
    return spec;
}

SynthSpec load_synth_spec(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot open synthetic spec: " + path);
    std::string text((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    return synth_spec_from_json(text);
}

std::string synth_spec_to_json(const SynthSpec& spec) {
    json classes = json::array();
    for (const auto& cls : spec.classes) {
        classes.push_back(json{{"name", cls.name},
                               {"generator", generator_to_string(cls.generator)},
                               {"params",
                                json{{"freq_lo_hz", cls.params.freq_lo_hz},
                                     {"freq_hi_hz", cls.params.freq_hi_hz},
                                     {"sweep_ratio", cls.params.sweep_ratio},
                                     {"bandwidth_q", cls.params.bandwidth_q},
                                     {"rate_lo_hz", cls.params.rate_lo_hz},
                                     {"rate_hi_hz", cls.params.rate_hi_hz},
                                     {"harmonic", cls.params.harmonic},
                                     {"amp_jitter_db", cls.params.amp_jitter_db},
                                     {"noise_floor_db", cls.params.noise_floor_db}}}});
    }
    json m{{"snr_db", spec.mismatch.snr_db}, {"gain_jitter_db", spec.mismatch.gain_jitter_db}};
    if (spec.mismatch.bandlimit_hz) {
        m["bandlimit_hz"] = *spec.mismatch.bandlimit_hz;
    } else {
        m["bandlimit_hz"] = nullptr;
    }
    json j{{"classes", classes},
           {"n_labeled_per_class", spec.n_labeled_per_class},
           {"n_unlabeled", spec.n_unlabeled},
           {"clip_duration_s", spec.clip_duration_s},
           {"mismatch", m},
           {"distractor_fraction", spec.distractor_fraction},
           {"seed", spec.seed}};
    return j.dump(2);
}

} // namespace aed
