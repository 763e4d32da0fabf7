#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "aed/manifest.hpp"

namespace aed {

enum class GeneratorKind { tone, chirp, noiseband, impulse_train };

// Parameter pool shared by the generator families; each family reads the
// fields it cares about.
struct GeneratorParams {
    double freq_lo_hz = 300.0;
    double freq_hi_hz = 700.0;
    double sweep_ratio = 1.8;     // chirp: end/start frequency bound
    double bandwidth_q = 5.0;     // noiseband: biquad Q
    double rate_lo_hz = 4.0;      // impulse_train: clicks per second
    double rate_hi_hz = 9.0;
    double harmonic = 0.3;        // tone: relative 2nd harmonic amplitude
    double amp_jitter_db = 6.0;   // per-clip level spread
    double noise_floor_db = -35.0; // recording floor below nominal level
};

struct SynthClass {
    std::string name;
    GeneratorKind generator = GeneratorKind::tone;
    GeneratorParams params;
};

struct MismatchSpec {
    double snr_db = 10.0;
    double gain_jitter_db = 3.0;
    std::optional<double> bandlimit_hz;
};

// Desk-scale stand-in for the labeled dataset plus a web-audio pool: labeled
// clips are clean class exemplars stratified into 10 folds, unlabeled clips
// are exemplars pushed through the mismatch channel mixed with
// out-of-vocabulary distractors.
struct SynthSpec {
    std::vector<SynthClass> classes;
    int n_labeled_per_class = 50;
    int n_unlabeled = 800;
    double clip_duration_s = 2.0;
    MismatchSpec mismatch;
    double distractor_fraction = 0.3;
    std::uint64_t seed = 1;
};

inline constexpr const char* kDistractorTruthLabel = "_distractor";

struct GeneratedCorpus {
    Manifest labeled;
    Manifest unlabeled;
    std::map<std::string, std::string> truth; // unlabeled id -> class name or _distractor
    std::string labeled_manifest_path;
    std::string unlabeled_manifest_path;
    std::string truth_path;
};

// Writes WAV files plus labeled/unlabeled manifests and a separate truth
// table under out_dir. Deterministic given spec.seed.
GeneratedCorpus generate(const SynthSpec& spec, const std::string& out_dir);

SynthSpec synth_spec_from_json(const std::string& text);
SynthSpec load_synth_spec(const std::string& path);
std::string synth_spec_to_json(const SynthSpec& spec);

} // namespace aed
