#include <doctest.h>

#include <cmath>
#include <fstream>
#include <map>

#include "aed/audio.hpp"
#include "aed/error.hpp"
#include "aed/synthetic.hpp"
#include "test_helpers.hpp"

using namespace aed;
using aed::test::TempDir;

namespace {

SynthSpec two_tone_spec(std::uint64_t seed) {
    SynthSpec spec;
    SynthClass lo;
    lo.name = "tone_lo";
    lo.generator = GeneratorKind::tone;
    lo.params.freq_lo_hz = 300.0;
    lo.params.freq_hi_hz = 500.0;
    SynthClass hi;
    hi.name = "tone_hi";
    hi.generator = GeneratorKind::chirp;
    hi.params.freq_lo_hz = 1000.0;
    hi.params.freq_hi_hz = 1600.0;
    spec.classes = {lo, hi};
    spec.n_labeled_per_class = 50;
    spec.n_unlabeled = 40;
    spec.clip_duration_s = 0.3;
    spec.distractor_fraction = 0.25;
    spec.seed = seed;
    return spec;
}

// Quadrature power at one frequency.
double tone_power(const std::vector<float>& x, double freq_hz, int rate) {
    double cs = 0.0, sn = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double ph = 2.0 * 3.14159265358979323846 * freq_hz * i / rate;
        cs += x[i] * std::cos(ph);
        sn += x[i] * std::sin(ph);
    }
    return cs * cs + sn * sn;
}

} // namespace

TEST_CASE("stratification: clips spread evenly over the 10 folds") {
    TempDir dir("synth_strat");
    const GeneratedCorpus corpus = generate(two_tone_spec(5), dir.str());
    std::map<std::pair<std::string, int>, int> counts;
    for (const auto& e : corpus.labeled.entries) counts[{*e.label, *e.fold}] += 1;
    REQUIRE(counts.size() == 20); // 2 classes x 10 folds
    for (const auto& [key, count] : counts) CHECK(count == 5);
}

TEST_CASE("distractor count follows the fraction") {
    TempDir dir("synth_distract");
    SynthSpec spec = two_tone_spec(6);
    spec.n_unlabeled = 400;
    spec.distractor_fraction = 0.5;
    spec.clip_duration_s = 0.15;
    const GeneratedCorpus corpus = generate(spec, dir.str());
    int distractors = 0;
    for (const auto& [id, label] : corpus.truth) {
        distractors += label == kDistractorTruthLabel;
    }
    CHECK(distractors == 200);
    CHECK(corpus.truth.size() == 400);
}

TEST_CASE("truth never leaks into the unlabeled manifest") {
    TempDir dir("synth_leak");
    const GeneratedCorpus corpus = generate(two_tone_spec(7), dir.str());
    for (const auto& e : corpus.unlabeled.entries) {
        CHECK_FALSE(e.label.has_value());
        CHECK_FALSE(e.fold.has_value());
        CHECK(e.source == SourceKind::unlabeled);
    }
    // and the manifest file itself carries no label or fold key
    std::ifstream f(corpus.unlabeled_manifest_path);
    std::string line;
    while (std::getline(f, line)) {
        CHECK(line.find("\"label\"") == std::string::npos);
        CHECK(line.find("\"fold\"") == std::string::npos);
    }
}

TEST_CASE("generation is deterministic given the seed") {
    TempDir a("synth_det_a");
    TempDir b("synth_det_b");
    SynthSpec spec = two_tone_spec(8);
    spec.n_labeled_per_class = 10;
    spec.n_unlabeled = 10;
    const GeneratedCorpus ca = generate(spec, a.str());
    const GeneratedCorpus cb = generate(spec, b.str());
    REQUIRE(ca.labeled.entries.size() == cb.labeled.entries.size());
    for (std::size_t i = 0; i < ca.labeled.entries.size(); ++i) {
        std::ifstream fa(a.str(ca.labeled.entries[i].path), std::ios::binary);
        std::ifstream fb(b.str(cb.labeled.entries[i].path), std::ios::binary);
        const std::string bytes_a((std::istreambuf_iterator<char>(fa)),
                                  std::istreambuf_iterator<char>());
        const std::string bytes_b((std::istreambuf_iterator<char>(fb)),
                                  std::istreambuf_iterator<char>());
        CHECK(bytes_a == bytes_b);
    }
    CHECK(ca.truth == cb.truth);
}

TEST_CASE("spec validation") {
    SynthSpec spec = two_tone_spec(9);
    spec.classes.resize(1);
    CHECK_THROWS_AS(synth_spec_from_json(synth_spec_to_json(spec)), ValidationError);
    spec = two_tone_spec(9);
    spec.distractor_fraction = 1.0;
    TempDir dir("synth_bad");
    CHECK_THROWS_AS(generate(spec, dir.str()), ValidationError);
}

TEST_CASE("spec json round trip") {
    const SynthSpec spec = two_tone_spec(10);
    const SynthSpec back = synth_spec_from_json(synth_spec_to_json(spec));
    CHECK(back.classes.size() == 2);
    CHECK(back.classes[0].name == "tone_lo");
    CHECK(back.classes[1].generator == GeneratorKind::chirp);
    CHECK(back.n_labeled_per_class == spec.n_labeled_per_class);
    CHECK(back.mismatch.snr_db == spec.mismatch.snr_db);
    CHECK_FALSE(back.mismatch.bandlimit_hz.has_value());
}

TEST_CASE("matched-filter oracle still recognizes mismatched exemplars at 10 dB") {
    // fixed-frequency tone classes so a two-tap quadrature filter is the
    // optimal detector
    TempDir dir("synth_mf");
    SynthSpec spec;
    SynthClass a;
    a.name = "tone440";
    a.generator = GeneratorKind::tone;
    a.params.freq_lo_hz = 440.0;
    a.params.freq_hi_hz = 440.0;
    a.params.harmonic = 0.0;
    SynthClass b = a;
    b.name = "tone880";
    b.params.freq_lo_hz = 880.0;
    b.params.freq_hi_hz = 880.0;
    spec.classes = {a, b};
    spec.n_labeled_per_class = 10;
    spec.n_unlabeled = 200;
    spec.distractor_fraction = 0.0;
    spec.clip_duration_s = 0.25;
    spec.mismatch.snr_db = 10.0;
    spec.seed = 11;

    const GeneratedCorpus corpus = generate(spec, dir.str());
    int correct = 0;
    int total = 0;
    for (const auto& e : corpus.unlabeled.entries) {
        const std::string& want = corpus.truth.at(e.id);
        const AudioClip clip = decode_and_normalize(dir.str(e.path));
        const bool is_440 = tone_power(clip.samples, 440.0, 16000) >
                            tone_power(clip.samples, 880.0, 16000);
        correct += (is_440 ? "tone440" : "tone880") == want;
        ++total;
    }
    REQUIRE(total == 200);
    CHECK(static_cast<double>(correct) / total >= 0.95);
}
