#include <doctest.h>

#include <cmath>

#include "aed/error.hpp"
#include "aed/feature_cache.hpp"
#include "aed/mfcc.hpp"
#include "aed/rng.hpp"
#include "test_helpers.hpp"

using namespace aed;
using aed::test::TempDir;

namespace {

AudioClip clip_from(std::vector<float> samples, const std::string& id = "clip") {
    AudioClip c;
    c.id = id;
    c.sample_rate_hz = 16000;
    c.samples = std::move(samples);
    return c;
}

std::vector<float> broadband_noise(std::size_t n, std::uint64_t seed, double amp = 0.3) {
    Rng rng(seed);
    std::vector<float> x(n);
    for (auto& s : x) s = static_cast<float>(amp * (rng.uniform() * 2.0 - 1.0));
    return x;
}

} // namespace

TEST_CASE("frame count follows the shift/window arithmetic") {
    const MfccParams p;
    CHECK(p.num_frames(16000) == 98); // floor((16000-400)/160)+1
    CHECK(p.num_frames(400) == 1);
    CHECK(p.num_frames(399) == 0);
    CHECK(p.num_frames(560) == 2);

    const MfccMatrix m = extract_mfcc(clip_from(std::vector<float>(16000, 0.1f)));
    CHECK(m.rows == 98);
    CHECK(m.cols == 60);
}

TEST_CASE("extract_mfcc rejects too-short and non-finite input") {
    CHECK_THROWS_AS(extract_mfcc(clip_from(std::vector<float>(399, 0.1f))), ValidationError);
    std::vector<float> bad(1000, 0.1f);
    bad[500] = std::numeric_limits<float>::quiet_NaN();
    CHECK_THROWS_AS(extract_mfcc(clip_from(std::move(bad))), NumericError);
}

TEST_CASE("all-zero clip: constant cepstra from the log floor, zero dynamics") {
    const MfccParams p;
    const MfccMatrix m = extract_mfcc(clip_from(std::vector<float>(16000, 0.0f)));
    // c0 = num_mel_filters * log(floor); higher cepstra cancel to ~0
    const double expected_c0 = p.num_mel_filters * std::log(p.log_floor);
    for (int t = 0; t < m.rows; ++t) {
        CHECK(m.at(t, 0) == doctest::Approx(expected_c0).epsilon(1e-9));
        for (int d = 1; d < 20; ++d) CHECK(std::abs(m.at(t, d)) < 1e-9);
        for (int d = 20; d < 60; ++d) CHECK(m.at(t, d) == 0.0);
        for (int d = 0; d < 60; ++d) CHECK(m.at(t, d) == m.at(0, d)); // all frames equal
    }
}

TEST_CASE("distinct spectra separate: 440 Hz vs 880 Hz") {
    const MfccMatrix a = extract_mfcc(clip_from(test::make_sine(440.0, 1.0, 16000)));
    const MfccMatrix b = extract_mfcc(clip_from(test::make_sine(880.0, 1.0, 16000)));
    REQUIRE(a.rows == b.rows);
    double l2 = 0.0;
    for (int d = 0; d < 20; ++d) {
        double ma = 0.0, mb = 0.0;
        for (int t = 0; t < a.rows; ++t) {
            ma += a.at(t, d);
            mb += b.at(t, d);
        }
        const double diff = (ma - mb) / a.rows;
        l2 += diff * diff;
    }
    CHECK(std::sqrt(l2) > 1.0);
}

TEST_CASE("append_deltas: regression operator on known shapes") {
    SUBCASE("constant rows give zero deltas") {
        std::vector<double> rows(10 * 3, 7.5);
        const auto full = append_deltas(rows, 10, 3);
        for (int t = 0; t < 10; ++t) {
            for (int c = 3; c < 9; ++c) CHECK(full[t * 9 + c] == 0.0);
        }
    }
    SUBCASE("single frame: clamped edges give zero deltas") {
        const auto full = append_deltas({1.0, 2.0, 3.0}, 1, 3);
        REQUIRE(full.size() == 9);
        for (int c = 3; c < 9; ++c) CHECK(full[c] == 0.0);
    }
    SUBCASE("linear ramp: interior delta rows equal the slope") {
        const double v = 0.37;
        std::vector<double> rows(10);
        for (int t = 0; t < 10; ++t) rows[t] = v * t;
        const auto full = append_deltas(rows, 10, 1);
        for (int t = 2; t < 8; ++t) {
            CHECK(full[t * 3 + 1] == doctest::Approx(v).epsilon(1e-12)); // delta
        }
        for (int t = 4; t < 6; ++t) {
            CHECK(std::abs(full[t * 3 + 2]) < 1e-12); // delta-delta of a ramp
        }
    }
}

TEST_CASE("time-shift covariance: 160 prepended zeros shift frames by one") {
    const auto base = broadband_noise(16000, 42);
    std::vector<float> shifted(160, 0.0f);
    shifted.insert(shifted.end(), base.begin(), base.end());

    const MfccMatrix a = extract_mfcc(clip_from(base, "a"));
    const MfccMatrix b = extract_mfcc(clip_from(shifted, "b"));
    REQUIRE(b.rows == a.rows + 1);

    // static cepstra: bit-exact on every overlapping frame
    for (int t = 0; t < a.rows; ++t) {
        for (int d = 0; d < 20; ++d) CHECK(a.at(t, d) == b.at(t + 1, d));
    }
    // full rows including dynamics: bit-exact away from the clamped edges
    for (int t = 4; t < a.rows - 4; ++t) {
        for (int d = 0; d < 60; ++d) CHECK(a.at(t, d) == b.at(t + 1, d));
    }
}

TEST_CASE("scaling the waveform moves only c0, additively") {
    const auto base = broadband_noise(8000, 7, 0.25);
    const MfccMatrix ref = extract_mfcc(clip_from(base, "ref"));
    for (double g : {0.5, 2.0}) {
        std::vector<float> scaled(base.size());
        for (std::size_t i = 0; i < base.size(); ++i) {
            scaled[i] = static_cast<float>(base[i] * g);
        }
        const MfccMatrix m = extract_mfcc(clip_from(scaled, "scaled"));
        REQUIRE(m.rows == ref.rows);
        const double c0_shift = m.at(0, 0) - ref.at(0, 0);
        CHECK(std::abs(c0_shift) > 1e-3); // the log-energy channel did move
        for (int t = 0; t < m.rows; ++t) {
            CHECK(m.at(t, 0) - ref.at(t, 0) == doctest::Approx(c0_shift).epsilon(1e-9));
            for (int d = 1; d < 20; ++d) {
                CHECK(std::abs(m.at(t, d) - ref.at(t, d)) < 1e-9);
            }
            for (int d = 20; d < 60; ++d) {
                CHECK(std::abs(m.at(t, d) - ref.at(t, d)) < 1e-9);
            }
        }
    }
}

TEST_CASE("no NaN or Inf for valid inputs") {
    Rng rng(9);
    for (int trial = 0; trial < 10; ++trial) {
        const std::size_t n = 400 + rng.uniform_index(20000);
        std::vector<float> x(n);
        const double amp = std::pow(10.0, rng.uniform(-8.0, 0.0)); // down to 1e-8
        for (auto& s : x) s = static_cast<float>(amp * (rng.uniform() * 2.0 - 1.0));
        const MfccMatrix m = extract_mfcc(clip_from(std::move(x)));
        for (double v : m.data) CHECK(std::isfinite(v));
    }
}

TEST_CASE("feature cache: round trip and parameter invalidation") {
    TempDir dir("featcache");
    FeatureCache cache(dir.str());
    const MfccParams params;

    MfccMatrix m = extract_mfcc(clip_from(test::make_sine(500.0, 0.5, 16000), "seg#0"));
    round_to_float32(m);
    cache.store(m, params);

    SUBCASE("hit returns identical features") {
        const auto hit = cache.load("seg#0", params);
        REQUIRE(hit.has_value());
        CHECK(hit->rows == m.rows);
        CHECK(hit->cols == m.cols);
        for (std::size_t i = 0; i < m.data.size(); ++i) CHECK(hit->data[i] == m.data[i]);
    }
    SUBCASE("unknown id misses") {
        CHECK_FALSE(cache.load("other", params).has_value());
    }
    SUBCASE("changed parameters invalidate") {
        MfccParams other = params;
        other.num_mel_filters = 40;
        CHECK_FALSE(cache.load("seg#0", other).has_value());
    }
}
