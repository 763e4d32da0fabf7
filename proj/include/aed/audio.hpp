#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace aed {

enum class SourceKind { labeled, unlabeled };

// Mono PCM signal, normalized to 16 kHz and samples in [-1, 1].
struct AudioClip {
    std::string id;
    std::vector<float> samples;
    int sample_rate_hz = 16000;
    SourceKind source = SourceKind::unlabeled;
    std::optional<std::string> label;
    std::optional<int> fold;

    double duration_s() const {
        return static_cast<double>(samples.size()) / static_cast<double>(sample_rate_hz);
    }
};

struct VideoMeta {
    std::string id;
    double duration_s = 0.0;
    std::string title;
};

struct DecodeStats {
    int source_rate_hz = 0;
    int source_channels = 0;
    int source_bits = 0;
    bool silent = false; // all-zero after mono mixdown (e.g. phase-cancelled stereo)
};

inline constexpr int kTargetRateHz = 16000;

// Reads an uncompressed RIFF/WAVE file (8/16/24-bit PCM or 32-bit float, any
// channel count and rate), averages channels to mono, resamples to 16 kHz with
// a Kaiser-windowed sinc (beta 8.6, 32 taps per phase) and scales to [-1, 1].
// The clip id defaults to the file stem. Deterministic: byte-identical files
// produce bit-identical clips.
AudioClip decode_and_normalize(const std::string& path, DecodeStats* stats = nullptr);

// Writes a mono 16 kHz clip as 16-bit PCM WAV. Used by the synthetic corpus
// generator and by tests.
void write_wav_16bit_mono(const std::string& path, const std::vector<float>& samples,
                          int sample_rate_hz = kTargetRateHz);

// Kaiser-windowed sinc resampler (exposed for tests).
std::vector<float> resample_sinc(const std::vector<float>& in, int in_rate, int out_rate);

// Cuts a normalized clip into consecutive non-overlapping segments of
// seg_len_s. A trailing remainder is kept iff it is at least 1.0 s long.
// Children are named "{parent}#k" with k counting from 0 and inherit the
// parent's label/fold/source. A clip shorter than 1.0 s yields an empty list.
std::vector<AudioClip> segment_clip(const AudioClip& clip, double seg_len_s = 3.5);

// "<label> sound", with underscores turned into single spaces.
std::string formulate_query(const std::string& label);

// True iff the video is longer than 5 s and shorter than 10 min (open interval).
bool duration_filter(const VideoMeta& meta);

} // namespace aed
