#pragma once

#include <string>
#include <vector>

#include "aed/audio.hpp"

namespace aed {

// Full DSP parameterization. Stored with every vocabulary/model so features
// stay reproducible; equality drives feature-cache invalidation.
struct MfccParams {
    int sample_rate_hz = 16000;
    int frame_len = 400;   // 25 ms
    int frame_shift = 160; // 10 ms
    int fft_size = 512;
    int num_mel_filters = 26;
    double mel_low_hz = 0.0;
    double mel_high_hz = 8000.0;
    int num_cepstra = 20; // c0..c19
    double preemphasis = 0.97;
    double log_floor = 1e-10;
    int delta_window = 2;

    bool operator==(const MfccParams&) const = default;

    int feature_dim() const { return 3 * num_cepstra; } // static + delta + delta-delta

    // T = floor((num_samples - frame_len) / frame_shift) + 1
    int num_frames(std::size_t num_samples) const {
        if (num_samples < static_cast<std::size_t>(frame_len)) return 0;
        return static_cast<int>((num_samples - frame_len) / frame_shift) + 1;
    }
};

// T x 60 frame-level features: 20 cepstra, 20 deltas, 20 delta-deltas.
struct MfccMatrix {
    std::string clip_id;
    int rows = 0;
    int cols = 0;
    std::vector<double> data; // row-major

    double at(int t, int d) const { return data[static_cast<std::size_t>(t) * cols + d]; }
    const double* row(int t) const { return data.data() + static_cast<std::size_t>(t) * cols; }
};

// Rounds every entry to its nearest float32 value. The pipeline applies this
// once after extraction so results do not depend on whether features came from
// the float32 on-disk cache or were computed fresh.
void round_to_float32(MfccMatrix& m);

// Pre-emphasis -> framing -> Hamming window -> 512-point magnitude FFT ->
// 26 triangular mel filters (0-8000 Hz) -> floored log -> DCT-II, keep c0..c19
// -> append deltas and delta-deltas.
MfccMatrix extract_mfcc(const AudioClip& clip, const MfccParams& params = {});

// Two-frame regression deltas with replicated edge frames:
//   d_t = sum_{n=1..w} n*(c_{t+n} - c_{t-n}) / (2*sum n^2)
// Input is T x C row-major static coefficients; output is T x 3C with the
// delta-delta block computed by applying the same operator to the deltas.
std::vector<double> append_deltas(const std::vector<double>& static_coeffs, int rows, int cols,
                                  int window = 2);

} // namespace aed
