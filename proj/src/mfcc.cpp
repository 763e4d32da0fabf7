#include "aed/mfcc.hpp"

#include <cmath>
#include <complex>

#include "aed/error.hpp"

namespace aed {
namespace {

constexpr double kPi = 3.14159265358979323846;

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

// Iterative radix-2 FFT, in place. Size must be a power of two.
void fft_inplace(std::vector<std::complex<double>>& a) {
    const std::size_t n = a.size();
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double ang = -2.0 * kPi / static_cast<double>(len);
        const std::complex<double> wlen(std::cos(ang), std::sin(ang));
        for (std::size_t i = 0; i < n; i += len) {
            std::complex<double> w(1.0, 0.0);
            for (std::size_t k = 0; k < len / 2; ++k) {
                const std::complex<double> u = a[i + k];
                const std::complex<double> v = a[i + k + len / 2] * w;
                a[i + k] = u + v;
                a[i + k + len / 2] = u - v;
                w *= wlen;
            }
        }
    }
}

// Triangle weights per mel filter over FFT bins 0..fft_size/2.
std::vector<std::vector<double>> build_mel_filterbank(const MfccParams& p) {
    const int num_bins = p.fft_size / 2 + 1;
    const double mel_lo = hz_to_mel(p.mel_low_hz);
    const double mel_hi = hz_to_mel(p.mel_high_hz);
    std::vector<double> edges(p.num_mel_filters + 2);
    for (int i = 0; i < static_cast<int>(edges.size()); ++i) {
        edges[i] = mel_to_hz(mel_lo + (mel_hi - mel_lo) * i / (p.num_mel_filters + 1));
    }

    std::vector<std::vector<double>> bank(p.num_mel_filters, std::vector<double>(num_bins, 0.0));
    const double bin_hz = static_cast<double>(p.sample_rate_hz) / p.fft_size;
    for (int m = 0; m < p.num_mel_filters; ++m) {
        const double lo = edges[m];
        const double mid = edges[m + 1];
        const double hi = edges[m + 2];
        for (int k = 0; k < num_bins; ++k) {
            const double f = k * bin_hz;
            if (f <= lo || f >= hi) continue;
            bank[m][k] = f <= mid ? (f - lo) / (mid - lo) : (hi - f) / (hi - mid);
        }
    }
    return bank;
}

} // namespace

std::vector<double> append_deltas(const std::vector<double>& static_coeffs, int rows, int cols,
                                  int window) {
    if (rows < 1 || cols < 1) throw ValidationError("delta input must have at least one frame");

    double norm = 0.0;
    for (int n = 1; n <= window; ++n) norm += 2.0 * n * n;

    auto delta_of = [&](const std::vector<double>& src) {
        std::vector<double> d(static_cast<std::size_t>(rows) * cols, 0.0);
        for (int t = 0; t < rows; ++t) {
            for (int c = 0; c < cols; ++c) {
                double acc = 0.0;
                for (int n = 1; n <= window; ++n) {
                    const int fwd = std::min(t + n, rows - 1); // replicate edges
                    const int bwd = std::max(t - n, 0);
                    acc += n * (src[static_cast<std::size_t>(fwd) * cols + c] -
                                src[static_cast<std::size_t>(bwd) * cols + c]);
                }
                d[static_cast<std::size_t>(t) * cols + c] = acc / norm;
            }
        }
        return d;
    };

    const std::vector<double> d1 = delta_of(static_coeffs);
    const std::vector<double> d2 = delta_of(d1);

    std::vector<double> out(static_cast<std::size_t>(rows) * cols * 3);
    for (int t = 0; t < rows; ++t) {
        double* dst = out.data() + static_cast<std::size_t>(t) * cols * 3;
        const std::size_t off = static_cast<std::size_t>(t) * cols;
        for (int c = 0; c < cols; ++c) dst[c] = static_coeffs[off + c];
        for (int c = 0; c < cols; ++c) dst[cols + c] = d1[off + c];
        for (int c = 0; c < cols; ++c) dst[2 * cols + c] = d2[off + c];
    }
    return out;
}

MfccMatrix extract_mfcc(const AudioClip& clip, const MfccParams& params) {
    const std::size_t n = clip.samples.size();
    if (n < static_cast<std::size_t>(params.frame_len)) {
        throw ValidationError("clip too short for one frame: " + clip.id);
    }
    for (float s : clip.samples) {
        if (!std::isfinite(s)) throw NumericError("non-finite sample in clip: " + clip.id);
    }

    // Pre-emphasis over the whole signal with zero initial condition, so that
    // prepending whole frame shifts leaves overlapping frames bit-identical.
    std::vector<double> emphasized(n);
    emphasized[0] = clip.samples[0];
    for (std::size_t i = 1; i < n; ++i) {
        emphasized[i] = clip.samples[i] - params.preemphasis * clip.samples[i - 1];
    }

    std::vector<double> window(params.frame_len);
    for (int i = 0; i < params.frame_len; ++i) {
        window[i] = 0.54 - 0.46 * std::cos(2.0 * kPi * i / (params.frame_len - 1));
    }

    const auto filterbank = build_mel_filterbank(params);
    const int num_bins = params.fft_size / 2 + 1;
    const int T = params.num_frames(n);
    const int C = params.num_cepstra;

    std::vector<double> static_coeffs(static_cast<std::size_t>(T) * C);
    std::vector<std::complex<double>> buf(params.fft_size);
    std::vector<double> magnitude(num_bins);
    std::vector<double> log_mel(params.num_mel_filters);

    for (int t = 0; t < T; ++t) {
        const double* frame = emphasized.data() + static_cast<std::size_t>(t) * params.frame_shift;
        for (int i = 0; i < params.frame_len; ++i) buf[i] = frame[i] * window[i];
        for (int i = params.frame_len; i < params.fft_size; ++i) buf[i] = 0.0;
        fft_inplace(buf);
        for (int k = 0; k < num_bins; ++k) magnitude[k] = std::abs(buf[k]);

        for (int m = 0; m < params.num_mel_filters; ++m) {
            double e = 0.0;
            const auto& w = filterbank[m];
            for (int k = 0; k < num_bins; ++k) e += w[k] * magnitude[k];
            log_mel[m] = std::log(std::max(e, params.log_floor));
        }

        // DCT-II
        for (int c = 0; c < C; ++c) {
            double acc = 0.0;
            for (int m = 0; m < params.num_mel_filters; ++m) {
                acc += log_mel[m] * std::cos(kPi * c * (m + 0.5) / params.num_mel_filters);
            }
            static_coeffs[static_cast<std::size_t>(t) * C + c] = acc;
        }
    }

    MfccMatrix out;
    out.clip_id = clip.id;
    out.rows = T;
    out.cols = params.feature_dim();
    out.data = append_deltas(static_coeffs, T, C, params.delta_window);
    return out;
}

void round_to_float32(MfccMatrix& m) {
    for (double& v : m.data) v = static_cast<double>(static_cast<float>(v));
}

} // namespace aed
