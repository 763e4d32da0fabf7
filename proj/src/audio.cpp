#include "aed/audio.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>

#include "aed/error.hpp"

namespace aed {
namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kKaiserBeta = 8.6;
constexpr int kTapsPerPhase = 32; // kernel half-width of 16 output-rate samples

std::uint32_t read_u32(const unsigned char* p) {
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

std::uint16_t read_u16(const unsigned char* p) {
    return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

// Modified Bessel function of the first kind, order zero (power series).
double bessel_i0(double x) {
    double sum = 1.0;
    double term = 1.0;
    const double half_x = x / 2.0;
    for (int k = 1; k < 64; ++k) {
        term *= (half_x / k) * (half_x / k);
        sum += term;
        if (term < sum * 1e-18) break;
    }
    return sum;
}

double sinc(double x) {
    if (std::abs(x) < 1e-12) return 1.0;
    const double px = kPi * x;
    return std::sin(px) / px;
}

struct WavData {
    int rate = 0;
    int channels = 0;
    int bits = 0;
    std::vector<double> mono; // channel average, in [-1, 1]
    bool silent = true;
};

WavData read_wav(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open audio file: " + path);
    std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(f)),
                                     std::istreambuf_iterator<char>());
    if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
        std::memcmp(bytes.data() + 8, "WAVE", 4) != 0) {
        throw ParseError("not a RIFF/WAVE file: " + path);
    }

    bool have_fmt = false;
    std::uint16_t format = 0;
    std::uint16_t channels = 0;
    std::uint32_t rate = 0;
    std::uint16_t bits = 0;
    std::size_t data_off = 0;
    std::size_t data_len = 0;

    std::size_t pos = 12;
    while (pos + 8 <= bytes.size()) {
        const char* tag = reinterpret_cast<const char*>(bytes.data() + pos);
        const std::uint32_t chunk_len = read_u32(bytes.data() + pos + 4);
        const std::size_t body = pos + 8;
        if (std::memcmp(tag, "fmt ", 4) == 0) {
            if (body + 16 > bytes.size()) throw ParseError("truncated fmt chunk: " + path);
            format = read_u16(bytes.data() + body);
            channels = read_u16(bytes.data() + body + 2);
            rate = read_u32(bytes.data() + body + 4);
            bits = read_u16(bytes.data() + body + 14);
            if (format == 0xFFFE) {
                // WAVE_FORMAT_EXTENSIBLE: actual code is the first two bytes of SubFormat
                if (body + 26 > bytes.size()) throw ParseError("truncated fmt chunk: " + path);
                format = read_u16(bytes.data() + body + 24);
            }
            have_fmt = true;
        } else if (std::memcmp(tag, "data", 4) == 0) {
            data_off = body;
            data_len = chunk_len;
        }
        pos = body + chunk_len + (chunk_len & 1); // chunks are word-aligned
    }

    if (!have_fmt || data_off == 0) throw ParseError("missing fmt/data chunk: " + path);
    if (channels == 0 || rate == 0) throw ParseError("invalid WAV format fields: " + path);
    if (data_off + data_len > bytes.size()) throw ParseError("truncated data chunk: " + path);

    const bool pcm_int = format == 1 && (bits == 8 || bits == 16 || bits == 24);
    const bool pcm_float = format == 3 && bits == 32;
    if (!pcm_int && !pcm_float) {
        throw ParseError("unsupported codec (format " + std::to_string(format) + ", " +
                         std::to_string(bits) + "-bit): " + path);
    }

    const std::size_t bytes_per_sample = bits / 8;
    const std::size_t frame_size = bytes_per_sample * channels;
    const std::size_t num_frames = data_len / frame_size;
    if (num_frames == 0) throw ParseError("zero-length audio: " + path);

    WavData out;
    out.rate = static_cast<int>(rate);
    out.channels = channels;
    out.bits = bits;
    out.mono.resize(num_frames);

    const unsigned char* d = bytes.data() + data_off;
    for (std::size_t n = 0; n < num_frames; ++n) {
        double acc = 0.0;
        for (int c = 0; c < channels; ++c) {
            const unsigned char* s = d + n * frame_size + c * bytes_per_sample;
            double v = 0.0;
            if (pcm_float) {
                float fv;
                std::memcpy(&fv, s, 4);
                v = fv;
            } else if (bits == 16) {
                const auto raw = static_cast<std::int16_t>(s[0] | (s[1] << 8));
                v = raw / 32768.0;
            } else if (bits == 8) {
                v = (static_cast<int>(s[0]) - 128) / 128.0;
            } else { // 24-bit
                std::int32_t raw = s[0] | (s[1] << 8) | (s[2] << 16);
                if (raw & 0x800000) raw |= ~0xFFFFFF;
                v = raw / 8388608.0;
            }
            acc += v;
        }
        const double m = acc / channels;
        out.mono[n] = m;
        if (m != 0.0) out.silent = false;
    }
    return out;
}

std::vector<double> resample_sinc_impl(const std::vector<double>& in, int in_rate, int out_rate) {
    if (in_rate == out_rate) return in;
    const std::int64_t n_in = static_cast<std::int64_t>(in.size());
    const std::int64_t n_out =
        (n_in * static_cast<std::int64_t>(out_rate) + in_rate / 2) / in_rate;
    const double ratio = static_cast<double>(out_rate) / in_rate;
    // When downsampling, the anti-alias cutoff sits at the output Nyquist and
    // the kernel stretches accordingly.
    const double scale = std::min(1.0, ratio);
    const double half_width = (kTapsPerPhase / 2.0) / scale;
    const double i0_beta = bessel_i0(kKaiserBeta);

    std::vector<double> out(static_cast<std::size_t>(std::max<std::int64_t>(n_out, 0)));
    for (std::int64_t n = 0; n < n_out; ++n) {
        const double center = static_cast<double>(n) * in_rate / out_rate;
        const auto j_lo = static_cast<std::int64_t>(std::ceil(center - half_width));
        const auto j_hi = static_cast<std::int64_t>(std::floor(center + half_width));
        double acc = 0.0;
        for (std::int64_t j = std::max<std::int64_t>(j_lo, 0);
             j <= std::min<std::int64_t>(j_hi, n_in - 1); ++j) {
            const double t = center - static_cast<double>(j);
            const double u = t / half_width; // in [-1, 1]
            const double window = bessel_i0(kKaiserBeta * std::sqrt(std::max(0.0, 1.0 - u * u))) / i0_beta;
            acc += in[static_cast<std::size_t>(j)] * scale * sinc(scale * t) * window;
        }
        out[static_cast<std::size_t>(n)] = acc;
    }
    return out;
}

} // namespace

std::vector<float> resample_sinc(const std::vector<float>& in, int in_rate, int out_rate) {
    std::vector<double> tmp(in.begin(), in.end());
    std::vector<double> res = resample_sinc_impl(tmp, in_rate, out_rate);
    std::vector<float> out(res.size());
    for (std::size_t i = 0; i < res.size(); ++i) {
        out[i] = static_cast<float>(std::clamp(res[i], -1.0, 1.0));
    }
    return out;
}

AudioClip decode_and_normalize(const std::string& path, DecodeStats* stats) {
    WavData wav = read_wav(path);

    std::vector<double> mono = std::move(wav.mono);
    if (wav.rate != kTargetRateHz) {
        mono = resample_sinc_impl(mono, wav.rate, kTargetRateHz);
        if (mono.empty()) throw ParseError("zero-length audio after resampling: " + path);
    }

    AudioClip clip;
    clip.id = std::filesystem::path(path).stem().string();
    clip.sample_rate_hz = kTargetRateHz;
    clip.samples.resize(mono.size());
    for (std::size_t i = 0; i < mono.size(); ++i) {
        clip.samples[i] = static_cast<float>(std::clamp(mono[i], -1.0, 1.0));
    }

    if (stats) {
        stats->source_rate_hz = wav.rate;
        stats->source_channels = wav.channels;
        stats->source_bits = wav.bits;
        stats->silent = wav.silent;
    }
    return clip;
}

void write_wav_16bit_mono(const std::string& path, const std::vector<float>& samples,
                          int sample_rate_hz) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot write audio file: " + path);

    const std::uint32_t data_len = static_cast<std::uint32_t>(samples.size() * 2);
    auto put_u32 = [&](std::uint32_t v) {
        unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                              static_cast<unsigned char>(v >> 16),
                              static_cast<unsigned char>(v >> 24)};
        f.write(reinterpret_cast<char*>(b), 4);
    };
    auto put_u16 = [&](std::uint16_t v) {
        unsigned char b[2] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8)};
        f.write(reinterpret_cast<char*>(b), 2);
    };

    f.write("RIFF", 4);
    put_u32(36 + data_len);
    f.write("WAVE", 4);
    f.write("fmt ", 4);
    put_u32(16);
    put_u16(1); // PCM
    put_u16(1); // mono
    put_u32(static_cast<std::uint32_t>(sample_rate_hz));
    put_u32(static_cast<std::uint32_t>(sample_rate_hz * 2));
    put_u16(2);
    put_u16(16);
    f.write("data", 4);
    put_u32(data_len);
    for (float s : samples) {
        const double clamped = std::clamp(static_cast<double>(s), -1.0, 1.0);
        const auto q = static_cast<std::int16_t>(std::lround(clamped * 32767.0));
        put_u16(static_cast<std::uint16_t>(q));
    }
    if (!f) throw IoError("short write: " + path);
}

std::vector<AudioClip> segment_clip(const AudioClip& clip, double seg_len_s) {
    if (seg_len_s <= 0.0) throw ValidationError("segment length must be positive");
    const std::size_t seg_len =
        static_cast<std::size_t>(std::llround(seg_len_s * clip.sample_rate_hz));
    const std::size_t min_len = static_cast<std::size_t>(clip.sample_rate_hz); // 1.0 s

    std::vector<AudioClip> out;
    std::size_t offset = 0;
    std::size_t k = 0;
    const std::size_t n = clip.samples.size();
    while (offset < n) {
        const std::size_t remaining = n - offset;
        std::size_t take = 0;
        if (remaining >= seg_len) {
            take = seg_len;
        } else if (remaining >= min_len) {
            take = remaining;
        } else {
            break;
        }
        AudioClip seg;
        seg.id = clip.id + "#" + std::to_string(k);
        seg.sample_rate_hz = clip.sample_rate_hz;
        seg.source = clip.source;
        seg.label = clip.label;
        seg.fold = clip.fold;
        seg.samples.assign(clip.samples.begin() + offset, clip.samples.begin() + offset + take);
        out.push_back(std::move(seg));
        offset += take;
        ++k;
    }
    return out;
}

std::string formulate_query(const std::string& label) {
    if (label.empty()) throw ValidationError("empty class label");
    std::string out;
    bool pending_space = false;
    for (char c : label) {
        if (c == '_' || c == ' ') {
            pending_space = !out.empty();
        } else {
            if (pending_space) out.push_back(' ');
            pending_space = false;
            out.push_back(c);
        }
    }
    if (out.empty()) throw ValidationError("empty class label");
    return out + " sound";
}

bool duration_filter(const VideoMeta& meta) {
    return meta.duration_s > 5.0 && meta.duration_s < 600.0;
}

} // namespace aed
