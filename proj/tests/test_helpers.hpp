#pragma once

#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "aed/evaluation.hpp"
#include "aed/rng.hpp"

namespace aed::test {

// Fresh directory under the system temp root, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        static std::uint64_t counter = 0;
        path_ = std::filesystem::temp_directory_path() /
                ("aed_test_" + tag + "_" + std::to_string(++counter) + "_" +
                 std::to_string(::getpid()));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    const std::filesystem::path& path() const { return path_; }
    std::string str(const std::string& rel = "") const {
        return rel.empty() ? path_.string() : (path_ / rel).string();
    }

private:
    std::filesystem::path path_;
};

inline std::vector<float> make_sine(double freq_hz, double duration_s, int rate,
                                    double amplitude = 0.5, double phase = 0.0) {
    const auto n = static_cast<std::size_t>(std::llround(duration_s * rate));
    std::vector<float> x(n);
    for (std::size_t i = 0; i < n; ++i) {
        x[i] = static_cast<float>(
            amplitude * std::sin(2.0 * 3.14159265358979323846 * freq_hz * i / rate + phase));
    }
    return x;
}

// Writes a WAV with explicit format fields; samples are interleaved values in
// [-1, 1]. Supports PCM 8/16/24-bit and 32-bit float.
inline void write_wav(const std::string& path, const std::vector<double>& interleaved,
                      int channels, int rate, int bits, bool float_format = false) {
    std::ofstream f(path, std::ios::binary);
    const int bytes_per = bits / 8;
    const std::uint32_t data_len =
        static_cast<std::uint32_t>(interleaved.size() * static_cast<std::size_t>(bytes_per));
    auto put_u32 = [&](std::uint32_t v) { f.write(reinterpret_cast<char*>(&v), 4); };
    auto put_u16 = [&](std::uint16_t v) { f.write(reinterpret_cast<char*>(&v), 2); };

    f.write("RIFF", 4);
    put_u32(36 + data_len);
    f.write("WAVE", 4);
    f.write("fmt ", 4);
    put_u32(16);
    put_u16(float_format ? 3 : 1);
    put_u16(static_cast<std::uint16_t>(channels));
    put_u32(static_cast<std::uint32_t>(rate));
    put_u32(static_cast<std::uint32_t>(rate * channels * bytes_per));
    put_u16(static_cast<std::uint16_t>(channels * bytes_per));
    put_u16(static_cast<std::uint16_t>(bits));
    f.write("data", 4);
    put_u32(data_len);

    for (double v : interleaved) {
        if (float_format) {
            const auto fv = static_cast<float>(v);
            f.write(reinterpret_cast<const char*>(&fv), 4);
        } else if (bits == 16) {
            const auto q = static_cast<std::int16_t>(std::lround(v * 32767.0));
            f.write(reinterpret_cast<const char*>(&q), 2);
        } else if (bits == 8) {
            const auto q = static_cast<std::uint8_t>(std::lround(v * 127.0) + 128);
            f.write(reinterpret_cast<const char*>(&q), 1);
        } else if (bits == 24) {
            const auto q = static_cast<std::int32_t>(std::lround(v * 8388607.0));
            const char b[3] = {static_cast<char>(q & 0xFF), static_cast<char>((q >> 8) & 0xFF),
                               static_cast<char>((q >> 16) & 0xFF)};
            f.write(b, 3);
        }
    }
}

// Counting-based AP oracle, deliberately different from the sort-based
// implementation: ranks are computed by pairwise comparison, then precision
// contributions are summed in rank order.
inline double ap_oracle(const std::vector<double>& scores, const std::vector<int>& labels) {
    const std::size_t n = scores.size();
    std::vector<std::pair<std::size_t, double>> positives; // (rank, precision at rank)
    std::size_t num_pos = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (labels[i] == 1) ++num_pos;
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (labels[i] != 1) continue;
        std::size_t rank = 1;
        std::size_t pos_at_or_above = 0;
        for (std::size_t j = 0; j < n; ++j) {
            const bool above = scores[j] > scores[i] || (scores[j] == scores[i] && j < i);
            if (above && j != i) ++rank;
            if (labels[j] == 1 && (above || j == i)) ++pos_at_or_above;
        }
        positives.emplace_back(rank, static_cast<double>(pos_at_or_above) / rank);
    }
    std::sort(positives.begin(), positives.end());
    double sum = 0.0;
    for (const auto& [rank, prec] : positives) sum += prec;
    return sum / static_cast<double>(num_pos);
}

} // namespace aed::test
