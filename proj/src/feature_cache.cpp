#include "aed/feature_cache.hpp"

#include <cstring>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "aed/error.hpp"
#include "aed/rng.hpp"

namespace aed {

using nlohmann::json;

namespace {

constexpr char kMagic[4] = {'A', 'E', 'D', 'F'};
constexpr std::uint32_t kVersion = 1;

json params_to_json(const MfccParams& p) {
    return json{{"sample_rate_hz", p.sample_rate_hz},
                {"frame_len", p.frame_len},
                {"frame_shift", p.frame_shift},
                {"fft_size", p.fft_size},
                {"num_mel_filters", p.num_mel_filters},
                {"mel_low_hz", p.mel_low_hz},
                {"mel_high_hz", p.mel_high_hz},
                {"num_cepstra", p.num_cepstra},
                {"preemphasis", p.preemphasis},
                {"log_floor", p.log_floor},
                {"delta_window", p.delta_window}};
}

MfccParams params_from_json(const json& j) {
    MfccParams p;
    p.sample_rate_hz = j.at("sample_rate_hz").get<int>();
    p.frame_len = j.at("frame_len").get<int>();
    p.frame_shift = j.at("frame_shift").get<int>();
    p.fft_size = j.at("fft_size").get<int>();
    p.num_mel_filters = j.at("num_mel_filters").get<int>();
    p.mel_low_hz = j.at("mel_low_hz").get<double>();
    p.mel_high_hz = j.at("mel_high_hz").get<double>();
    p.num_cepstra = j.at("num_cepstra").get<int>();
    p.preemphasis = j.at("preemphasis").get<double>();
    p.log_floor = j.at("log_floor").get<double>();
    p.delta_window = j.at("delta_window").get<int>();
    return p;
}

} // namespace

FeatureCache::FeatureCache(std::string dir) : dir_(std::move(dir)) {
    std::filesystem::create_directories(dir_);
}

std::string FeatureCache::record_path(const std::string& clip_id) const {
    // ids may contain '#' and other path-hostile characters; hash for the name
    // and keep the real id inside the header for verification
    const std::uint64_t h = fnv1a64(clip_id.data(), clip_id.size());
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return (std::filesystem::path(dir_) / (std::string(buf) + ".feat")).string();
}

std::optional<MfccMatrix> FeatureCache::load(const std::string& clip_id,
                                             const MfccParams& params) const {
    std::ifstream f(record_path(clip_id), std::ios::binary);
    if (!f) return std::nullopt;

    char magic[4];
    std::uint32_t version = 0;
    std::uint32_t header_len = 0;
    f.read(magic, 4);
    f.read(reinterpret_cast<char*>(&version), 4);
    f.read(reinterpret_cast<char*>(&header_len), 4);
    if (!f || std::memcmp(magic, kMagic, 4) != 0 || version != kVersion) return std::nullopt;

    std::string header(header_len, '\0');
    f.read(header.data(), header_len);
    if (!f) return std::nullopt;

    json j;
    try {
        j = json::parse(header);
    } catch (const json::exception&) {
        return std::nullopt;
    }
    if (j.at("clip_id").get<std::string>() != clip_id) return std::nullopt;
    if (!(params_from_json(j.at("dsp")) == params)) return std::nullopt; // stale record

    MfccMatrix m;
    m.clip_id = clip_id;
    m.rows = j.at("rows").get<int>();
    m.cols = j.at("cols").get<int>();
    const std::size_t count = static_cast<std::size_t>(m.rows) * m.cols;
    std::vector<float> raw(count);
    f.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(count * 4));
    if (!f) return std::nullopt;
    m.data.assign(raw.begin(), raw.end());
    return m;
}

void FeatureCache::store(const MfccMatrix& features, const MfccParams& params) const {
    json header{{"clip_id", features.clip_id},
                {"rows", features.rows},
                {"cols", features.cols},
                {"dsp", params_to_json(params)}};
    const std::string header_str = header.dump();

    const std::string path = record_path(features.clip_id);
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot write feature cache record: " + path);

    const auto header_len = static_cast<std::uint32_t>(header_str.size());
    f.write(kMagic, 4);
    f.write(reinterpret_cast<const char*>(&kVersion), 4);
    f.write(reinterpret_cast<const char*>(&header_len), 4);
    f.write(header_str.data(), header_str.size());

    std::vector<float> raw(features.data.size());
    for (std::size_t i = 0; i < raw.size(); ++i) raw[i] = static_cast<float>(features.data[i]);
    f.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size() * 4));
    if (!f) throw IoError("short write: " + path);
}

} // namespace aed
