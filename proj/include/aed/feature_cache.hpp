#pragma once

#include <optional>
#include <string>

#include "aed/mfcc.hpp"

namespace aed {

// Per-clip binary feature records under a cache directory. Layout:
//   magic "AEDF" | u32 version | u32 header_len | header JSON | T*D float32 LE
// The header carries the clip id and the full DSP parameter block; a record
// whose parameters differ from the requested ones is treated as absent.
class FeatureCache {
public:
    explicit FeatureCache(std::string dir);

    std::optional<MfccMatrix> load(const std::string& clip_id, const MfccParams& params) const;
    void store(const MfccMatrix& features, const MfccParams& params) const;

    std::string record_path(const std::string& clip_id) const;

private:
    std::string dir_;
};

} // namespace aed
