#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "aed/audio.hpp"

namespace aed {

struct ManifestEntry {
    std::string id;
    std::string path;
    std::optional<std::string> label;
    std::optional<int> fold;
    SourceKind source = SourceKind::unlabeled;
    std::optional<double> duration_s;
};

// Immutable after load. Labeled entries carry both label and fold (1..10);
// unlabeled entries carry neither; ids are unique.
struct Manifest {
    std::vector<ManifestEntry> entries;

    std::map<int, int> fold_counts() const;
    std::vector<std::string> class_names() const; // sorted distinct labels
};

// One JSON object per line, keys: id, path, label?, fold?, source, duration_s?.
Manifest load_manifest(const std::string& path);
void save_manifest(const Manifest& manifest, const std::string& path);

// Validation shared by load_manifest and in-memory construction.
void validate_manifest(const Manifest& manifest);

} // namespace aed
