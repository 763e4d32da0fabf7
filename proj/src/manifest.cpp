#include "aed/manifest.hpp"

#include <fstream>
#include <set>

#include <json.hpp>

#include "aed/error.hpp"

namespace aed {

using nlohmann::json;

std::map<int, int> Manifest::fold_counts() const {
    std::map<int, int> counts;
    for (const auto& e : entries) {
        if (e.fold) ++counts[*e.fold];
    }
    return counts;
}

std::vector<std::string> Manifest::class_names() const {
    std::set<std::string> names;
    for (const auto& e : entries) {
        if (e.label) names.insert(*e.label);
    }
    return {names.begin(), names.end()};
}

void validate_manifest(const Manifest& manifest) {
    std::set<std::string> seen;
    for (const auto& e : manifest.entries) {
        if (e.id.empty()) throw ValidationError("manifest entry with empty id");
        if (!seen.insert(e.id).second) throw ValidationError("duplicate manifest id: " + e.id);
        if (e.source == SourceKind::labeled) {
            if (!e.label) throw ValidationError("labeled entry missing label: " + e.id);
            if (!e.fold) throw ValidationError("labeled entry missing fold: " + e.id);
        } else {
            if (e.label || e.fold) {
                throw ValidationError("unlabeled entry must not carry label/fold: " + e.id);
            }
        }
        if (e.fold && (*e.fold < 1 || *e.fold > 10)) {
            throw ValidationError("fold outside 1..10 for entry " + e.id + ": " +
                                  std::to_string(*e.fold));
        }
    }
}

Manifest load_manifest(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot open manifest: " + path);

    Manifest manifest;
    std::string line;
    int line_no = 0;
    while (std::getline(f, line)) {
        ++line_no;
        if (line.empty() || line.find_first_not_of(" \t\r") == std::string::npos) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception& ex) {
            throw ParseError("manifest parse error at line " + std::to_string(line_no) + ": " +
                             ex.what());
        }
        if (!j.is_object()) {
            throw ParseError("manifest parse error at line " + std::to_string(line_no) +
                             ": expected an object");
        }
        try {
            ManifestEntry e;
            e.id = j.at("id").get<std::string>();
            e.path = j.at("path").get<std::string>();
            const std::string source = j.at("source").get<std::string>();
            if (source == "labeled") {
                e.source = SourceKind::labeled;
            } else if (source == "unlabeled") {
                e.source = SourceKind::unlabeled;
            } else {
                throw ParseError("unknown source \"" + source + "\"");
            }
            if (j.contains("label")) e.label = j.at("label").get<std::string>();
            if (j.contains("fold")) e.fold = j.at("fold").get<int>();
            if (j.contains("duration_s")) e.duration_s = j.at("duration_s").get<double>();
            manifest.entries.push_back(std::move(e));
        } catch (const json::exception& ex) {
            throw ParseError("manifest parse error at line " + std::to_string(line_no) + ": " +
                             ex.what());
        } catch (const ParseError& ex) {
            throw ParseError("manifest parse error at line " + std::to_string(line_no) + ": " +
                             ex.what());
        }
    }
    validate_manifest(manifest);
    return manifest;
}

void save_manifest(const Manifest& manifest, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw IoError("cannot write manifest: " + path);
    for (const auto& e : manifest.entries) {
        json j;
        j["id"] = e.id;
        j["path"] = e.path;
        j["source"] = e.source == SourceKind::labeled ? "labeled" : "unlabeled";
        if (e.label) j["label"] = *e.label;
        if (e.fold) j["fold"] = *e.fold;
        if (e.duration_s) j["duration_s"] = *e.duration_s;
        f << j.dump() << "\n";
    }
    if (!f) throw IoError("short write: " + path);
}

} // namespace aed
