#include "anomorph/manifest.hpp"

#include <filesystem>
#include <fstream>
#include <set>

#include "json.hpp"

#include "anomorph/errors.hpp"

namespace anomorph {

namespace fs = std::filesystem;
using nlohmann::json;

std::vector<SubjectEntry> CohortManifest::cohort(bool anomalous) const {
    std::vector<SubjectEntry> out;
    for (const auto& e : entries)
        if (e.anomalous == anomalous) out.push_back(e);
    return out;
}

CohortManifest load_manifest(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw validation_error("cannot open manifest: " + path);
    json j;
    try {
        f >> j;
    } catch (const json::parse_error& e) {
        throw validation_error("bad manifest JSON in " + path + ": " + e.what());
    }
    if (!j.is_array()) throw validation_error("manifest must be a JSON array: " + path);

    const fs::path dir = fs::path(path).parent_path();
    auto resolve = [&](const std::string& p) {
        fs::path q(p);
        return q.is_absolute() ? q.string() : (dir / q).string();
    };
    // A referenced raw volume may be named with or without its extension.
    auto resolvable = [](const std::string& p) {
        return fs::exists(p) || fs::exists(p + ".f32raw");
    };

    CohortManifest m;
    std::set<std::string> ids;
    for (const auto& e : j) {
        if (!e.is_object() || !e.contains("id") || !e.contains("volume") ||
            !e.contains("label"))
            throw validation_error("manifest entries need id, volume, label: " + path);
        SubjectEntry s;
        s.id = e["id"].get<std::string>();
        if (!ids.insert(s.id).second)
            throw validation_error("duplicate subject id '" + s.id + "' in " + path);
        s.volume_path = resolve(e["volume"].get<std::string>());
        const std::string label = e["label"].get<std::string>();
        if (label == "anomalous") s.anomalous = true;
        else if (label == "healthy") s.anomalous = false;
        else throw validation_error("label must be healthy or anomalous, got '" + label +
                                    "' for subject " + s.id);
        if (!resolvable(s.volume_path))
            throw validation_error("volume not found for subject " + s.id + ": " +
                                   s.volume_path);
        if (e.contains("mask") && !e["mask"].is_null()) {
            s.mask_path = resolve(e["mask"].get<std::string>());
            if (!resolvable(*s.mask_path))
                throw validation_error("mask not found for subject " + s.id + ": " +
                                       *s.mask_path);
        }
        m.entries.push_back(std::move(s));
    }
    return m;
}

void save_manifest(const CohortManifest& m, const std::string& path) {
    json arr = json::array();
    for (const auto& e : m.entries) {
        json o;
        o["id"] = e.id;
        o["volume"] = e.volume_path;
        o["label"] = e.anomalous ? "anomalous" : "healthy";
        if (e.mask_path) o["mask"] = *e.mask_path;
        arr.push_back(std::move(o));
    }
    std::ofstream f(path, std::ios::trunc);
    if (!f) throw std::runtime_error("cannot write manifest: " + path);
    f << arr.dump(2) << "\n";
    if (!f) throw std::runtime_error("write failed: " + path);
}

} // namespace anomorph
