#pragma once

#include <optional>
#include <string>
#include <vector>

namespace anomorph {

// Subject list driving training and evaluation. On disk: a JSON array of
// {id, volume, label, mask?} with label "healthy" or "anomalous"; paths are
// resolved relative to the manifest's directory.
struct SubjectEntry {
    std::string id;
    std::string volume_path;
    bool anomalous = false;
    std::optional<std::string> mask_path;
};

struct CohortManifest {
    std::vector<SubjectEntry> entries;
    uint64_t seed = 0; // generation-time bookkeeping; not serialized

    std::vector<SubjectEntry> cohort(bool anomalous) const;
};

CohortManifest load_manifest(const std::string& path);
void save_manifest(const CohortManifest& m, const std::string& path);

} // namespace anomorph
