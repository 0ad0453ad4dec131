#pragma once

#include <map>
#include <string>
#include <vector>

#include "anomorph/manifest.hpp"
#include "anomorph/pipeline.hpp"

namespace anomorph {

// One manifest subject's evaluation row. A subject whose inference failed
// keeps its row with the error message and NaN scores.
struct SubjectReport {
    std::string id;
    int label = 0;
    float anomaly_score = 0.0f;
    float residual_score = 0.0f;
    float folding_score = 0.0f;
    std::map<std::string, float> region_anomaly; // present when a mask was given
    std::string error;                           // empty on success

    bool ok() const { return error.empty(); }
};

struct RegionStat {
    double mean = 0.0;
    double stddev = 0.0; // sample standard deviation (0 for a single subject)
    long count = 0;
};

// Cohort-level evaluation: three patient scores per subject (anomaly map,
// residual-only, folding-only) and the AUROC of each across cohorts, plus
// per-region score tables split by cohort.
struct CohortReport {
    std::vector<SubjectReport> subjects;
    double auroc_anomaly = 0.0;
    double auroc_residual = 0.0;
    double auroc_folding = 0.0;
    std::map<std::string, RegionStat> regions_healthy;
    std::map<std::string, RegionStat> regions_anomalous;

    std::string to_json() const;
    static CohortReport from_json(const std::string& text);
    void write_json(const std::string& path) const;
    void write_csv(const std::string& path) const; // id,label,anomaly_score,...
};

// Runs inference over every manifest subject. Per-subject failures are
// captured in the report; both cohorts must yield at least one scored
// subject or evaluation fails with "both classes required".
CohortReport evaluate_cohort(const ModelSet& models, const CohortManifest& manifest);

} // namespace anomorph
