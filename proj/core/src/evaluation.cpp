#include "anomorph/evaluation.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <stdexcept>

#include "json.hpp"

#include "anomorph/errors.hpp"
#include "anomorph/metrics.hpp"
#include "anomorph/nifti_io.hpp"
#include "anomorph/volume_io.hpp"

namespace anomorph {

namespace {

using nlohmann::json;

Volume load_subject_volume(const std::string& path) {
    if (path.size() > 4 && path.compare(path.size() - 4, 4, ".nii") == 0)
        return load_nifti(path);
    return load_raw_volume(path);
}

float foreground_mean(const Volume& v, const std::vector<uint8_t>& fg) {
    double sum = 0.0;
    long count = 0;
    const float* a = v.data.data();
    for (long i = 0; i < v.data.size(); ++i)
        if (fg[(size_t)i]) {
            sum += a[i];
            ++count;
        }
    if (count == 0) throw validation_error("evaluate_cohort: empty foreground");
    return (float)(sum / (double)count);
}

void accumulate_region_table(const std::vector<SubjectReport>& subjects, int label,
                             std::map<std::string, RegionStat>& out) {
    std::map<std::string, std::vector<double>> samples;
    for (const auto& s : subjects)
        if (s.ok() && s.label == label)
            for (const auto& [name, v] : s.region_anomaly)
                samples[name].push_back((double)v);
    for (const auto& [name, vals] : samples) {
        RegionStat st;
        st.count = (long)vals.size();
        double sum = 0.0;
        for (double v : vals) sum += v;
        st.mean = sum / (double)vals.size();
        if (vals.size() > 1) {
            double ss = 0.0;
            for (double v : vals) ss += (v - st.mean) * (v - st.mean);
            st.stddev = std::sqrt(ss / (double)(vals.size() - 1));
        }
        out[name] = st;
    }
}

json subject_to_json(const SubjectReport& s) {
    json j;
    j["id"] = s.id;
    j["label"] = s.label;
    if (s.ok()) {
        j["anomaly_score"] = s.anomaly_score;
        j["residual_score"] = s.residual_score;
        j["folding_score"] = s.folding_score;
        if (!s.region_anomaly.empty()) {
            json r;
            for (const auto& [name, v] : s.region_anomaly) r[name] = v;
            j["region_scores"] = std::move(r);
        }
    } else {
        j["error"] = s.error;
    }
    return j;
}

SubjectReport subject_from_json(const json& j) {
    SubjectReport s;
    s.id = j.at("id").get<std::string>();
    s.label = j.at("label").get<int>();
    if (j.contains("error")) {
        s.error = j.at("error").get<std::string>();
        s.anomaly_score = s.residual_score = s.folding_score =
            std::numeric_limits<float>::quiet_NaN();
        return s;
    }
    s.anomaly_score = j.at("anomaly_score").get<float>();
    s.residual_score = j.at("residual_score").get<float>();
    s.folding_score = j.at("folding_score").get<float>();
    if (j.contains("region_scores"))
        for (const auto& [name, v] : j.at("region_scores").items())
            s.region_anomaly[name] = v.get<float>();
    return s;
}

json table_to_json(const std::map<std::string, RegionStat>& t) {
    json j = json::object();
    for (const auto& [name, st] : t)
        j[name] = {{"mean", st.mean}, {"std", st.stddev}, {"count", st.count}};
    return j;
}

std::map<std::string, RegionStat> table_from_json(const json& j) {
    std::map<std::string, RegionStat> t;
    for (const auto& [name, v] : j.items()) {
        RegionStat st;
        st.mean = v.at("mean").get<double>();
        st.stddev = v.at("std").get<double>();
        st.count = v.at("count").get<long>();
        t[name] = st;
    }
    return t;
}

} // namespace

CohortReport evaluate_cohort(const ModelSet& models, const CohortManifest& manifest) {
    if (manifest.entries.empty())
        throw validation_error("evaluate_cohort: empty manifest");

    CohortReport rep;
    rep.subjects.reserve(manifest.entries.size());
    for (const auto& entry : manifest.entries) {
        SubjectReport s;
        s.id = entry.id;
        s.label = entry.anomalous ? 1 : 0;
        try {
            Volume x = load_subject_volume(entry.volume_path);
            InferenceResult r = infer(models, x);

            std::vector<uint8_t> fg((size_t)x.data.size());
            if (entry.mask_path) {
                RegionMask mask = load_region_mask(*entry.mask_path);
                if (mask.shape != x.data.shape())
                    throw validation_error("mask shape mismatch for subject " + s.id);
                for (long i = 0; i < x.data.size(); ++i)
                    fg[(size_t)i] = mask.labels[(size_t)i] != 0;
                s.region_anomaly = region_scores(r, mask);
            } else {
                const float* xd = x.data.data();
                for (long i = 0; i < x.data.size(); ++i)
                    fg[(size_t)i] = xd[i] > 0.05f;
            }
            s.anomaly_score = foreground_mean(r.anomaly, fg);
            s.residual_score = foreground_mean(r.residual, fg);
            s.folding_score = foreground_mean(r.folding, fg);
        } catch (const std::exception& e) {
            s.error = e.what();
            s.anomaly_score = s.residual_score = s.folding_score =
                std::numeric_limits<float>::quiet_NaN();
        }
        rep.subjects.push_back(std::move(s));
    }

    std::vector<float> sa, sr, sf;
    std::vector<int> labels;
    for (const auto& s : rep.subjects)
        if (s.ok()) {
            sa.push_back(s.anomaly_score);
            sr.push_back(s.residual_score);
            sf.push_back(s.folding_score);
            labels.push_back(s.label);
        }
    bool has0 = false, has1 = false;
    for (int l : labels) (l ? has1 : has0) = true;
    if (!has0 || !has1)
        throw validation_error("evaluate_cohort: both classes required");
    rep.auroc_anomaly = auroc(sa, labels);
    rep.auroc_residual = auroc(sr, labels);
    rep.auroc_folding = auroc(sf, labels);

    accumulate_region_table(rep.subjects, 0, rep.regions_healthy);
    accumulate_region_table(rep.subjects, 1, rep.regions_anomalous);
    return rep;
}

std::string CohortReport::to_json() const {
    json j;
    j["auroc"] = {{"anomaly", auroc_anomaly},
                  {"residual", auroc_residual},
                  {"folding", auroc_folding}};
    json subs = json::array();
    for (const auto& s : subjects) subs.push_back(subject_to_json(s));
    j["subjects"] = std::move(subs);
    j["region_tables"] = {{"healthy", table_to_json(regions_healthy)},
                          {"anomalous", table_to_json(regions_anomalous)}};
    return j.dump(2);
}

CohortReport CohortReport::from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw validation_error(std::string("report parse error: ") + e.what());
    }
    CohortReport rep;
    rep.auroc_anomaly = j.at("auroc").at("anomaly").get<double>();
    rep.auroc_residual = j.at("auroc").at("residual").get<double>();
    rep.auroc_folding = j.at("auroc").at("folding").get<double>();
    for (const auto& s : j.at("subjects")) rep.subjects.push_back(subject_from_json(s));
    rep.regions_healthy = table_from_json(j.at("region_tables").at("healthy"));
    rep.regions_anomalous = table_from_json(j.at("region_tables").at("anomalous"));
    return rep;
}

void CohortReport::write_json(const std::string& path) const {
    std::ofstream f(path, std::ios::trunc);
    if (!f) throw std::runtime_error("cannot write report: " + path);
    f << to_json() << "\n";
    if (!f) throw std::runtime_error("write failed: " + path);
}

void CohortReport::write_csv(const std::string& path) const {
    std::ofstream f(path, std::ios::trunc);
    if (!f) throw std::runtime_error("cannot write report: " + path);
    f << "id,label,anomaly_score,residual_score,folding_score\n";
    char buf[128];
    for (const auto& s : subjects) {
        std::snprintf(buf, sizeof(buf), "%s,%d,%.9g,%.9g,%.9g", s.id.c_str(), s.label,
                      (double)s.anomaly_score, (double)s.residual_score,
                      (double)s.folding_score);
        f << buf << "\n";
    }
    if (!f) throw std::runtime_error("write failed: " + path);
}

} // namespace anomorph
