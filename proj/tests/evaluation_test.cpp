#include "doctest.h"

#include "anomorph/errors.hpp"
#include "anomorph/evaluation.hpp"
#include "anomorph/phantom.hpp"
#include "anomorph/volume_io.hpp"

#include "support.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

using namespace anomorph;
using namespace testsup;

namespace {

std::filesystem::path fresh_dir(const char* name) {
    auto d = std::filesystem::temp_directory_path() / "anomorph_eval_test" / name;
    std::filesystem::remove_all(d);
    std::filesystem::create_directories(d);
    return d;
}

// 2 healthy + 2 anomalous phantoms on disk, with masks.
CohortManifest small_cohort(const std::filesystem::path& dir, int grid = 16) {
    CohortManifest m;
    for (int i = 0; i < 4; ++i) {
        const bool anomalous = i >= 2;
        PhantomSpec spec;
        spec.seed = 9100 + (uint64_t)i;
        spec.grid = grid;
        spec.severity = anomalous ? 1.0f : 0.0f;
        Phantom p = generate_phantom(spec);
        const std::string id =
            (anomalous ? "anomalous_" : "healthy_") + std::to_string(i);
        save_volume(p.volume, (dir / id).string());
        save_region_mask(p.mask, (dir / (id + "_mask")).string());
        m.entries.push_back({id, (dir / id).string(), anomalous,
                             (dir / (id + "_mask")).string()});
    }
    return m;
}

ArchConfig tiny_arch() {
    ArchConfig a;
    a.levels = 2;
    a.base_channels = 4;
    a.latent_channels = 6;
    a.disc_levels = 2;
    a.disc_base = 4;
    a.deformer_hidden = 3;
    return a;
}

} // namespace

TEST_SUITE("evaluation") {

TEST_CASE("an untrained model evaluates a small cohort end to end") {
    auto dir = fresh_dir("endtoend");
    CohortManifest m = small_cohort(dir);
    ModelSet models = build_models(tiny_arch(), 17, 10.0f, 0.01f);

    CohortReport rep = evaluate_cohort(models, m);
    REQUIRE(rep.subjects.size() == 4);
    int healthy = 0, anomalous = 0;
    for (const auto& s : rep.subjects) {
        CHECK(s.ok());
        CHECK(std::isfinite(s.anomaly_score));
        CHECK(std::isfinite(s.residual_score));
        CHECK(std::isfinite(s.folding_score));
        CHECK(s.region_anomaly.size() == 5); // masks were provided
        (s.label ? anomalous : healthy)++;
        // Fresh deformer heads mean zero folding, hence zero anomaly.
        CHECK(s.folding_score == 0.0f);
        CHECK(s.anomaly_score == 0.0f);
        CHECK(s.residual_score > 0.0f);
    }
    CHECK(healthy == 2);
    CHECK(anomalous == 2);
    // Scores exist for all three channels; with all-zero anomaly scores the
    // tie-handling AUROC lands on chance.
    CHECK(rep.auroc_anomaly == doctest::Approx(0.5));
    CHECK(rep.auroc_folding == doctest::Approx(0.5));
    CHECK(rep.auroc_residual >= 0.0);
    CHECK(rep.auroc_residual <= 1.0);
    // Region tables aggregate over both cohorts.
    CHECK(rep.regions_healthy.size() == 5);
    CHECK(rep.regions_anomalous.size() == 5);
    for (const auto& [name, st] : rep.regions_healthy) CHECK(st.count == 2);
    for (const auto& [name, st] : rep.regions_anomalous) CHECK(st.count == 2);
}

TEST_CASE("report json round trips") {
    auto dir = fresh_dir("json");
    CohortManifest m = small_cohort(dir);
    ModelSet models = build_models(tiny_arch(), 18, 10.0f, 0.01f);
    CohortReport rep = evaluate_cohort(models, m);

    CohortReport back = CohortReport::from_json(rep.to_json());
    CHECK(back.subjects.size() == rep.subjects.size());
    CHECK(back.auroc_anomaly == doctest::Approx(rep.auroc_anomaly));
    CHECK(back.auroc_residual == doctest::Approx(rep.auroc_residual));
    CHECK(back.auroc_folding == doctest::Approx(rep.auroc_folding));
    for (size_t i = 0; i < rep.subjects.size(); ++i) {
        CHECK(back.subjects[i].id == rep.subjects[i].id);
        CHECK(back.subjects[i].label == rep.subjects[i].label);
        CHECK(back.subjects[i].residual_score ==
              doctest::Approx(rep.subjects[i].residual_score));
        CHECK(back.subjects[i].region_anomaly.size() ==
              rep.subjects[i].region_anomaly.size());
    }
    CHECK(back.regions_healthy.size() == rep.regions_healthy.size());

    auto jpath = (dir / "report.json").string();
    rep.write_json(jpath);
    std::ifstream jf(jpath);
    std::string text((std::istreambuf_iterator<char>(jf)),
                     std::istreambuf_iterator<char>());
    CohortReport from_disk = CohortReport::from_json(text);
    CHECK(from_disk.subjects.size() == 4);
}

TEST_CASE("report csv has the exact header and one row per subject") {
    auto dir = fresh_dir("csv");
    CohortManifest m = small_cohort(dir);
    ModelSet models = build_models(tiny_arch(), 19, 10.0f, 0.01f);
    CohortReport rep = evaluate_cohort(models, m);

    auto cpath = (dir / "report.csv").string();
    rep.write_csv(cpath);
    std::ifstream f(cpath);
    std::string header;
    std::getline(f, header);
    CHECK(header == "id,label,anomaly_score,residual_score,folding_score");
    int rows = 0;
    std::string line;
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        ++rows;
        CHECK(std::count(line.begin(), line.end(), ',') == 4);
    }
    CHECK(rows == 4);
}

TEST_CASE("a subject with a broken volume is reported, not fatal") {
    auto dir = fresh_dir("broken");
    CohortManifest m = small_cohort(dir);
    // Sabotage one anomalous subject after manifest construction: a shape
    // the encoder cannot split in half twice.
    Rng rng(1);
    save_volume(Volume(random_array({10, 10, 10}, rng, 0.0f, 1.0f)),
                m.entries[3].volume_path);
    ModelSet models = build_models(tiny_arch(), 20, 10.0f, 0.01f);

    CohortReport rep = evaluate_cohort(models, m);
    REQUIRE(rep.subjects.size() == 4);
    CHECK(!rep.subjects[3].ok());
    CHECK(!rep.subjects[3].error.empty());
    CHECK(std::isnan(rep.subjects[3].anomaly_score));
    // The other anomalous subject still carries the class.
    CHECK(rep.subjects[2].ok());
    CHECK(std::isfinite(rep.auroc_residual));

    // Errored subjects keep their rows in the CSV.
    auto cpath = (dir / "report.csv").string();
    rep.write_csv(cpath);
    std::ifstream f(cpath);
    std::string all((std::istreambuf_iterator<char>(f)),
                    std::istreambuf_iterator<char>());
    CHECK(all.find(rep.subjects[3].id) != std::string::npos);
    CHECK(all.find("nan") != std::string::npos);
}

TEST_CASE("evaluation needs at least one scored subject per class") {
    auto dir = fresh_dir("oneclass");
    CohortManifest m = small_cohort(dir);
    m.entries.erase(m.entries.begin() + 2, m.entries.end()); // healthy only
    ModelSet models = build_models(tiny_arch(), 21, 10.0f, 0.01f);
    CHECK_THROWS_WITH_AS(evaluate_cohort(models, m),
                         doctest::Contains("both classes required"),
                         validation_error);
}

} // TEST_SUITE
