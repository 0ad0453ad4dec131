#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "anomorph/checkpoint.hpp"
#include "anomorph/config.hpp"
#include "anomorph/errors.hpp"
#include "anomorph/evaluation.hpp"
#include "anomorph/image_io.hpp"
#include "anomorph/manifest.hpp"
#include "anomorph/nifti_io.hpp"
#include "anomorph/phantom.hpp"
#include "anomorph/pipeline.hpp"
#include "anomorph/volume_io.hpp"

namespace fs = std::filesystem;
using namespace anomorph;

namespace {

Volume load_any_volume(const std::string& path) {
    if (path.size() > 4 && path.compare(path.size() - 4, 4, ".nii") == 0)
        return load_nifti(path);
    return load_raw_volume(path);
}

std::string req_str(const Config& c, const std::string& key) {
    if (!c.has(key))
        throw validation_error("missing required config key '" + key + "'");
    return c.get_string(key, "");
}

std::set<std::string> with_extras(const std::set<std::string>& base,
                                  std::initializer_list<const char*> extras) {
    std::set<std::string> keys = base;
    for (const char* k : extras) keys.insert(k);
    return keys;
}

int cmd_phantom_gen(const Config& cfg, std::optional<uint64_t> seed_override) {
    cfg.expect_known({"out_dir", "healthy_count", "anomalous_count", "grid", "severity",
                      "variability", "target_region", "seed", "save_gt_fields"});
    const std::string out_dir = req_str(cfg, "out_dir");
    const int healthy_count = (int)cfg.get_int("healthy_count", 10);
    const int anomalous_count = (int)cfg.get_int("anomalous_count", 0);
    if (healthy_count < 0 || anomalous_count < 0)
        throw validation_error("phantom-gen: counts must be >= 0");
    if (healthy_count + anomalous_count == 0)
        throw validation_error("phantom-gen: nothing to generate");

    PhantomSpec base;
    base.grid = (int)cfg.get_int("grid", 32);
    base.variability = (float)cfg.get_float("variability", 1.0);
    base.target_region = cfg.get_string("target_region", "left_hippocampus");
    const float severity = (float)cfg.get_float("severity", 0.75);
    const bool save_gt = cfg.get_int("save_gt_fields", 1) != 0;
    const uint64_t seed =
        seed_override ? *seed_override : (uint64_t)cfg.get_int("seed", 0);

    fs::create_directories(out_dir);
    CohortManifest man;
    man.seed = seed;
    char id[32];
    auto emit = [&](const char* prefix, int i, uint64_t s, float sev, bool anom) {
        std::snprintf(id, sizeof(id), "%s_%03d", prefix, i);
        PhantomSpec ps = base;
        ps.seed = s;
        ps.severity = sev;
        Phantom p = generate_phantom(ps);
        save_volume(p.volume, (fs::path(out_dir) / id).string());
        save_region_mask(p.mask, (fs::path(out_dir) / (std::string(id) + "_mask")).string());
        if (anom && save_gt)
            save_deformation_field(
                p.gt_field, (fs::path(out_dir) / (std::string(id) + "_gt_field")).string());
        SubjectEntry e;
        e.id = id;
        e.volume_path = std::string(id) + ".f32raw";
        e.anomalous = anom;
        e.mask_path = std::string(id) + "_mask.f32raw";
        man.entries.push_back(std::move(e));
    };
    for (int i = 0; i < healthy_count; ++i)
        emit("healthy", i, seed + (uint64_t)i, 0.0f, false);
    for (int j = 0; j < anomalous_count; ++j)
        emit("anomalous", j, seed + (uint64_t)healthy_count + (uint64_t)j, severity, true);

    save_manifest(man, (fs::path(out_dir) / "manifest.json").string());
    std::cout << "wrote " << man.entries.size() << " subjects (" << healthy_count
              << " healthy, " << anomalous_count << " anomalous) to " << out_dir << "\n";
    return 0;
}

int cmd_train(const Config& cfg, std::optional<uint64_t> seed_override) {
    cfg.expect_known(with_extras(TrainConfig::known_keys(), {"out_checkpoint", "loss_log"}));
    TrainConfig tc = TrainConfig::from_config(cfg);
    if (seed_override) tc.seed = *seed_override;
    if (tc.data_source.empty())
        throw validation_error("train: data_source (manifest path) required");
    const std::string out_ckpt = req_str(cfg, "out_checkpoint");

    CohortManifest man = load_manifest(tc.data_source);
    std::vector<Volume> healthy;
    for (const auto& e : man.cohort(false)) healthy.push_back(load_any_volume(e.volume_path));
    if (healthy.empty())
        throw validation_error("train: manifest has no healthy subjects");

    LossLog log;
    ModelSet m = train_stage1(tc, healthy, &log);
    train_stage2(m, tc, healthy, &log);

    const long spe = ((long)healthy.size() + tc.batch_size - 1) / tc.batch_size;
    CheckpointMeta meta;
    meta.stage = 2;
    meta.adam_steps["discriminator"] = (long)tc.stage1_epochs * spe;
    meta.adam_steps["generator"] = (long)tc.stage1_epochs * spe;
    meta.adam_steps["deformers"] = (long)tc.stage2_epochs * spe;
    save_checkpoint(out_ckpt, m, meta);
    if (cfg.has("loss_log")) write_loss_log_csv(log, cfg.get_string("loss_log", ""));

    std::cout << "trained on " << healthy.size() << " healthy subjects ("
              << tc.stage1_epochs << "+" << tc.stage2_epochs
              << " epochs); checkpoint -> " << out_ckpt << "\n";
    return 0;
}

int cmd_infer(const Config& cfg) {
    cfg.expect_known({"checkpoint", "input", "mask", "out_dir", "seed"});
    ModelSet m = load_checkpoint(req_str(cfg, "checkpoint"));
    Volume x = load_any_volume(req_str(cfg, "input"));
    const std::string out_dir = req_str(cfg, "out_dir");
    std::optional<RegionMask> mask;
    if (cfg.has("mask")) mask = load_region_mask(cfg.get_string("mask", ""));

    InferenceResult r = infer(m, x);
    save_inference_result(r, out_dir, mask);
    const float score = mask ? patient_score(r, *mask) : patient_score(r);
    std::cout << "patient_score " << score << "; results -> " << out_dir << "\n";
    return 0;
}

int cmd_score(const Config& cfg) {
    cfg.expect_known({"checkpoint", "input", "mask", "out", "seed"});
    ModelSet m = load_checkpoint(req_str(cfg, "checkpoint"));
    Volume x = load_any_volume(req_str(cfg, "input"));
    InferenceResult r = infer(m, x);

    nlohmann::json j;
    if (cfg.has("mask")) {
        RegionMask mask = load_region_mask(cfg.get_string("mask", ""));
        j["patient_score"] = patient_score(r, mask);
        nlohmann::json rs;
        for (const auto& [name, v] : region_scores(r, mask)) rs[name] = v;
        j["region_scores"] = std::move(rs);
    } else {
        j["patient_score"] = patient_score(r);
    }
    const std::string text = j.dump(2);
    std::cout << text << "\n";
    if (cfg.has("out")) {
        std::ofstream f(cfg.get_string("out", ""), std::ios::trunc);
        if (!f) throw std::runtime_error("cannot write score output");
        f << text << "\n";
    }
    return 0;
}

int cmd_evaluate(const Config& cfg) {
    cfg.expect_known({"checkpoint", "manifest", "out_dir", "seed"});
    ModelSet m = load_checkpoint(req_str(cfg, "checkpoint"));
    CohortManifest man = load_manifest(req_str(cfg, "manifest"));
    const std::string out_dir = req_str(cfg, "out_dir");

    CohortReport rep = evaluate_cohort(m, man);
    fs::create_directories(out_dir);
    rep.write_json((fs::path(out_dir) / "report.json").string());
    rep.write_csv((fs::path(out_dir) / "report.csv").string());
    char line[160];
    std::snprintf(line, sizeof(line),
                  "AUROC anomaly=%.4f residual=%.4f folding=%.4f over %zu subjects",
                  rep.auroc_anomaly, rep.auroc_residual, rep.auroc_folding,
                  rep.subjects.size());
    std::cout << line << "; report -> " << out_dir << "\n";
    return 0;
}

int cmd_render_slice(const Config& cfg) {
    cfg.expect_known({"input", "axis", "index", "out", "overlay", "seed"});
    Volume v = load_any_volume(req_str(cfg, "input"));
    const int axis = (int)cfg.get_int("axis", 0);
    const int ext[3] = {v.depth(), v.height(), v.width()};
    const int index = (int)cfg.get_int(
        "index", (axis >= 0 && axis <= 2) ? ext[axis] / 2 : 0);
    const std::string out = req_str(cfg, "out");

    if (cfg.has("overlay")) {
        Volume o = load_any_volume(cfg.get_string("overlay", ""));
        render_slice_overlay(v, o, axis, index, out);
    } else {
        render_slice(v, axis, index, out);
    }
    std::cout << "slice -> " << out << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"anomorph: unsupervised volumetric anomaly analysis"};
    app.require_subcommand(1);

    std::string config_path;
    long seed_flag = 0;
    const char* names[] = {"phantom-gen", "train",    "infer",
                           "score",       "evaluate", "render-slice"};
    const char* descs[] = {"generate a synthetic phantom cohort plus manifest",
                           "run the two-stage training pipeline",
                           "run inference on one volume, writing all maps",
                           "print the patient score for one volume",
                           "score a manifest cohort and write report.json/csv",
                           "write one slice as PGM (PPM with overlay)"};
    for (int i = 0; i < 6; ++i) {
        CLI::App* sub = app.add_subcommand(names[i], descs[i]);
        sub->add_option("--config", config_path, "key=value config file")
            ->required()
            ->check(CLI::ExistingFile);
        sub->add_option("--seed", seed_flag, "override the config's seed");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << e.get_name() << ": " << e.what() << "\n";
        return 2;
    }

    try {
        CLI::App* sub = app.get_subcommands().front();
        Config cfg = Config::load(config_path);
        std::optional<uint64_t> seed;
        if (sub->count("--seed")) seed = (uint64_t)seed_flag;

        const std::string name = sub->get_name();
        if (name == "phantom-gen") return cmd_phantom_gen(cfg, seed);
        if (name == "train") return cmd_train(cfg, seed);
        if (name == "infer") return cmd_infer(cfg);
        if (name == "score") return cmd_score(cfg);
        if (name == "evaluate") return cmd_evaluate(cfg);
        if (name == "render-slice") return cmd_render_slice(cfg);
        throw validation_error("unknown subcommand " + name);
    } catch (const validation_error& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
