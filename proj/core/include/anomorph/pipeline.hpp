#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "anomorph/checkpoint.hpp"
#include "anomorph/config.hpp"
#include "anomorph/deformation.hpp"
#include "anomorph/losses.hpp"
#include "anomorph/networks.hpp"
#include "anomorph/volume.hpp"

namespace anomorph {

struct TrainConfig {
    int stage1_epochs = 200;
    int stage2_epochs = 100;
    float lr_discriminator = 1.0e-4f;
    float lr_other = 5.0e-4f;
    float beta_constrained = 10.0f;
    float beta_unconstrained = 0.01f;
    float gamma = 0.05f;
    int batch_size = 4;
    uint64_t seed = 0;
    std::string data_source; // manifest path (training uses its healthy cohort)
    int lncc_window = 9;
    float variance_floor = 1e-5f;
    ArchConfig arch;

    void validate() const;
    LossConfig loss_config(float beta) const;
    static TrainConfig from_config(const Config& c);
    static const std::set<std::string>& known_keys();
};

struct LossLogRow {
    int epoch;
    int stage;
    std::string name;
    double value;
};
using LossLog = std::vector<LossLogRow>;

// CSV with header `epoch,stage,loss_name,value`.
void write_loss_log_csv(const LossLog& log, const std::string& path);

// Stage 1: alternating discriminator step and autoencoder(+constrained
// deformer) step per batch. Returns the trained bundle; appends per-epoch
// mean losses to `log`.
ModelSet train_stage1(const TrainConfig& cfg, const std::vector<Volume>& healthy,
                      LossLog* log);

// Stage 2: autoencoder and discriminator stay bit-identical; both deformer
// heads train against the frozen reconstructions at their own beta. Deformer
// optimizer state restarts fresh.
void train_stage2(ModelSet& models, const TrainConfig& cfg,
                  const std::vector<Volume>& healthy, LossLog* log);

struct InferenceResult {
    Volume input;
    Volume x_recon;
    Volume x_morph;    // constrained-head morph of the reconstruction
    Volume residual;   // |x - x_morph|
    Volume folding;    // max(0, -det J) of the unconstrained field
    Volume anomaly;    // residual * folding
    DeformationField field_constrained;
    DeformationField field_unconstrained;
};

InferenceResult infer(const ModelSet& models, const Volume& x);

// Mean anomaly over a foreground: the mask's nonzero voxels, or input
// intensity above the threshold. Throws if the foreground is empty.
float patient_score(const InferenceResult& r, const RegionMask& foreground);
float patient_score(const InferenceResult& r, float intensity_threshold = 0.05f);

// Per-region mean anomaly for every labeled region present in the mask,
// keyed by legend name.
std::map<std::string, float> region_scores(const InferenceResult& r,
                                           const RegionMask& mask);

// Persists an InferenceResult as a directory of raw+JSON volumes, the two
// fields, and scores.json.
void save_inference_result(const InferenceResult& r, const std::string& dir,
                           const std::optional<RegionMask>& mask);

} // namespace anomorph
