#include "anomorph/pipeline.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <numeric>

#include "json.hpp"

#include "anomorph/adam.hpp"
#include "anomorph/errors.hpp"
#include "anomorph/ops.hpp"
#include "anomorph/rng.hpp"
#include "anomorph/volume_io.hpp"

namespace anomorph {

void TrainConfig::validate() const {
    if (stage1_epochs <= 0 || stage2_epochs <= 0)
        throw validation_error("TrainConfig: epochs must be > 0");
    if (!(lr_discriminator > 0.0f) || !(lr_other > 0.0f))
        throw validation_error("TrainConfig: learning rates must be > 0");
    if (!(beta_constrained > beta_unconstrained))
        throw validation_error("TrainConfig: beta_constrained must exceed beta_unconstrained");
    if (batch_size <= 0) throw validation_error("TrainConfig: batch_size must be > 0");
    loss_config(beta_constrained).validate();
    arch.validate();
}

LossConfig TrainConfig::loss_config(float beta) const {
    LossConfig lc;
    lc.beta = beta;
    lc.gamma = gamma;
    lc.lncc_window = lncc_window;
    lc.variance_floor = variance_floor;
    return lc;
}

const std::set<std::string>& TrainConfig::known_keys() {
    static const std::set<std::string> keys = {
        "stage1_epochs",  "stage2_epochs",      "lr_discriminator",
        "lr_other",       "beta_constrained",   "beta_unconstrained",
        "gamma",          "batch_size",         "seed",
        "data_source",    "lncc_window",        "variance_floor",
        "levels",         "base_channels",      "latent_channels",
        "slope",          "disc_levels",        "disc_base",
        "deformer_hidden"};
    return keys;
}

TrainConfig TrainConfig::from_config(const Config& c) {
    TrainConfig t;
    t.stage1_epochs = (int)c.get_int("stage1_epochs", t.stage1_epochs);
    t.stage2_epochs = (int)c.get_int("stage2_epochs", t.stage2_epochs);
    t.lr_discriminator = (float)c.get_float("lr_discriminator", t.lr_discriminator);
    t.lr_other = (float)c.get_float("lr_other", t.lr_other);
    t.beta_constrained = (float)c.get_float("beta_constrained", t.beta_constrained);
    t.beta_unconstrained = (float)c.get_float("beta_unconstrained", t.beta_unconstrained);
    t.gamma = (float)c.get_float("gamma", t.gamma);
    t.batch_size = (int)c.get_int("batch_size", t.batch_size);
    t.seed = (uint64_t)c.get_int("seed", (long)t.seed);
    t.data_source = c.get_string("data_source", t.data_source);
    t.lncc_window = (int)c.get_int("lncc_window", t.lncc_window);
    t.variance_floor = (float)c.get_float("variance_floor", t.variance_floor);
    t.arch.levels = (int)c.get_int("levels", t.arch.levels);
    t.arch.base_channels = (int)c.get_int("base_channels", t.arch.base_channels);
    t.arch.latent_channels = (int)c.get_int("latent_channels", t.arch.latent_channels);
    t.arch.slope = (float)c.get_float("slope", t.arch.slope);
    t.arch.disc_levels = (int)c.get_int("disc_levels", t.arch.disc_levels);
    t.arch.disc_base = (int)c.get_int("disc_base", t.arch.disc_base);
    t.arch.deformer_hidden = (int)c.get_int("deformer_hidden", t.arch.deformer_hidden);
    return t;
}

void write_loss_log_csv(const LossLog& log, const std::string& path) {
    std::ofstream f(path, std::ios::trunc);
    if (!f) throw std::runtime_error("cannot write loss log: " + path);
    f << "epoch,stage,loss_name,value\n";
    char buf[64];
    for (const auto& row : log) {
        std::snprintf(buf, sizeof(buf), "%.9g", row.value);
        f << row.epoch << "," << row.stage << "," << row.name << "," << buf << "\n";
    }
    if (!f) throw std::runtime_error("write failed: " + path);
}

namespace {

// Batch [B,1,D,H,W] from volume indices.
Tensor batch_tensor(const std::vector<Volume>& vols, const std::vector<int>& order,
                    size_t begin, size_t end) {
    const auto& s = vols[(size_t)order[begin]].data.shape();
    const long sp = (long)s[0] * s[1] * s[2];
    NdArray x({(int)(end - begin), 1, s[0], s[1], s[2]});
    for (size_t i = begin; i < end; ++i)
        std::memcpy(x.data() + (long)(i - begin) * sp,
                    vols[(size_t)order[i]].data.data(), sizeof(float) * (size_t)sp);
    return Tensor::constant(std::move(x));
}

// Batch [B,C,D,H,W] from cached per-volume [1,C,D,H,W] arrays.
Tensor batch_cached(const std::vector<NdArray>& cache, const std::vector<int>& order,
                    size_t begin, size_t end) {
    const auto& s = cache[(size_t)order[begin]].shape();
    const long per = cache[(size_t)order[begin]].size();
    NdArray x({(int)(end - begin), s[1], s[2], s[3], s[4]});
    for (size_t i = begin; i < end; ++i)
        std::memcpy(x.data() + (long)(i - begin) * per,
                    cache[(size_t)order[i]].data(), sizeof(float) * (size_t)per);
    return Tensor::constant(std::move(x));
}

void require_uniform_shapes(const std::vector<Volume>& vols, const char* op) {
    for (const auto& v : vols) {
        if (!v.data.same_shape(vols[0].data))
            throw validation_error(std::string(op) + ": training volumes must share one shape");
        if (v.depth() < 4 || v.height() < 4 || v.width() < 4)
            throw validation_error(std::string(op) + ": volume extents must be >= 4");
    }
}

struct EpochAccum {
    std::map<std::string, double> sums;
    long batches = 0;

    void add(const std::string& name, double v) { sums[name] += v; }
    void flush(int epoch, int stage, LossLog* log) {
        if (log)
            for (const auto& [name, sum] : sums)
                log->push_back({epoch, stage, name, sum / (double)batches});
        sums.clear();
        batches = 0;
    }
};

NdArray copy_array(const NdArray& a) {
    NdArray out(a.shape());
    std::memcpy(out.data(), a.data(), sizeof(float) * (size_t)a.size());
    return out;
}

NdArray reshaped(const NdArray& a, std::vector<int> shape) {
    NdArray out(std::move(shape));
    if (out.size() != a.size())
        throw std::logic_error("reshaped: element count mismatch");
    std::memcpy(out.data(), a.data(), sizeof(float) * (size_t)a.size());
    return out;
}

} // namespace

ModelSet train_stage1(const TrainConfig& cfg, const std::vector<Volume>& healthy,
                      LossLog* log) {
    cfg.validate();
    if (healthy.empty()) throw validation_error("train_stage1: empty training set");
    require_uniform_shapes(healthy, "train_stage1");

    ModelSet m = build_models(cfg.arch, cfg.seed, cfg.beta_constrained,
                              cfg.beta_unconstrained);
    Adam d_opt(m.disc_params(), {cfg.lr_discriminator});
    std::vector<Parameter*> gen_params = m.ae_params();
    {
        std::vector<Parameter*> dc;
        m.deformer_constrained.collect("", dc);
        gen_params.insert(gen_params.end(), dc.begin(), dc.end());
    }
    Adam g_opt(gen_params, {cfg.lr_other});

    Rng shuffle_rng = Rng(cfg.seed).fork(3);
    std::vector<int> order((size_t)healthy.size());
    std::iota(order.begin(), order.end(), 0);
    EpochAccum acc;

    for (int epoch = 1; epoch <= cfg.stage1_epochs; ++epoch) {
        shuffle_rng.shuffle(order);
        for (size_t begin = 0; begin < order.size(); begin += (size_t)cfg.batch_size) {
            const size_t end = std::min(order.size(), begin + (size_t)cfg.batch_size);
            Tensor x = batch_tensor(healthy, order, begin, end);
            DecodeResult r = reconstruct(m.ae, x);

            // Discriminator step against the detached reconstruction.
            Tensor fake_detached = Tensor::constant(copy_array(r.recon.value()));
            Tensor d_loss = discriminator_adv(discriminate(m.disc, x),
                                              discriminate(m.disc, fake_detached));
            d_opt.zero_grad();
            g_opt.zero_grad();
            backward(d_loss);
            d_opt.step();

            // Generator step: reconstruction + adversarial + morph terms.
            Tensor gen_adv = generator_adv(discriminate(m.disc, r.recon));
            Tensor mse = mse_loss(x, r.recon);
            Tensor field = estimate_deformation(m.deformer_constrained, r.features,
                                                r.recon, x, cfg.arch.slope);
            Tensor morph = warp(r.recon, field);
            Tensor sim = lncc(x, morph, cfg.lncc_window, cfg.variance_floor);
            Tensor penalty = deformation_penalty(field, cfg.beta_constrained);
            Tensor total = add(add(mse, scale(gen_adv, cfg.gamma)),
                               add(add_scalar(scale(sim, -1.0f), 1.0f), penalty));
            d_opt.zero_grad();
            g_opt.zero_grad();
            backward(total);
            g_opt.step();

            acc.add("discriminator_adv", d_loss.scalar());
            acc.add("mse", mse.scalar());
            acc.add("generator_adv", gen_adv.scalar());
            acc.add("lncc", sim.scalar());
            acc.add("deformation_penalty", penalty.scalar());
            acc.add("total", total.scalar());
            ++acc.batches;
        }
        acc.flush(epoch, 1, log);
    }
    return m;
}

void train_stage2(ModelSet& m, const TrainConfig& cfg, const std::vector<Volume>& healthy,
                  LossLog* log) {
    cfg.validate();
    if (healthy.empty()) throw validation_error("train_stage2: empty training set");
    require_uniform_shapes(healthy, "train_stage2");

    // Frozen pseudo-healthy reconstructions and feature maps, computed once.
    std::vector<NdArray> feats, recons;
    feats.reserve(healthy.size());
    recons.reserve(healthy.size());
    {
        NoGradGuard ng;
        std::vector<int> ident = {0};
        for (size_t i = 0; i < healthy.size(); ++i) {
            ident[0] = (int)i;
            Tensor x = batch_tensor(healthy, ident, 0, 1);
            DecodeResult r = reconstruct(m.ae, x);
            feats.push_back(copy_array(r.features.value()));
            recons.push_back(copy_array(r.recon.value()));
        }
    }

    // The deformers start stage 2 with fresh optimizer state.
    for (Parameter* p : m.deformer_params()) {
        p->adam_m.fill(0.0f);
        p->adam_v.fill(0.0f);
    }
    Adam opt(m.deformer_params(), {cfg.lr_other});

    Rng shuffle_rng = Rng(cfg.seed).fork(4);
    std::vector<int> order((size_t)healthy.size());
    std::iota(order.begin(), order.end(), 0);
    EpochAccum acc;

    for (int epoch = 1; epoch <= cfg.stage2_epochs; ++epoch) {
        shuffle_rng.shuffle(order);
        for (size_t begin = 0; begin < order.size(); begin += (size_t)cfg.batch_size) {
            const size_t end = std::min(order.size(), begin + (size_t)cfg.batch_size);
            Tensor x = batch_tensor(healthy, order, begin, end);
            Tensor f = batch_cached(feats, order, begin, end);
            Tensor rec = batch_cached(recons, order, begin, end);

            auto head_loss = [&](const DeformerHead& head, const char* tag) {
                Tensor field = estimate_deformation(head, f, rec, x, cfg.arch.slope);
                Tensor morph = warp(rec, field);
                Tensor sim = lncc(x, morph, cfg.lncc_window, cfg.variance_floor);
                Tensor penalty = deformation_penalty(field, head.beta);
                Tensor loss = add(add_scalar(scale(sim, -1.0f), 1.0f), penalty);
                acc.add(std::string("lncc_") + tag, sim.scalar());
                acc.add(std::string("deformation_penalty_") + tag, penalty.scalar());
                acc.add(std::string("morph_") + tag, loss.scalar());
                return loss;
            };
            Tensor loss_c = head_loss(m.deformer_constrained, "constrained");
            Tensor loss_u = head_loss(m.deformer_unconstrained, "unconstrained");
            Tensor total = add(loss_c, loss_u);
            opt.zero_grad();
            backward(total);
            opt.step();
            acc.add("total", total.scalar());
            ++acc.batches;
        }
        acc.flush(epoch, 2, log);
    }
}

InferenceResult infer(const ModelSet& m, const Volume& x) {
    NoGradGuard ng;
    const int d = x.depth(), h = x.height(), w = x.width();
    NdArray xb({1, 1, d, h, w});
    std::memcpy(xb.data(), x.data.data(), sizeof(float) * (size_t)x.data.size());
    Tensor xt = Tensor::constant(std::move(xb));

    DecodeResult r = reconstruct(m.ae, xt);
    Tensor fc = estimate_deformation(m.deformer_constrained, r.features, r.recon, xt,
                                     m.cfg.slope);
    Tensor fu = estimate_deformation(m.deformer_unconstrained, r.features, r.recon, xt,
                                     m.cfg.slope);

    InferenceResult out;
    out.input = x;
    out.x_recon = Volume(reshaped(r.recon.value(), {d, h, w}), x.spacing);
    out.field_constrained = DeformationField(reshaped(fc.value(), {3, d, h, w}));
    out.field_unconstrained = DeformationField(reshaped(fu.value(), {3, d, h, w}));
    out.x_morph = warp_volume(out.x_recon, out.field_constrained);

    out.residual = Volume(NdArray({d, h, w}), x.spacing);
    const float* xi = x.data.data();
    const float* mo = out.x_morph.data.data();
    float* res = out.residual.data.data();
    const long n = x.data.size();
#pragma omp simd
    for (long i = 0; i < n; ++i) res[i] = std::fabs(xi[i] - mo[i]);

    out.folding = folding_map(jacobian_determinant(out.field_unconstrained));
    out.anomaly = Volume(NdArray({d, h, w}), x.spacing);
    const float* fo = out.folding.data.data();
    float* an = out.anomaly.data.data();
#pragma omp simd
    for (long i = 0; i < n; ++i) an[i] = res[i] * fo[i];
    return out;
}

namespace {

float masked_mean(const Volume& v, const std::vector<uint8_t>& fg, const char* what) {
    double sum = 0.0;
    long count = 0;
    const float* a = v.data.data();
    for (long i = 0; i < v.data.size(); ++i)
        if (fg[(size_t)i]) {
            sum += a[i];
            ++count;
        }
    if (count == 0) throw validation_error(std::string(what) + ": empty foreground");
    return (float)(sum / (double)count);
}

} // namespace

float patient_score(const InferenceResult& r, const RegionMask& foreground) {
    foreground.validate();
    if (foreground.shape != r.anomaly.data.shape())
        throw validation_error("patient_score: mask shape mismatch");
    std::vector<uint8_t> fg((size_t)r.anomaly.data.size());
    for (long i = 0; i < r.anomaly.data.size(); ++i)
        fg[(size_t)i] = foreground.labels[(size_t)i] != 0;
    return masked_mean(r.anomaly, fg, "patient_score");
}

float patient_score(const InferenceResult& r, float intensity_threshold) {
    std::vector<uint8_t> fg((size_t)r.anomaly.data.size());
    const float* x = r.input.data.data();
    for (long i = 0; i < r.anomaly.data.size(); ++i)
        fg[(size_t)i] = x[i] > intensity_threshold;
    return masked_mean(r.anomaly, fg, "patient_score");
}

std::map<std::string, float> region_scores(const InferenceResult& r,
                                           const RegionMask& mask) {
    mask.validate();
    if (mask.shape != r.anomaly.data.shape())
        throw validation_error("region_scores: mask shape mismatch");
    std::map<int32_t, std::pair<double, long>> by_label;
    const float* a = r.anomaly.data.data();
    for (long i = 0; i < r.anomaly.data.size(); ++i) {
        const int32_t l = mask.labels[(size_t)i];
        if (l == 0) continue;
        auto& [sum, count] = by_label[l];
        sum += a[i];
        ++count;
    }
    std::map<std::string, float> out;
    for (const auto& [label, sc] : by_label)
        out[mask.legend.at(label)] = (float)(sc.first / (double)sc.second);
    return out;
}

void save_inference_result(const InferenceResult& r, const std::string& dir,
                           const std::optional<RegionMask>& mask) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    auto at = [&](const char* name) { return (fs::path(dir) / name).string(); };
    save_volume(r.input, at("input"));
    save_volume(r.x_recon, at("x_recon"));
    save_volume(r.x_morph, at("x_morph"));
    save_volume(r.residual, at("residual"));
    save_volume(r.folding, at("folding"));
    save_volume(r.anomaly, at("anomaly"));
    save_deformation_field(r.field_constrained, at("field_constrained"));
    save_deformation_field(r.field_unconstrained, at("field_unconstrained"));

    nlohmann::json scores;
    scores["patient_score"] = patient_score(r);
    if (mask) {
        nlohmann::json rs;
        for (const auto& [name, v] : region_scores(r, *mask)) rs[name] = v;
        scores["region_scores"] = std::move(rs);
    }
    std::ofstream f(at("scores.json"), std::ios::trunc);
    if (!f) throw std::runtime_error("cannot write scores.json in " + dir);
    f << scores.dump(2) << "\n";
}

} // namespace anomorph
