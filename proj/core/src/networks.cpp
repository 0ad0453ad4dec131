#include "anomorph/networks.hpp"

#include <algorithm>
#include <cmath>

#include "anomorph/errors.hpp"
#include "anomorph/ops.hpp"

namespace anomorph {

void ArchConfig::validate() const {
    if (levels < 1 || levels > 6) throw validation_error("ArchConfig: levels must be 1..6");
    if (base_channels < 1) throw validation_error("ArchConfig: base_channels must be >= 1");
    if (latent_channels < 1) throw validation_error("ArchConfig: latent_channels must be >= 1");
    if (!(slope > 0.0f && slope < 1.0f))
        throw validation_error("ArchConfig: slope must be in (0,1)");
    if (disc_levels < 1 || disc_levels > 6)
        throw validation_error("ArchConfig: disc_levels must be 1..6");
    if (disc_base < 1) throw validation_error("ArchConfig: disc_base must be >= 1");
    if (deformer_hidden < 1)
        throw validation_error("ArchConfig: deformer_hidden must be >= 1");
}

Tensor ConvLayer::apply(const Tensor& x) const {
    if (transpose) return conv3d_transpose(x, kernel.tensor(), bias.tensor(), stride, pad);
    return conv3d(x, kernel.tensor(), bias.tensor(), stride, pad);
}

namespace {

ConvLayer make_layer(const std::string& name, int cin, int cout, int k, int stride,
                     int pad, bool transpose, Rng& rng, bool zero_init = false) {
    ConvLayer l;
    l.stride = stride;
    l.pad = pad;
    l.transpose = transpose;
    const std::vector<int> kshape = transpose ? std::vector<int>{cin, cout, k, k, k}
                                              : std::vector<int>{cout, cin, k, k, k};
    NdArray kv(kshape);
    if (zero_init) {
        kv.fill(0.0f);
    } else {
        const float bound = std::sqrt(1.0f / ((float)cin * k * k * k));
        for (long i = 0; i < kv.size(); ++i) kv.data()[i] = rng.uniform(-bound, bound);
    }
    NdArray bv({cout});
    bv.fill(0.0f);
    l.kernel = Parameter(name + ".kernel", std::move(kv));
    l.bias = Parameter(name + ".bias", std::move(bv));
    return l;
}

void collect_layer(ConvLayer& l, std::vector<Parameter*>& out) {
    out.push_back(&l.kernel);
    out.push_back(&l.bias);
}

} // namespace

void AutoencoderModel::collect(const std::string&, std::vector<Parameter*>& out) {
    for (auto& l : enc) collect_layer(l, out);
    collect_layer(to_latent, out);
    collect_layer(from_latent, out);
    for (auto& l : dec) collect_layer(l, out);
    collect_layer(out_conv, out);
}

void DiscriminatorModel::collect(const std::string&, std::vector<Parameter*>& out) {
    for (auto& l : stages) collect_layer(l, out);
    collect_layer(head, out);
}

void DeformerHead::collect(const std::string&, std::vector<Parameter*>& out) {
    collect_layer(hidden, out);
    collect_layer(this->out, out);
}

Tensor encode(const AutoencoderModel& ae, const Tensor& x) {
    const auto& s = x.value().shape();
    if (x.value().rank() != 5 || s[1] != 1)
        throw validation_error("encode: input must be [N,1,D,H,W]");
    const int div = 1 << ae.cfg.levels;
    for (int a = 2; a < 5; ++a)
        if (s[(size_t)a] % div != 0)
            throw validation_error("encode: shape not divisible by " + std::to_string(div) +
                                   ": " + x.value().shape_str());
    Tensor h = x;
    for (const auto& l : ae.enc) h = leaky_relu(l.apply(h), ae.cfg.slope);
    return leaky_relu(ae.to_latent.apply(h), ae.cfg.slope);
}

DecodeResult decode(const AutoencoderModel& ae, const Tensor& latent) {
    Tensor h = leaky_relu(ae.from_latent.apply(latent), ae.cfg.slope);
    for (const auto& l : ae.dec) h = leaky_relu(l.apply(h), ae.cfg.slope);
    DecodeResult r;
    r.features = h;
    r.recon = sigmoid(ae.out_conv.apply(h));
    return r;
}

DecodeResult reconstruct(const AutoencoderModel& ae, const Tensor& x) {
    return decode(ae, encode(ae, x));
}

Tensor discriminate(const DiscriminatorModel& d, const Tensor& v) {
    if (v.value().rank() != 5 || v.value().dim(1) != 1)
        throw validation_error("discriminate: input must be [N,1,D,H,W]");
    Tensor h = v;
    for (const auto& l : d.stages) h = leaky_relu(l.apply(h), d.cfg.slope);
    return d.head.apply(h);
}

namespace {

// Per-voxel weight: 0 on each volume face, ramping to 1 over `margin` voxels.
NdArray boundary_taper(const std::vector<int>& shape, int margin) {
    NdArray t(shape);
    const int64_t n = shape[0], c = shape[1];
    const int64_t dd = shape[2], hh = shape[3], ww = shape[4];
    auto axis_w = [margin](int64_t i, int64_t extent) {
        float edge = static_cast<float>(std::min(i, extent - 1 - i));
        return std::min(1.0f, edge / static_cast<float>(margin));
    };
    float* p = t.data();
    for (int64_t b = 0; b < n * c; ++b)
        for (int64_t z = 0; z < dd; ++z)
            for (int64_t y = 0; y < hh; ++y) {
                float wzy = axis_w(z, dd) * axis_w(y, hh);
                for (int64_t x = 0; x < ww; ++x)
                    *p++ = wzy * axis_w(x, ww);
            }
    return t;
}

} // namespace

Tensor estimate_deformation(const DeformerHead& head, const Tensor& features,
                            const Tensor& x_recon, const Tensor& x, float slope) {
    Tensor in = concat_channels({features, x_recon, x});
    Tensor h = leaky_relu(head.hidden.apply(in), slope);
    Tensor raw = mean_over_window(head.out.apply(h), 3);
    return mul(raw, Tensor::constant(boundary_taper(raw.value().shape(), 3)));
}

std::vector<Parameter*> ModelSet::ae_params() {
    std::vector<Parameter*> out;
    ae.collect("ae", out);
    return out;
}

std::vector<Parameter*> ModelSet::disc_params() {
    std::vector<Parameter*> out;
    disc.collect("disc", out);
    return out;
}

std::vector<Parameter*> ModelSet::deformer_params() {
    std::vector<Parameter*> out;
    deformer_constrained.collect("deformer_constrained", out);
    deformer_unconstrained.collect("deformer_unconstrained", out);
    return out;
}

std::vector<Parameter*> ModelSet::all_params() {
    std::vector<Parameter*> out = ae_params();
    auto d = disc_params();
    out.insert(out.end(), d.begin(), d.end());
    auto f = deformer_params();
    out.insert(out.end(), f.begin(), f.end());
    return out;
}

ModelSet build_models(const ArchConfig& cfg, uint64_t seed, float beta_constrained,
                      float beta_unconstrained) {
    cfg.validate();
    ModelSet m;
    m.cfg = cfg;
    m.ae.cfg = cfg;
    m.disc.cfg = cfg;
    Rng rng = Rng(seed).fork(7);

    // Encoder: 1 -> base -> 2*base -> ... stride-2 each level, then a
    // stride-1 conv to the latent channel count.
    int cin = 1;
    for (int i = 0; i < cfg.levels; ++i) {
        const int cout = cfg.base_channels << i;
        m.ae.enc.push_back(
            make_layer("ae.enc" + std::to_string(i), cin, cout, 3, 2, 1, false, rng));
        cin = cout;
    }
    m.ae.to_latent = make_layer("ae.to_latent", cin, cfg.latent_channels, 3, 1, 1, false, rng);
    m.ae.from_latent =
        make_layer("ae.from_latent", cfg.latent_channels, cin, 3, 1, 1, false, rng);

    // Decoder: per level an exact-2x transpose conv (k=2, s=2, p=0); below
    // full resolution also a stride-1 smoothing conv. Channels halve down to
    // base and stay there.
    for (int i = cfg.levels - 1; i >= 0; --i) {
        const int cout = std::max(cfg.base_channels, cfg.base_channels << std::max(0, i - 1));
        const std::string nm = "ae.dec" + std::to_string(cfg.levels - 1 - i);
        m.ae.dec.push_back(make_layer(nm + ".up", cin, cout, 2, 2, 0, true, rng));
        if (i > 0)
            m.ae.dec.push_back(make_layer(nm + ".smooth", cout, cout, 3, 1, 1, false, rng));
        cin = cout;
    }
    m.ae.out_conv = make_layer("ae.out", cin, 1, 3, 1, 1, false, rng);

    // Discriminator.
    int dc = 1;
    for (int i = 0; i < cfg.disc_levels; ++i) {
        const int cout = cfg.disc_base << i;
        m.disc.stages.push_back(
            make_layer("disc.s" + std::to_string(i), dc, cout, 3, 2, 1, false, rng));
        dc = cout;
    }
    m.disc.head = make_layer("disc.head", dc, 1, 3, 1, 1, false, rng);

    // Deformer heads over concat(features, x_recon, x).
    const int def_in = cfg.base_channels + 2;
    auto make_head = [&](const std::string& nm, float beta) {
        DeformerHead h;
        h.beta = beta;
        h.hidden = make_layer(nm + ".hidden", def_in, cfg.deformer_hidden, 3, 1, 1, false, rng);
        h.out = make_layer(nm + ".out", cfg.deformer_hidden, 3, 3, 1, 1, false, rng,
                           /*zero_init=*/true);
        return h;
    };
    m.deformer_constrained = make_head("deformer_constrained", beta_constrained);
    m.deformer_unconstrained = make_head("deformer_unconstrained", beta_unconstrained);
    return m;
}

} // namespace anomorph
