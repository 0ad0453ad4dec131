#pragma once

#include <optional>
#include <string>
#include <vector>

#include "anomorph/graph.hpp"
#include "anomorph/rng.hpp"

namespace anomorph {

struct ArchConfig {
    int levels = 4;           // encoder stride-2 stages (spatial / 2^levels)
    int base_channels = 16;   // doubled per level
    int latent_channels = 64;
    float slope = 0.2f;       // leaky-relu negative slope
    int disc_levels = 3;      // discriminator stride-2 stages (output / 8)
    int disc_base = 16;
    int deformer_hidden = 8;

    void validate() const;
};

// One convolution's parameters plus geometry. `transpose` selects the
// adjoint direction (kernel stored [Cin, Cout, k^3] in that case).
struct ConvLayer {
    Parameter kernel;
    Parameter bias;
    int stride = 1;
    int pad = 0;
    bool transpose = false;

    Tensor apply(const Tensor& x) const;
};

// Strided-conv encoder to a latent grid, mirrored transpose-conv decoder
// with a sigmoid head. The decoder's final pre-output feature map (base
// channel count, full resolution) is exposed for the deformer heads.
struct AutoencoderModel {
    ArchConfig cfg;
    std::vector<ConvLayer> enc;   // levels stride-2 convs, then latent conv
    ConvLayer to_latent;
    ConvLayer from_latent;
    std::vector<ConvLayer> dec;   // per level: exact-2x transpose (+ smoothing conv
                                  // below full resolution)
    ConvLayer out_conv;           // base -> 1, sigmoid

    void collect(const std::string& prefix, std::vector<Parameter*>& out);
};

struct DecodeResult {
    Tensor recon;     // [N,1,D,H,W], values in (0,1)
    Tensor features;  // [N,base,D,H,W], pre-output feature map
};

Tensor encode(const AutoencoderModel& ae, const Tensor& x);
DecodeResult decode(const AutoencoderModel& ae, const Tensor& latent);
DecodeResult reconstruct(const AutoencoderModel& ae, const Tensor& x);

// Stride-2 conv stack ending in a single-channel patch logit grid.
struct DiscriminatorModel {
    ArchConfig cfg;
    std::vector<ConvLayer> stages;
    ConvLayer head;

    void collect(const std::string& prefix, std::vector<Parameter*>& out);
};

Tensor discriminate(const DiscriminatorModel& d, const Tensor& v);

// Two conv layers over concat(features, x_recon, x) emitting a dense
// 3-channel displacement field. The final layer is zero-initialized, so a
// fresh head emits the identity (all-zero) field.
struct DeformerHead {
    float beta = 10.0f;
    ConvLayer hidden;
    ConvLayer out;

    void collect(const std::string& prefix, std::vector<Parameter*>& out);
};

// The raw head output is box-smoothed (window 3) for spatial coherence, then
// displacements taper linearly to zero over the outermost 3 voxels of each
// axis (zero on the faces themselves). Clamped border sampling has no
// coordinate gradient, so an unpinned field would drift freely there.
Tensor estimate_deformation(const DeformerHead& head, const Tensor& features,
                            const Tensor& x_recon, const Tensor& x, float slope);

// The full trainable bundle.
struct ModelSet {
    ArchConfig cfg;
    AutoencoderModel ae;
    DiscriminatorModel disc;
    DeformerHead deformer_constrained;
    DeformerHead deformer_unconstrained;

    std::vector<Parameter*> ae_params();
    std::vector<Parameter*> disc_params();
    std::vector<Parameter*> deformer_params(); // both heads
    std::vector<Parameter*> all_params();
};

// Seeded init: uniform +-sqrt(1/(C*k^3)) weights, zero biases, zero-filled
// deformer output layers.
ModelSet build_models(const ArchConfig& cfg, uint64_t seed,
                      float beta_constrained, float beta_unconstrained);

} // namespace anomorph
