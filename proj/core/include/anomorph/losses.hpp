#pragma once

#include "anomorph/graph.hpp"

namespace anomorph {

struct LossConfig {
    float beta = 10.0f;           // deformation magnitude weight
    float gamma = 0.05f;          // adversarial weight
    int lncc_window = 9;          // odd, >= 3
    float variance_floor = 1e-5f; // epsilon under the correlation denominator

    void validate() const;
};

// Mean of squared differences.
Tensor mse_loss(const Tensor& x, const Tensor& y);

// Windowed Pearson correlation (box-filtered means over zero-padded
// window^3 neighborhoods, variances floored at eps), averaged over all
// voxels. Result in [-1, 1] up to the floor effect. The training term is
// (1 - lncc).
Tensor lncc(const Tensor& x, const Tensor& y, int window, float eps);

// beta * mean over voxels of the squared displacement magnitude |u(p)|^2.
// field is [N,3,D,H,W] (or [3,D,H,W]).
Tensor deformation_penalty(const Tensor& field, float beta);

// (1 - lncc(x, x_morph)) + deformation_penalty(field, beta).
Tensor morph_loss(const Tensor& x, const Tensor& x_morph, const Tensor& field,
                  const LossConfig& cfg);

// Least-squares adversarial pair.
Tensor generator_adv(const Tensor& logits_fake);
Tensor discriminator_adv(const Tensor& logits_real, const Tensor& logits_fake);

// mse_loss(x, x_recon) + gamma * generator_adv(logits_fake).
Tensor recon_loss(const Tensor& x, const Tensor& x_recon, const Tensor& logits_fake,
                  const LossConfig& cfg);

} // namespace anomorph
