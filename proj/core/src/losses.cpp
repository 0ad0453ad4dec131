#include "anomorph/losses.hpp"

#include "anomorph/errors.hpp"
#include "anomorph/ops.hpp"

namespace anomorph {

void LossConfig::validate() const {
    if (beta < 0.0f) throw validation_error("LossConfig: beta must be >= 0");
    if (gamma < 0.0f) throw validation_error("LossConfig: gamma must be >= 0");
    if (lncc_window < 3 || lncc_window % 2 == 0)
        throw validation_error("LossConfig: lncc window must be odd and >= 3");
    if (variance_floor <= 0.0f)
        throw validation_error("LossConfig: variance floor must be > 0");
}

Tensor mse_loss(const Tensor& x, const Tensor& y) {
    Tensor d = sub(x, y);
    return mean(mul(d, d));
}

Tensor lncc(const Tensor& x, const Tensor& y, int window, float eps) {
    if (!x.value().same_shape(y.value()))
        throw validation_error("lncc: shape mismatch " + x.value().shape_str() + " vs " +
                               y.value().shape_str());
    Tensor mx = mean_over_window(x, window);
    Tensor my = mean_over_window(y, window);
    Tensor mxy = mean_over_window(mul(x, y), window);
    Tensor mxx = mean_over_window(mul(x, x), window);
    Tensor myy = mean_over_window(mul(y, y), window);
    Tensor cov = sub(mxy, mul(mx, my));
    Tensor vx = maximum(sub(mxx, mul(mx, mx)), eps);
    Tensor vy = maximum(sub(myy, mul(my, my)), eps);
    Tensor corr = div(cov, sqrt_elem(mul(vx, vy)));
    return mean(corr);
}

Tensor deformation_penalty(const Tensor& field, float beta) {
    const auto& s = field.value().shape();
    const int rank = field.value().rank();
    if (rank != 4 && rank != 5)
        throw validation_error("deformation_penalty: field must be [3,D,H,W] or [N,3,D,H,W]");
    const int comp_axis = rank - 4;
    if (s[(size_t)comp_axis] != 3)
        throw validation_error("deformation_penalty: field needs 3 components");
    // mean over voxels of |u|^2 = 3 * mean over all components.
    return scale(mean(mul(field, field)), 3.0f * beta);
}

Tensor morph_loss(const Tensor& x, const Tensor& x_morph, const Tensor& field,
                  const LossConfig& cfg) {
    cfg.validate();
    Tensor sim = lncc(x, x_morph, cfg.lncc_window, cfg.variance_floor);
    Tensor one_minus = add_scalar(scale(sim, -1.0f), 1.0f);
    return add(one_minus, deformation_penalty(field, cfg.beta));
}

Tensor generator_adv(const Tensor& logits_fake) {
    Tensor d = add_scalar(logits_fake, -1.0f);
    return mean(mul(d, d));
}

Tensor discriminator_adv(const Tensor& logits_real, const Tensor& logits_fake) {
    Tensor dr = add_scalar(logits_real, -1.0f);
    Tensor real_term = mean(mul(dr, dr));
    Tensor fake_term = mean(mul(logits_fake, logits_fake));
    return scale(add(real_term, fake_term), 0.5f);
}

Tensor recon_loss(const Tensor& x, const Tensor& x_recon, const Tensor& logits_fake,
                  const LossConfig& cfg) {
    cfg.validate();
    return add(mse_loss(x, x_recon), scale(generator_adv(logits_fake), cfg.gamma));
}

} // namespace anomorph
