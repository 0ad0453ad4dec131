#pragma once

#include <vector>

#include "anomorph/graph.hpp"

namespace anomorph {

// Differentiable operations. Every function validates shapes up front
// (throwing validation_error), computes the forward value eagerly, and
// registers the backward rule on the returned node.

// --- convolution ---

// x [N,Ci,D,H,W] (*) kernel [Co,Ci,k,k,k] + bias [Co], cross-correlation
// with zero padding. k must be odd and each padded extent at least k.
Tensor conv3d(const Tensor& x, const Tensor& kernel, const Tensor& bias,
              int stride, int padding);

// Adjoint of conv3d. kernel [Ci,Co,k,k,k], bias [Co]; output spatial size
// (S-1)*stride - 2*padding + k. Even k is permitted (used for exact 2x
// upsampling blocks).
Tensor conv3d_transpose(const Tensor& x, const Tensor& kernel, const Tensor& bias,
                        int stride, int padding);

// Concatenate along the channel axis of [N,C,D,H,W] tensors.
Tensor concat_channels(const std::vector<Tensor>& xs);

// --- pointwise ---

Tensor leaky_relu(const Tensor& x, float slope);
Tensor sigmoid(const Tensor& x);
Tensor add(const Tensor& x, const Tensor& y);
Tensor sub(const Tensor& x, const Tensor& y);
Tensor mul(const Tensor& x, const Tensor& y);
Tensor div(const Tensor& x, const Tensor& y);
Tensor absolute(const Tensor& x);          // subgradient 0 at 0
Tensor sqrt_elem(const Tensor& x);
Tensor maximum(const Tensor& x, float floor_value);
Tensor scale(const Tensor& x, float c);
Tensor add_scalar(const Tensor& x, float c);

// --- reductions ---

Tensor sum(const Tensor& x);     // -> shape [1]
Tensor mean(const Tensor& x);    // -> shape [1]

// Zero-padded box-filter mean over w^3 windows of the last three axes
// (window count is w^3 everywhere, including borders). w odd. The operator
// is self-adjoint, so backward applies the same filter to the gradient.
Tensor mean_over_window(const Tensor& x, int window);

// --- warping ---

// Pull-sampling trilinear warp: out(p) = src(p + u(p)), coordinates clamped
// to the border. src [N,C,D,H,W], field [N,3,D,H,W] in voxel units.
// Differentiable in both src and field.
Tensor warp(const Tensor& src, const Tensor& field);

} // namespace anomorph
