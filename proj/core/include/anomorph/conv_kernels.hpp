#pragma once

namespace anomorph::kernels {

// Raw 3D cross-correlation primitives over NCDHW float buffers. All three
// write (not accumulate) their output and use a fixed accumulation order,
// so results are bit-identical across runs and thread counts.

struct Conv3dDims {
    int n, ci, d, h, w;   // input  [n, ci, d, h, w]
    int co, k;            // kernel [co, ci, k, k, k]
    int stride, pad;
    int od, oh, ow;       // output [n, co, od, oh, ow]
};

// Output spatial size of the forward direction, floor((s + 2p - k)/stride) + 1.
int conv_out_size(int s, int k, int stride, int pad);

// out[n,f,·] = bias[f] + sum_{c,kd,kh,kw} in[n,c,·s-p+k·] * kernel[f,c,·].
// bias may be null.
void conv_forward(const float* in, const float* kernel, const float* bias,
                  float* out, const Conv3dDims& dm);

// Adjoint of conv_forward in the data argument: scatters g (shaped like the
// forward output) back through the kernel into x (shaped like the forward
// input). Used for conv backward-to-input and as transpose-conv forward.
void conv_adjoint_data(const float* g, const float* kernel, float* x,
                       const Conv3dDims& dm);

// dkernel[f,c,kd,kh,kw] = sum_{n,od,oh,ow} g[n,f,·] * in[n,c,·s-p+k·].
void conv_grad_kernel(const float* g, const float* in, float* dkernel,
                      const Conv3dDims& dm);

// dbias[f] = sum over batch and spatial positions of g[n,f,·], for a
// buffer of shape [n, c, spatial].
void channel_sum(const float* g, float* dbias, int n, int c, long spatial);

} // namespace anomorph::kernels
