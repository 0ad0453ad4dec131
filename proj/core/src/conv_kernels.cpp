#include "anomorph/conv_kernels.hpp"

#include <algorithm>
#include <cstring>
#include <vector>

namespace anomorph::kernels {

int conv_out_size(int s, int k, int stride, int pad) {
    return (s + 2 * pad - k) / stride + 1;
}

namespace {

// Clipped [lo, hi) range of `ow` such that ow*stride + base lies in [0, limit).
inline void ow_range(int base, int stride, int limit, int count, int& lo, int& hi) {
    if (stride == 1) {
        lo = std::max(0, -base);
        hi = std::min(count, limit - base);
    } else {
        lo = base < 0 ? (-base + stride - 1) / stride : 0;
        hi = std::min(count, base < limit ? (limit - 1 - base) / stride + 1 : 0);
    }
}

} // namespace

void conv_forward(const float* in, const float* kernel, const float* bias,
                  float* out, const Conv3dDims& dm) {
    const long in_sp = (long)dm.d * dm.h * dm.w;
    const long out_sp = (long)dm.od * dm.oh * dm.ow;
    const int k3 = dm.k * dm.k * dm.k;

#pragma omp parallel for collapse(2) schedule(static)
    for (int n = 0; n < dm.n; ++n)
        for (int f = 0; f < dm.co; ++f) {
            float* oslab = out + ((long)n * dm.co + f) * out_sp;
            const float* kbase = kernel + (long)f * dm.ci * k3;
            const double b = bias ? (double)bias[f] : 0.0;
            std::vector<double> drow((size_t)dm.ow);
            for (int od = 0; od < dm.od; ++od)
                for (int oh = 0; oh < dm.oh; ++oh) {
                    float* orow = oslab + ((long)od * dm.oh + oh) * dm.ow;
                    for (int ow = 0; ow < dm.ow; ++ow) drow[ow] = b;
                    for (int c = 0; c < dm.ci; ++c) {
                        const float* islab = in + ((long)n * dm.ci + c) * in_sp;
                        const float* kc = kbase + (long)c * k3;
                        for (int kd = 0; kd < dm.k; ++kd) {
                            const int id = od * dm.stride - dm.pad + kd;
                            if (id < 0 || id >= dm.d) continue;
                            for (int kh = 0; kh < dm.k; ++kh) {
                                const int ih = oh * dm.stride - dm.pad + kh;
                                if (ih < 0 || ih >= dm.h) continue;
                                const float* irow = islab + ((long)id * dm.h + ih) * dm.w;
                                const float* krow = kc + ((long)kd * dm.k + kh) * dm.k;
                                for (int kw = 0; kw < dm.k; ++kw) {
                                    const int base = kw - dm.pad;
                                    const double kv = krow[kw];
                                    int lo, hi;
                                    ow_range(base, dm.stride, dm.w, dm.ow, lo, hi);
                                    if (dm.stride == 1) {
                                        const float* ir = irow + base;
#pragma omp simd
                                        for (int ow = lo; ow < hi; ++ow)
                                            drow[ow] += ir[ow] * kv;
                                    } else {
#pragma omp simd
                                        for (int ow = lo; ow < hi; ++ow)
                                            drow[ow] += irow[ow * dm.stride + base] * kv;
                                    }
                                }
                            }
                        }
                    }
                    for (int ow = 0; ow < dm.ow; ++ow) orow[ow] = (float)drow[ow];
                }
        }
}

void conv_adjoint_data(const float* g, const float* kernel, float* x,
                       const Conv3dDims& dm) {
    const long in_sp = (long)dm.d * dm.h * dm.w;
    const long out_sp = (long)dm.od * dm.oh * dm.ow;
    const int k3 = dm.k * dm.k * dm.k;

#pragma omp parallel for collapse(2) schedule(static)
    for (int n = 0; n < dm.n; ++n)
        for (int c = 0; c < dm.ci; ++c) {
            float* xslab = x + ((long)n * dm.ci + c) * in_sp;
            std::vector<double> dslab((size_t)in_sp, 0.0);
            for (int f = 0; f < dm.co; ++f) {
                const float* gslab = g + ((long)n * dm.co + f) * out_sp;
                const float* kc = kernel + ((long)f * dm.ci + c) * k3;
                for (int od = 0; od < dm.od; ++od)
                    for (int kd = 0; kd < dm.k; ++kd) {
                        const int id = od * dm.stride - dm.pad + kd;
                        if (id < 0 || id >= dm.d) continue;
                        for (int oh = 0; oh < dm.oh; ++oh)
                            for (int kh = 0; kh < dm.k; ++kh) {
                                const int ih = oh * dm.stride - dm.pad + kh;
                                if (ih < 0 || ih >= dm.h) continue;
                                const float* grow = gslab + ((long)od * dm.oh + oh) * dm.ow;
                                double* xrow = dslab.data() + ((long)id * dm.h + ih) * dm.w;
                                const float* krow = kc + ((long)kd * dm.k + kh) * dm.k;
                                for (int kw = 0; kw < dm.k; ++kw) {
                                    const int base = kw - dm.pad;
                                    const double kv = krow[kw];
                                    int lo, hi;
                                    ow_range(base, dm.stride, dm.w, dm.ow, lo, hi);
                                    if (dm.stride == 1) {
                                        double* xr = xrow + base;
#pragma omp simd
                                        for (int ow = lo; ow < hi; ++ow)
                                            xr[ow] += grow[ow] * kv;
                                    } else {
                                        for (int ow = lo; ow < hi; ++ow)
                                            xrow[ow * dm.stride + base] += grow[ow] * kv;
                                    }
                                }
                            }
                    }
            }
            for (long i = 0; i < in_sp; ++i) xslab[i] = (float)dslab[i];
        }
}

void conv_grad_kernel(const float* g, const float* in, float* dkernel,
                      const Conv3dDims& dm) {
    const long in_sp = (long)dm.d * dm.h * dm.w;
    const long out_sp = (long)dm.od * dm.oh * dm.ow;
    const int k3 = dm.k * dm.k * dm.k;

#pragma omp parallel for collapse(2) schedule(static)
    for (int f = 0; f < dm.co; ++f)
        for (int c = 0; c < dm.ci; ++c) {
            float* dkc = dkernel + ((long)f * dm.ci + c) * k3;
            for (int kd = 0; kd < dm.k; ++kd)
                for (int kh = 0; kh < dm.k; ++kh)
                    for (int kw = 0; kw < dm.k; ++kw) {
                        const int base = kw - dm.pad;
                        double acc = 0.0;
                        for (int n = 0; n < dm.n; ++n) {
                            const float* gslab = g + ((long)n * dm.co + f) * out_sp;
                            const float* islab = in + ((long)n * dm.ci + c) * in_sp;
                            for (int od = 0; od < dm.od; ++od) {
                                const int id = od * dm.stride - dm.pad + kd;
                                if (id < 0 || id >= dm.d) continue;
                                for (int oh = 0; oh < dm.oh; ++oh) {
                                    const int ih = oh * dm.stride - dm.pad + kh;
                                    if (ih < 0 || ih >= dm.h) continue;
                                    const float* grow = gslab + ((long)od * dm.oh + oh) * dm.ow;
                                    const float* irow = islab + ((long)id * dm.h + ih) * dm.w;
                                    int lo, hi;
                                    ow_range(base, dm.stride, dm.w, dm.ow, lo, hi);
                                    if (dm.stride == 1) {
                                        const float* ir = irow + base;
#pragma omp simd reduction(+ : acc)
                                        for (int ow = lo; ow < hi; ++ow)
                                            acc += (double)grow[ow] * ir[ow];
                                    } else {
#pragma omp simd reduction(+ : acc)
                                        for (int ow = lo; ow < hi; ++ow)
                                            acc += (double)grow[ow] * irow[ow * dm.stride + base];
                                    }
                                }
                            }
                        }
                        dkc[((long)kd * dm.k + kh) * dm.k + kw] = (float)acc;
                    }
        }
}

void channel_sum(const float* g, float* dbias, int n, int c, long spatial) {
#pragma omp parallel for schedule(static)
    for (int f = 0; f < c; ++f) {
        double acc = 0.0;
        for (int b = 0; b < n; ++b) {
            const float* gslab = g + ((long)b * c + f) * spatial;
#pragma omp simd reduction(+ : acc)
            for (long i = 0; i < spatial; ++i) acc += (double)gslab[i];
        }
        dbias[f] = (float)acc;
    }
}

} // namespace anomorph::kernels
