#include "anomorph/ops.hpp"

#include <cmath>
#include <cstring>

#include "anomorph/conv_kernels.hpp"
#include "anomorph/errors.hpp"
#include "anomorph/trilinear.hpp"

namespace anomorph {

namespace {

using kernels::Conv3dDims;

void require(bool ok, const std::string& msg) {
    if (!ok) throw validation_error(msg);
}

void require_same_shape(const Tensor& x, const Tensor& y, const char* op) {
    require(x.value().same_shape(y.value()),
            std::string(op) + ": shape mismatch " + x.value().shape_str() + " vs " +
                y.value().shape_str());
}

// Elementwise op scaffolding: forward maps x value-wise; backward multiplies
// the incoming gradient by dfwd evaluated per element.
template <typename Fwd>
NdArray map_array(const NdArray& x, Fwd f) {
    NdArray out(x.shape());
    const float* in = x.data();
    float* o = out.data();
    const long n = x.size();
#pragma omp simd
    for (long i = 0; i < n; ++i) o[i] = f(in[i]);
    return out;
}

} // namespace

// --- convolution ---

Tensor conv3d(const Tensor& x, const Tensor& kernel, const Tensor& bias,
              int stride, int padding) {
    const auto& xs = x.value().shape();
    const auto& ks = kernel.value().shape();
    require(x.value().rank() == 5, "conv3d: input must be [N,C,D,H,W]");
    require(kernel.value().rank() == 5, "conv3d: kernel must be [F,C,k,k,k]");
    require(bias.value().rank() == 1 && bias.value().dim(0) == ks[0],
            "conv3d: bias must be [F]");
    require(ks[2] == ks[3] && ks[3] == ks[4], "conv3d: kernel must be cubic");
    const int k = ks[2];
    require(k % 2 == 1, "conv3d: kernel size must be odd");
    require(stride >= 1 && padding >= 0, "conv3d: bad stride/padding");
    require(xs[1] == ks[1], "conv3d: channel mismatch: input " + std::to_string(xs[1]) +
                                " vs kernel " + std::to_string(ks[1]));
    for (int a = 2; a < 5; ++a)
        require(xs[a] + 2 * padding >= k, "conv3d: spatial extent too small for kernel");

    Conv3dDims dm{};
    dm.n = xs[0]; dm.ci = xs[1]; dm.d = xs[2]; dm.h = xs[3]; dm.w = xs[4];
    dm.co = ks[0]; dm.k = k; dm.stride = stride; dm.pad = padding;
    dm.od = kernels::conv_out_size(dm.d, k, stride, padding);
    dm.oh = kernels::conv_out_size(dm.h, k, stride, padding);
    dm.ow = kernels::conv_out_size(dm.w, k, stride, padding);
    require(dm.od >= 1 && dm.oh >= 1 && dm.ow >= 1, "conv3d: non-positive output size");

    NdArray out({dm.n, dm.co, dm.od, dm.oh, dm.ow});
    kernels::conv_forward(x.value().data(), kernel.value().data(),
                          bias.value().data(), out.data(), dm);

    return make_op(std::move(out), {x, kernel, bias}, [dm](Node& self) {
        Node* xn = self.parents[0].get();
        Node* kn = self.parents[1].get();
        Node* bn = self.parents[2].get();
        if (xn->requires_grad) {
            NdArray dx(xn->value.shape());
            kernels::conv_adjoint_data(self.grad.data(), kn->value.data(), dx.data(), dm);
            xn->grad.add_inplace(dx);
        }
        if (kn->requires_grad) {
            NdArray dk(kn->value.shape());
            kernels::conv_grad_kernel(self.grad.data(), xn->value.data(), dk.data(), dm);
            kn->grad.add_inplace(dk);
        }
        if (bn->requires_grad) {
            NdArray db(bn->value.shape());
            kernels::channel_sum(self.grad.data(), db.data(), dm.n, dm.co,
                                 (long)dm.od * dm.oh * dm.ow);
            bn->grad.add_inplace(db);
        }
    });
}

Tensor conv3d_transpose(const Tensor& x, const Tensor& kernel, const Tensor& bias,
                        int stride, int padding) {
    const auto& xs = x.value().shape();
    const auto& ks = kernel.value().shape();
    require(x.value().rank() == 5, "conv3d_transpose: input must be [N,C,D,H,W]");
    require(kernel.value().rank() == 5, "conv3d_transpose: kernel must be [C,F,k,k,k]");
    require(ks[2] == ks[3] && ks[3] == ks[4], "conv3d_transpose: kernel must be cubic");
    const int k = ks[2];
    require(k >= 1 && stride >= 1 && padding >= 0, "conv3d_transpose: bad geometry");
    require(xs[1] == ks[0], "conv3d_transpose: channel mismatch: input " +
                                std::to_string(xs[1]) + " vs kernel " + std::to_string(ks[0]));
    require(bias.value().rank() == 1 && bias.value().dim(0) == ks[1],
            "conv3d_transpose: bias must be [F]");

    // Dimension struct of the *virtual forward conv* this op is adjoint to:
    // its input is this op's output, its output is this op's input.
    Conv3dDims dm{};
    dm.n = xs[0];
    dm.co = ks[0];                       // = this op's input channels
    dm.ci = ks[1];                       // = this op's output channels
    dm.k = k; dm.stride = stride; dm.pad = padding;
    dm.od = xs[2]; dm.oh = xs[3]; dm.ow = xs[4];
    dm.d = (xs[2] - 1) * stride - 2 * padding + k;
    dm.h = (xs[3] - 1) * stride - 2 * padding + k;
    dm.w = (xs[4] - 1) * stride - 2 * padding + k;
    require(dm.d >= 1 && dm.h >= 1 && dm.w >= 1,
            "conv3d_transpose: non-positive output size");
    require(kernels::conv_out_size(dm.d, k, stride, padding) == dm.od &&
                kernels::conv_out_size(dm.h, k, stride, padding) == dm.oh &&
                kernels::conv_out_size(dm.w, k, stride, padding) == dm.ow,
            "conv3d_transpose: geometry not adjoint-consistent");

    NdArray out({dm.n, dm.ci, dm.d, dm.h, dm.w});
    kernels::conv_adjoint_data(x.value().data(), kernel.value().data(), out.data(), dm);
    const float* bv = bias.value().data();
    const long sp = (long)dm.d * dm.h * dm.w;
    for (int n = 0; n < dm.n; ++n)
        for (int f = 0; f < dm.ci; ++f) {
            float* slab = out.data() + ((long)n * dm.ci + f) * sp;
            const float b = bv[f];
#pragma omp simd
            for (long i = 0; i < sp; ++i) slab[i] += b;
        }

    return make_op(std::move(out), {x, kernel, bias}, [dm](Node& self) {
        Node* xn = self.parents[0].get();
        Node* kn = self.parents[1].get();
        Node* bn = self.parents[2].get();
        if (xn->requires_grad) {
            NdArray dx(xn->value.shape());
            kernels::conv_forward(self.grad.data(), kn->value.data(), nullptr,
                                  dx.data(), dm);
            xn->grad.add_inplace(dx);
        }
        if (kn->requires_grad) {
            NdArray dk(kn->value.shape());
            kernels::conv_grad_kernel(xn->value.data(), self.grad.data(), dk.data(), dm);
            kn->grad.add_inplace(dk);
        }
        if (bn->requires_grad) {
            NdArray db(bn->value.shape());
            kernels::channel_sum(self.grad.data(), db.data(), dm.n, dm.ci,
                                 (long)dm.d * dm.h * dm.w);
            bn->grad.add_inplace(db);
        }
    });
}

Tensor concat_channels(const std::vector<Tensor>& xs) {
    require(!xs.empty(), "concat_channels: empty input list");
    const auto& s0 = xs[0].value().shape();
    require(xs[0].value().rank() == 5, "concat_channels: inputs must be [N,C,D,H,W]");
    int total_c = 0;
    for (const auto& t : xs) {
        const auto& s = t.value().shape();
        require(t.value().rank() == 5 && s[0] == s0[0] && s[2] == s0[2] &&
                    s[3] == s0[3] && s[4] == s0[4],
                "concat_channels: incompatible shapes");
        total_c += s[1];
    }
    const int n = s0[0];
    const long sp = (long)s0[2] * s0[3] * s0[4];
    NdArray out({n, total_c, s0[2], s0[3], s0[4]});
    std::vector<int> chans;
    for (const auto& t : xs) chans.push_back(t.value().shape()[1]);
    for (int b = 0; b < n; ++b) {
        long coff = 0;
        for (size_t i = 0; i < xs.size(); ++i) {
            const float* src = xs[i].value().data() + (long)b * chans[i] * sp;
            float* dst = out.data() + ((long)b * total_c + coff) * sp;
            std::memcpy(dst, src, sizeof(float) * (size_t)(chans[i] * sp));
            coff += chans[i];
        }
    }
    return make_op(std::move(out), xs, [n, sp, chans, total_c](Node& self) {
        for (int b = 0; b < n; ++b) {
            long coff = 0;
            for (size_t i = 0; i < chans.size(); ++i) {
                Node* p = self.parents[i].get();
                if (p->requires_grad) {
                    const float* g = self.grad.data() + ((long)b * total_c + coff) * sp;
                    float* dst = p->grad.data() + (long)b * chans[i] * sp;
                    const long cnt = (long)chans[i] * sp;
#pragma omp simd
                    for (long j = 0; j < cnt; ++j) dst[j] += g[j];
                }
                coff += chans[i];
            }
        }
    });
}

// --- pointwise ---

Tensor leaky_relu(const Tensor& x, float slope) {
    NdArray out = map_array(x.value(), [slope](float v) { return v >= 0 ? v : slope * v; });
    return make_op(std::move(out), {x}, [slope](Node& self) {
        Node* xn = self.parents[0].get();
        if (!xn->requires_grad) return;
        const float* xv = xn->value.data();
        const float* g = self.grad.data();
        float* dx = xn->grad.data();
        const long n = self.value.size();
#pragma omp simd
        for (long i = 0; i < n; ++i) dx[i] += g[i] * (xv[i] >= 0 ? 1.0f : slope);
    });
}

Tensor sigmoid(const Tensor& x) {
    NdArray out = map_array(x.value(), [](float v) { return 1.0f / (1.0f + std::exp(-v)); });
    return make_op(std::move(out), {x}, [](Node& self) {
        Node* xn = self.parents[0].get();
        if (!xn->requires_grad) return;
        const float* y = self.value.data();
        const float* g = self.grad.data();
        float* dx = xn->grad.data();
        const long n = self.value.size();
#pragma omp simd
        for (long i = 0; i < n; ++i) dx[i] += g[i] * y[i] * (1.0f - y[i]);
    });
}

namespace {

template <typename FwdOp, typename Bwd>
Tensor binary_op(const Tensor& x, const Tensor& y, const char* name, FwdOp f, Bwd bwd) {
    require_same_shape(x, y, name);
    NdArray out(x.value().shape());
    const float* a = x.value().data();
    const float* b = y.value().data();
    float* o = out.data();
    const long n = out.size();
#pragma omp simd
    for (long i = 0; i < n; ++i) o[i] = f(a[i], b[i]);
    return make_op(std::move(out), {x, y}, bwd);
}

} // namespace

Tensor add(const Tensor& x, const Tensor& y) {
    return binary_op(x, y, "add", [](float a, float b) { return a + b; }, [](Node& self) {
        const float* g = self.grad.data();
        const long n = self.value.size();
        for (int p = 0; p < 2; ++p) {
            Node* pn = self.parents[p].get();
            if (!pn->requires_grad) continue;
            float* d = pn->grad.data();
#pragma omp simd
            for (long i = 0; i < n; ++i) d[i] += g[i];
        }
    });
}

Tensor sub(const Tensor& x, const Tensor& y) {
    return binary_op(x, y, "sub", [](float a, float b) { return a - b; }, [](Node& self) {
        const float* g = self.grad.data();
        const long n = self.value.size();
        Node* xn = self.parents[0].get();
        Node* yn = self.parents[1].get();
        if (xn->requires_grad) {
            float* d = xn->grad.data();
#pragma omp simd
            for (long i = 0; i < n; ++i) d[i] += g[i];
        }
        if (yn->requires_grad) {
            float* d = yn->grad.data();
#pragma omp simd
            for (long i = 0; i < n; ++i) d[i] -= g[i];
        }
    });
}

Tensor mul(const Tensor& x, const Tensor& y) {
    return binary_op(x, y, "mul", [](float a, float b) { return a * b; }, [](Node& self) {
        const float* g = self.grad.data();
        const long n = self.value.size();
        Node* xn = self.parents[0].get();
        Node* yn = self.parents[1].get();
        if (xn->requires_grad) {
            const float* yv = yn->value.data();
            float* d = xn->grad.data();
#pragma omp simd
            for (long i = 0; i < n; ++i) d[i] += g[i] * yv[i];
        }
        if (yn->requires_grad) {
            const float* xv = xn->value.data();
            float* d = yn->grad.data();
#pragma omp simd
            for (long i = 0; i < n; ++i) d[i] += g[i] * xv[i];
        }
    });
}

Tensor div(const Tensor& x, const Tensor& y) {
    return binary_op(x, y, "div", [](float a, float b) { return a / b; }, [](Node& self) {
        const float* g = self.grad.data();
        const float* out = self.value.data();
        const long n = self.value.size();
        Node* xn = self.parents[0].get();
        Node* yn = self.parents[1].get();
        const float* yv = yn->value.data();
        if (xn->requires_grad) {
            float* d = xn->grad.data();
#pragma omp simd
            for (long i = 0; i < n; ++i) d[i] += g[i] / yv[i];
        }
        if (yn->requires_grad) {
            float* d = yn->grad.data();
#pragma omp simd
            for (long i = 0; i < n; ++i) d[i] -= g[i] * out[i] / yv[i];
        }
    });
}

Tensor absolute(const Tensor& x) {
    NdArray out = map_array(x.value(), [](float v) { return std::fabs(v); });
    return make_op(std::move(out), {x}, [](Node& self) {
        Node* xn = self.parents[0].get();
        if (!xn->requires_grad) return;
        const float* xv = xn->value.data();
        const float* g = self.grad.data();
        float* dx = xn->grad.data();
        const long n = self.value.size();
#pragma omp simd
        for (long i = 0; i < n; ++i)
            dx[i] += g[i] * (xv[i] > 0 ? 1.0f : (xv[i] < 0 ? -1.0f : 0.0f));
    });
}

Tensor sqrt_elem(const Tensor& x) {
    NdArray out = map_array(x.value(), [](float v) { return std::sqrt(v); });
    return make_op(std::move(out), {x}, [](Node& self) {
        Node* xn = self.parents[0].get();
        if (!xn->requires_grad) return;
        const float* y = self.value.data();
        const float* g = self.grad.data();
        float* dx = xn->grad.data();
        const long n = self.value.size();
#pragma omp simd
        for (long i = 0; i < n; ++i) dx[i] += g[i] * 0.5f / y[i];
    });
}

Tensor maximum(const Tensor& x, float floor_value) {
    NdArray out = map_array(x.value(), [floor_value](float v) { return v > floor_value ? v : floor_value; });
    return make_op(std::move(out), {x}, [floor_value](Node& self) {
        Node* xn = self.parents[0].get();
        if (!xn->requires_grad) return;
        const float* xv = xn->value.data();
        const float* g = self.grad.data();
        float* dx = xn->grad.data();
        const long n = self.value.size();
#pragma omp simd
        for (long i = 0; i < n; ++i) dx[i] += xv[i] >= floor_value ? g[i] : 0.0f;
    });
}

Tensor scale(const Tensor& x, float c) {
    NdArray out = map_array(x.value(), [c](float v) { return c * v; });
    return make_op(std::move(out), {x}, [c](Node& self) {
        Node* xn = self.parents[0].get();
        if (!xn->requires_grad) return;
        const float* g = self.grad.data();
        float* dx = xn->grad.data();
        const long n = self.value.size();
#pragma omp simd
        for (long i = 0; i < n; ++i) dx[i] += c * g[i];
    });
}

Tensor add_scalar(const Tensor& x, float c) {
    NdArray out = map_array(x.value(), [c](float v) { return v + c; });
    return make_op(std::move(out), {x}, [](Node& self) {
        Node* xn = self.parents[0].get();
        if (!xn->requires_grad) return;
        const float* g = self.grad.data();
        float* dx = xn->grad.data();
        const long n = self.value.size();
#pragma omp simd
        for (long i = 0; i < n; ++i) dx[i] += g[i];
    });
}

// --- reductions ---

Tensor sum(const Tensor& x) {
    require(x.value().size() > 0, "sum: empty input");
    double acc = 0.0;
    const float* v = x.value().data();
    const long n = x.value().size();
    for (long i = 0; i < n; ++i) acc += v[i];
    NdArray out({1});
    out.data()[0] = (float)acc;
    return make_op(std::move(out), {x}, [](Node& self) {
        Node* xn = self.parents[0].get();
        if (!xn->requires_grad) return;
        const float g = self.grad.data()[0];
        float* dx = xn->grad.data();
        const long n = xn->value.size();
#pragma omp simd
        for (long i = 0; i < n; ++i) dx[i] += g;
    });
}

Tensor mean(const Tensor& x) {
    require(x.value().size() > 0, "mean: empty input");
    double acc = 0.0;
    const float* v = x.value().data();
    const long n = x.value().size();
    for (long i = 0; i < n; ++i) acc += v[i];
    NdArray out({1});
    out.data()[0] = (float)(acc / (double)n);
    return make_op(std::move(out), {x}, [](Node& self) {
        Node* xn = self.parents[0].get();
        if (!xn->requires_grad) return;
        const long n = xn->value.size();
        const float g = self.grad.data()[0] / (float)n;
        float* dx = xn->grad.data();
#pragma omp simd
        for (long i = 0; i < n; ++i) dx[i] += g;
    });
}

namespace {

// Sliding-window line sum with zero padding, radius r, double accumulator.
void box_line(const float* src, float* dst, int n, long stride, int r) {
    double s = 0.0;
    for (int j = 0; j <= r && j < n; ++j) s += src[(long)j * stride];
    dst[0] = (float)s;
    for (int i = 1; i < n; ++i) {
        if (i + r < n) s += src[(long)(i + r) * stride];
        if (i - r - 1 >= 0) s -= src[(long)(i - r - 1) * stride];
        dst[(long)i * stride] = (float)s;
    }
}

// Box *sum* over w^3 neighborhoods of the last three axes (zero padded),
// then scaled by 1/w^3. Leading axes are batch.
NdArray box_filter(const NdArray& x, int win) {
    const int rank = x.rank();
    const int d = x.dim(rank - 3), h = x.dim(rank - 2), w = x.dim(rank - 1);
    long batch = 1;
    for (int a = 0; a < rank - 3; ++a) batch *= x.dim(a);
    const int r = (win - 1) / 2;
    const long sp = (long)d * h * w;

    NdArray a(x.shape());
    NdArray b(x.shape());
    const float* src = x.data();

    // pass along W
#pragma omp parallel for schedule(static)
    for (long line = 0; line < batch * d * h; ++line)
        box_line(src + line * w, a.data() + line * w, w, 1, r);
    // pass along H
#pragma omp parallel for collapse(2) schedule(static)
    for (long bd = 0; bd < batch * d; ++bd)
        for (int iw = 0; iw < w; ++iw)
            box_line(a.data() + bd * (long)h * w + iw, b.data() + bd * (long)h * w + iw,
                     h, w, r);
    // pass along D
#pragma omp parallel for collapse(2) schedule(static)
    for (long bb = 0; bb < batch; ++bb)
        for (long ihw = 0; ihw < (long)h * w; ++ihw)
            box_line(b.data() + bb * sp + ihw, a.data() + bb * sp + ihw, d, (long)h * w, r);

    const float norm = (float)(1.0 / ((double)win * win * win));
    float* out = a.data();
    const long n = a.size();
#pragma omp simd
    for (long i = 0; i < n; ++i) out[i] *= norm;
    return a;
}

} // namespace

Tensor mean_over_window(const Tensor& x, int window) {
    require(x.value().rank() >= 3, "mean_over_window: need at least 3 spatial axes");
    require(window >= 1 && window % 2 == 1, "mean_over_window: window must be odd");
    NdArray out = box_filter(x.value(), window);
    return make_op(std::move(out), {x}, [window](Node& self) {
        Node* xn = self.parents[0].get();
        if (!xn->requires_grad) return;
        NdArray g = box_filter(self.grad, window);
        xn->grad.add_inplace(g);
    });
}

// --- warping ---

Tensor warp(const Tensor& src, const Tensor& field) {
    const auto& ss = src.value().shape();
    const auto& fs = field.value().shape();
    require(src.value().rank() == 5, "warp: src must be [N,C,D,H,W]");
    require(field.value().rank() == 5 && fs[1] == 3, "warp: field must be [N,3,D,H,W]");
    require(ss[0] == fs[0] && ss[2] == fs[2] && ss[3] == fs[3] && ss[4] == fs[4],
            "warp: shape mismatch " + src.value().shape_str() + " vs " +
                field.value().shape_str());
    require(ss[2] >= 2 && ss[3] >= 2 && ss[4] >= 2, "warp: spatial extents must be >= 2");

    const int n = ss[0], c = ss[1], d = ss[2], h = ss[3], w = ss[4];
    const long sp = (long)d * h * w;
    NdArray out(ss);

#pragma omp parallel for schedule(static)
    for (int b = 0; b < n; ++b) {
        const float* f = field.value().data() + (long)b * 3 * sp;
        for (int z = 0; z < d; ++z)
            for (int y = 0; y < h; ++y)
                for (int x = 0; x < w; ++x) {
                    const long idx = ((long)z * h + y) * w + x;
                    const tri::Axis az = tri::setup((float)z + f[idx], d);
                    const tri::Axis ay = tri::setup((float)y + f[sp + idx], h);
                    const tri::Axis ax = tri::setup((float)x + f[2 * sp + idx], w);
                    for (int ch = 0; ch < c; ++ch) {
                        const float* s = src.value().data() + ((long)b * c + ch) * sp;
                        out.data()[((long)b * c + ch) * sp + idx] = tri::sample(s, h, w, az, ay, ax);
                    }
                }
    }

    return make_op(std::move(out), {src, field}, [n, c, d, h, w, sp](Node& self) {
        Node* sn = self.parents[0].get();
        Node* fn = self.parents[1].get();
        const bool need_src = sn->requires_grad;
        const bool need_field = fn->requires_grad;
        if (!need_src && !need_field) return;

#pragma omp parallel for schedule(static)
        for (int b = 0; b < n; ++b) {
            const float* f = fn->value.data() + (long)b * 3 * sp;
            for (int z = 0; z < d; ++z)
                for (int y = 0; y < h; ++y)
                    for (int x = 0; x < w; ++x) {
                        const long idx = ((long)z * h + y) * w + x;
                        const tri::Axis az = tri::setup((float)z + f[idx], d);
                        const tri::Axis ay = tri::setup((float)y + f[sp + idx], h);
                        const tri::Axis ax = tri::setup((float)x + f[2 * sp + idx], w);
                        const long base = ((long)az.i0 * h + ay.i0) * w + ax.i0;
                        const long dx = ax.i1 - ax.i0;
                        const long dy = (long)(ay.i1 - ay.i0) * w;
                        const long dz = (long)(az.i1 - az.i0) * h * w;
                        const float fx = ax.f, fy = ay.f, fz = az.f;
                        const float wx0 = 1.0f - fx, wy0 = 1.0f - fy, wz0 = 1.0f - fz;
                        float gu0 = 0.0f, gu1 = 0.0f, gu2 = 0.0f;
                        for (int ch = 0; ch < c; ++ch) {
                            const long slab = ((long)b * c + ch) * sp;
                            const float g = self.grad.data()[slab + idx];
                            if (need_src) {
                                float* dsrc = sn->grad.data() + slab;
                                dsrc[base] += g * wz0 * wy0 * wx0;
                                dsrc[base + dx] += g * wz0 * wy0 * fx;
                                dsrc[base + dy] += g * wz0 * fy * wx0;
                                dsrc[base + dy + dx] += g * wz0 * fy * fx;
                                dsrc[base + dz] += g * fz * wy0 * wx0;
                                dsrc[base + dz + dx] += g * fz * wy0 * fx;
                                dsrc[base + dz + dy] += g * fz * fy * wx0;
                                dsrc[base + dz + dy + dx] += g * fz * fy * fx;
                            }
                            if (need_field) {
                                const float* s = sn->value.data() + slab;
                                const float v000 = s[base], v001 = s[base + dx];
                                const float v010 = s[base + dy], v011 = s[base + dy + dx];
                                const float v100 = s[base + dz], v101 = s[base + dz + dx];
                                const float v110 = s[base + dz + dy], v111 = s[base + dz + dy + dx];
                                // d/dfz, d/dfy, d/dfx of the trilinear blend
                                gu0 += g * (wy0 * (wx0 * (v100 - v000) + fx * (v101 - v001)) +
                                            fy * (wx0 * (v110 - v010) + fx * (v111 - v011)));
                                gu1 += g * (wz0 * (wx0 * (v010 - v000) + fx * (v011 - v001)) +
                                            fz * (wx0 * (v110 - v100) + fx * (v111 - v101)));
                                gu2 += g * (wz0 * (wy0 * (v001 - v000) + fy * (v011 - v010)) +
                                            fz * (wy0 * (v101 - v100) + fy * (v111 - v110)));
                            }
                        }
                        if (need_field) {
                            float* df = fn->grad.data() + (long)b * 3 * sp;
                            if (az.interior) df[idx] += gu0;
                            if (ay.interior) df[sp + idx] += gu1;
                            if (ax.interior) df[2 * sp + idx] += gu2;
                        }
                    }
        }
    });
}

} // namespace anomorph
