#pragma once

// Shared test-side oracles and the finite-difference gradient harness. Every
// oracle here is written independently from the library implementation,
// straight from the defining formula.

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "anomorph/graph.hpp"
#include "anomorph/ops.hpp"
#include "anomorph/rng.hpp"

namespace testsup {

using anomorph::NdArray;
using anomorph::Rng;
using anomorph::Tensor;

inline NdArray random_array(std::vector<int> shape, Rng& rng, float lo = -1.0f,
                            float hi = 1.0f) {
    NdArray a(std::move(shape));
    for (long i = 0; i < a.size(); ++i) a.data()[i] = rng.uniform(lo, hi);
    return a;
}

// ---------------------------------------------------------------------------
// Finite-difference gradient check.
//
// `loss_fn` must be a pure function of the leaves. Returns the L2-relative
// error between analytic gradients (one backward pass) and central
// differences with per-element step 1e-3 * (1 + |w|), concatenated over all
// leaves.
inline double fd_rel_error(
    const std::function<Tensor(const std::vector<Tensor>&)>& loss_fn,
    std::vector<NdArray> leaf_values) {
    std::vector<Tensor> leaves;
    leaves.reserve(leaf_values.size());
    for (const auto& v : leaf_values) leaves.push_back(Tensor::leaf(v, true));

    Tensor loss = loss_fn(leaves);
    anomorph::backward(loss);

    std::vector<double> analytic, numeric;
    for (size_t li = 0; li < leaves.size(); ++li) {
        const NdArray& g = leaves[li].grad();
        for (long i = 0; i < g.size(); ++i) analytic.push_back((double)g.data()[i]);
    }

    anomorph::NoGradGuard ng;
    auto eval = [&]() {
        std::vector<Tensor> consts;
        consts.reserve(leaf_values.size());
        for (const auto& v : leaf_values) consts.push_back(Tensor::constant(v));
        return (double)loss_fn(consts).scalar();
    };
    for (auto& v : leaf_values) {
        for (long i = 0; i < v.size(); ++i) {
            const float w = v.data()[i];
            const float h = 1e-3f * (1.0f + std::fabs(w));
            v.data()[i] = w + h;
            const double up = eval();
            v.data()[i] = w - h;
            const double dn = eval();
            v.data()[i] = w;
            numeric.push_back((up - dn) / (2.0 * (double)h));
        }
    }

    double diff2 = 0.0, ref2 = 0.0;
    for (size_t i = 0; i < analytic.size(); ++i) {
        const double d = analytic[i] - numeric[i];
        diff2 += d * d;
        ref2 += numeric[i] * numeric[i];
    }
    return std::sqrt(diff2) / std::max(std::sqrt(ref2), 1e-8);
}

// Scalar-reducing wrapper: mean(f(...) * c) with a fixed random projection c,
// so gradients are generic (no symmetric cancellation).
inline Tensor project_to_scalar(const Tensor& t, uint64_t seed) {
    Rng rng(seed);
    NdArray c = random_array(t.value().shape(), rng, 0.1f, 1.0f);
    return anomorph::mean(anomorph::mul(t, Tensor::constant(std::move(c))));
}

// ---------------------------------------------------------------------------
// Convolution oracles (naive loops, NCDHW).

inline int conv_oracle_out(int in, int k, int stride, int pad) {
    return (in + 2 * pad - k) / stride + 1;
}

inline NdArray conv3d_oracle(const NdArray& x, const NdArray& k, const NdArray* bias,
                             int stride, int pad) {
    const auto& xs = x.shape();
    const auto& ks = k.shape();
    const int n = xs[0], ci = xs[1], d = xs[2], h = xs[3], w = xs[4];
    const int co = ks[0], kk = ks[2];
    const int od = conv_oracle_out(d, kk, stride, pad);
    const int oh = conv_oracle_out(h, kk, stride, pad);
    const int ow = conv_oracle_out(w, kk, stride, pad);
    NdArray out({n, co, od, oh, ow});
    for (int b = 0; b < n; ++b)
        for (int f = 0; f < co; ++f)
            for (int z = 0; z < od; ++z)
                for (int y = 0; y < oh; ++y)
                    for (int xx = 0; xx < ow; ++xx) {
                        double acc = bias ? (double)bias->data()[f] : 0.0;
                        for (int c = 0; c < ci; ++c)
                            for (int kz = 0; kz < kk; ++kz)
                                for (int ky = 0; ky < kk; ++ky)
                                    for (int kx = 0; kx < kk; ++kx) {
                                        const int iz = z * stride + kz - pad;
                                        const int iy = y * stride + ky - pad;
                                        const int ix = xx * stride + kx - pad;
                                        if (iz < 0 || iz >= d || iy < 0 || iy >= h ||
                                            ix < 0 || ix >= w)
                                            continue;
                                        const float xv =
                                            x.data()[(((long)b * ci + c) * d + iz) * h * w +
                                                     (long)iy * w + ix];
                                        const float kv =
                                            k.data()[(((long)f * ci + c) * kk + kz) * kk * kk +
                                                     (long)ky * kk + kx];
                                        acc += (double)xv * kv;
                                    }
                        out.data()[(((long)b * co + f) * od + z) * oh * ow +
                                   (long)y * ow + xx] = (float)acc;
                    }
    return out;
}

// Transpose convolution as the scatter adjoint of conv3d_oracle. Kernel is
// [Cin, Cout, k, k, k]; output extent = (S-1)*stride - 2*pad + k.
inline NdArray conv3d_transpose_oracle(const NdArray& x, const NdArray& k,
                                       const NdArray* bias, int stride, int pad) {
    const auto& xs = x.shape();
    const auto& ks = k.shape();
    const int n = xs[0], ci = xs[1], d = xs[2], h = xs[3], w = xs[4];
    const int co = ks[1], kk = ks[2];
    const int od = (d - 1) * stride - 2 * pad + kk;
    const int oh = (h - 1) * stride - 2 * pad + kk;
    const int ow = (w - 1) * stride - 2 * pad + kk;
    NdArray out({n, co, od, oh, ow});
    for (int b = 0; b < n; ++b)
        for (int f = 0; f < co; ++f)
            if (bias)
                for (long i = 0; i < (long)od * oh * ow; ++i)
                    out.data()[((long)b * co + f) * od * oh * ow + i] = bias->data()[f];
    for (int b = 0; b < n; ++b)
        for (int c = 0; c < ci; ++c)
            for (int z = 0; z < d; ++z)
                for (int y = 0; y < h; ++y)
                    for (int xx = 0; xx < w; ++xx) {
                        const float xv = x.data()[(((long)b * ci + c) * d + z) * h * w +
                                                  (long)y * w + xx];
                        for (int f = 0; f < co; ++f)
                            for (int kz = 0; kz < kk; ++kz)
                                for (int ky = 0; ky < kk; ++ky)
                                    for (int kx = 0; kx < kk; ++kx) {
                                        const int oz = z * stride + kz - pad;
                                        const int oy = y * stride + ky - pad;
                                        const int ox = xx * stride + kx - pad;
                                        if (oz < 0 || oz >= od || oy < 0 || oy >= oh ||
                                            ox < 0 || ox >= ow)
                                            continue;
                                        const float kv =
                                            k.data()[(((long)c * co + f) * kk + kz) * kk * kk +
                                                     (long)ky * kk + kx];
                                        out.data()[(((long)b * co + f) * od + oz) * oh * ow +
                                                   (long)oy * ow + ox] += xv * kv;
                                    }
                    }
    return out;
}

// ---------------------------------------------------------------------------
// LNCC oracle: per-voxel windowed Pearson over zero-padded neighborhoods
// with constant count window^3, variances floored, averaged over voxels.

inline double lncc_oracle(const NdArray& x, const NdArray& y, int window, float eps) {
    const auto& s = x.shape();
    const int d = s[s.size() - 3], h = s[s.size() - 2], w = s[s.size() - 1];
    const long vol = (long)d * h * w;
    const long batch = x.size() / vol;
    const int r = window / 2;
    const double count = (double)window * window * window;
    double total = 0.0;
    for (long b = 0; b < batch; ++b) {
        const float* xp = x.data() + b * vol;
        const float* yp = y.data() + b * vol;
        for (int z = 0; z < d; ++z)
            for (int yy = 0; yy < h; ++yy)
                for (int xx = 0; xx < w; ++xx) {
                    double sx = 0, sy = 0, sxy = 0, sxx = 0, syy = 0;
                    for (int dz = -r; dz <= r; ++dz)
                        for (int dy = -r; dy <= r; ++dy)
                            for (int dx = -r; dx <= r; ++dx) {
                                const int az = z + dz, ay = yy + dy, ax = xx + dx;
                                if (az < 0 || az >= d || ay < 0 || ay >= h || ax < 0 ||
                                    ax >= w)
                                    continue;
                                const double xv = xp[((long)az * h + ay) * w + ax];
                                const double yv = yp[((long)az * h + ay) * w + ax];
                                sx += xv;
                                sy += yv;
                                sxy += xv * yv;
                                sxx += xv * xv;
                                syy += yv * yv;
                            }
                    const double mx = sx / count, my = sy / count;
                    const double cov = sxy / count - mx * my;
                    const double vx = std::max(sxx / count - mx * mx, (double)eps);
                    const double vy = std::max(syy / count - my * my, (double)eps);
                    total += cov / std::sqrt(vx * vy);
                }
    }
    return total / (double)(batch * vol);
}

// ---------------------------------------------------------------------------
// AUROC oracle: brute-force pair counting with half-credit ties.

inline double auroc_oracle(const std::vector<float>& scores,
                           const std::vector<int>& labels) {
    double num = 0.0;
    long pairs = 0;
    for (size_t i = 0; i < scores.size(); ++i)
        for (size_t j = 0; j < scores.size(); ++j) {
            if (labels[i] != 1 || labels[j] != 0) continue;
            ++pairs;
            if (scores[i] > scores[j]) num += 1.0;
            else if (scores[i] == scores[j]) num += 0.5;
        }
    return num / (double)pairs;
}

} // namespace testsup
