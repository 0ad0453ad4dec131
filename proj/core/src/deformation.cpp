#include "anomorph/deformation.hpp"

#include <algorithm>
#include <cmath>

#include "anomorph/errors.hpp"
#include "anomorph/trilinear.hpp"
#include "anomorph/volume_io.hpp"

namespace anomorph {

namespace tri {

void warp_volume_raw(const float* src, const float* field, float* out, int c,
                     int d, int h, int w) {
    const long sp = (long)d * h * w;
#pragma omp parallel for collapse(2) schedule(static)
    for (int z = 0; z < d; ++z)
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) {
                const long idx = ((long)z * h + y) * w + x;
                const Axis az = setup((float)z + field[idx], d);
                const Axis ay = setup((float)y + field[sp + idx], h);
                const Axis ax = setup((float)x + field[2 * sp + idx], w);
                for (int ch = 0; ch < c; ++ch)
                    out[ch * sp + idx] = sample(src + ch * sp, h, w, az, ay, ax);
            }
}

} // namespace tri

DeformationField::DeformationField(NdArray a) : data(std::move(a)) {
    if (data.rank() != 4 || data.dim(0) != 3)
        throw validation_error("DeformationField: data must be [3,D,H,W], got " +
                               data.shape_str());
    if (!data.all_finite()) throw validation_error("DeformationField: non-finite values");
}

DeformationField DeformationField::zeros(int d, int h, int w) {
    NdArray a({3, d, h, w});
    a.fill(0.0f);
    return DeformationField(std::move(a));
}

namespace {

void require_field_match(const std::vector<int>& shape, const DeformationField& f,
                         const char* op) {
    if (shape[0] != f.depth() || shape[1] != f.height() || shape[2] != f.width())
        throw validation_error(std::string(op) + ": shape mismatch between volume and field");
}

} // namespace

Volume warp_volume(const Volume& src, const DeformationField& field) {
    require_field_match(src.data.shape(), field, "warp_volume");
    if (src.depth() < 2 || src.height() < 2 || src.width() < 2)
        throw validation_error("warp_volume: spatial extents must be >= 2");
    Volume out;
    out.spacing = src.spacing;
    out.data = NdArray(src.data.shape());
    tri::warp_volume_raw(src.data.data(), field.data.data(), out.data.data(), 1,
                         src.depth(), src.height(), src.width());
    return out;
}

RegionMask warp_mask_nearest(const RegionMask& src, const DeformationField& field) {
    require_field_match(src.shape, field, "warp_mask_nearest");
    const int d = src.shape[0], h = src.shape[1], w = src.shape[2];
    const long sp = (long)d * h * w;
    RegionMask out;
    out.shape = src.shape;
    out.legend = src.legend;
    out.labels.resize((size_t)sp);
    const float* f = field.data.data();
    auto nearest = [](float c, int n) {
        long i = std::lround((double)c);
        return (int)std::clamp(i, 0L, (long)n - 1);
    };
    for (int z = 0; z < d; ++z)
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) {
                const long idx = ((long)z * h + y) * w + x;
                const int sz = nearest((float)z + f[idx], d);
                const int sy = nearest((float)y + f[sp + idx], h);
                const int sx = nearest((float)x + f[2 * sp + idx], w);
                out.labels[(size_t)idx] = src.labels[(size_t)(((long)sz * h + sy) * w + sx)];
            }
    return out;
}

Volume jacobian_determinant(const DeformationField& field) {
    const int d = field.depth(), h = field.height(), w = field.width();
    if (d < 3 || h < 3 || w < 3)
        throw validation_error("jacobian_determinant: each spatial extent must be >= 3");
    const long sp = (long)d * h * w;
    const float* u = field.data.data();

    Volume out;
    out.data = NdArray({d, h, w});
    float* det = out.data.data();

    // Derivative of component slab uc along an axis at position i: central in
    // the interior, one-sided on faces.
    auto deriv = [&](const float* uc, long idx, int i, int n, long stride) {
        if (i == 0) return uc[idx + stride] - uc[idx];
        if (i == n - 1) return uc[idx] - uc[idx - stride];
        return 0.5f * (uc[idx + stride] - uc[idx - stride]);
    };

#pragma omp parallel for collapse(2) schedule(static)
    for (int z = 0; z < d; ++z)
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) {
                const long idx = ((long)z * h + y) * w + x;
                float j[3][3];
                for (int a = 0; a < 3; ++a) {
                    const float* uc = u + (long)a * sp;
                    j[a][0] = deriv(uc, idx, z, d, (long)h * w);
                    j[a][1] = deriv(uc, idx, y, h, (long)w);
                    j[a][2] = deriv(uc, idx, x, w, 1L);
                    j[a][a] += 1.0f;
                }
                det[idx] = j[0][0] * (j[1][1] * j[2][2] - j[1][2] * j[2][1]) -
                           j[0][1] * (j[1][0] * j[2][2] - j[1][2] * j[2][0]) +
                           j[0][2] * (j[1][0] * j[2][1] - j[1][1] * j[2][0]);
            }
    return out;
}

Volume folding_map(const Volume& jacobian) {
    Volume out;
    out.spacing = jacobian.spacing;
    out.data = NdArray(jacobian.data.shape());
    const float* in = jacobian.data.data();
    float* o = out.data.data();
    const long n = jacobian.data.size();
#pragma omp simd
    for (long i = 0; i < n; ++i) o[i] = in[i] < 0.0f ? -in[i] : 0.0f;
    return out;
}

std::vector<uint8_t> dilate_label(const RegionMask& m, int label, int radius) {
    const int d = m.shape[0], h = m.shape[1], w = m.shape[2];
    const long sp = (long)d * h * w;
    std::vector<uint8_t> cur((size_t)sp, 0);
    for (long i = 0; i < sp; ++i) {
        const int32_t v = m.labels[(size_t)i];
        cur[(size_t)i] = (label < 0 ? v != 0 : v == label) ? 1 : 0;
    }
    // Chebyshev dilation = `radius` rounds of 3^3 max filtering.
    std::vector<uint8_t> nxt((size_t)sp, 0);
    for (int r = 0; r < radius; ++r) {
        for (int z = 0; z < d; ++z)
            for (int y = 0; y < h; ++y)
                for (int x = 0; x < w; ++x) {
                    uint8_t v = 0;
                    for (int dz = -1; dz <= 1 && !v; ++dz)
                        for (int dy = -1; dy <= 1 && !v; ++dy)
                            for (int dx = -1; dx <= 1 && !v; ++dx) {
                                const int zz = z + dz, yy = y + dy, xx = x + dx;
                                if (zz < 0 || zz >= d || yy < 0 || yy >= h || xx < 0 ||
                                    xx >= w)
                                    continue;
                                v = cur[(size_t)(((long)zz * h + yy) * w + xx)];
                            }
                    nxt[(size_t)(((long)z * h + y) * w + x)] = v;
                }
        std::swap(cur, nxt);
    }
    return cur;
}

void save_deformation_field(const DeformationField& f, const std::string& path) {
    save_raw_with_sidecar(f.data, path, {{"kind", "\"displacement_voxels\""}});
}

DeformationField load_deformation_field(const std::string& path) {
    std::map<std::string, std::string> fields;
    NdArray a = load_raw_with_sidecar(path, &fields);
    if (a.rank() != 4 || a.dim(0) != 3)
        throw validation_error("deformation field must be [3,D,H,W]: " + path);
    if (auto it = fields.find("kind"); it != fields.end() &&
                                       it->second != "\"displacement_voxels\"")
        throw validation_error("unexpected field kind in " + path + ": " + it->second);
    return DeformationField(std::move(a));
}

} // namespace anomorph
