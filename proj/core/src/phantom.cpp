#include "anomorph/phantom.hpp"

#include <algorithm>
#include <cmath>

#include "anomorph/errors.hpp"
#include "anomorph/rng.hpp"

namespace anomorph {

namespace {

struct Ellipsoid {
    float c[3];    // center, voxel coords
    float ax[3];   // semi-axes, voxels
    float value;   // tissue intensity
};

// Normalized ellipsoid distance (1 on the surface).
inline float rho(const Ellipsoid& e, float z, float y, float x) {
    const float dz = (z - e.c[0]) / e.ax[0];
    const float dy = (y - e.c[1]) / e.ax[1];
    const float dx = (x - e.c[2]) / e.ax[2];
    return std::sqrt(dz * dz + dy * dy + dx * dx);
}

// Smooth 0..1 ramp: 1 well inside (t >> 0), 0 well outside, width `delta`.
inline float edge(float t, float delta) {
    const float v = t / delta + 0.5f;
    return v < 0.0f ? 0.0f : (v > 1.0f ? 1.0f : v);
}

struct Bump {
    float c[3];
    float amp;
    float inv2s2; // 1 / (2 sigma^2)
};

constexpr float kBackground = 0.02f;
constexpr float kFluid = 0.10f;      // intensity the atrophied core darkens toward
constexpr float kFoldGain = 4.0f;    // radial contraction strength at severity 1
constexpr float kSupportScale = 1.8f; // deformation support radius, in mean semi-axes

} // namespace

const std::map<int32_t, std::string>& phantom_legend() {
    static const std::map<int32_t, std::string> legend = {
        {1, "left_hippocampus"}, {2, "right_hippocampus"}, {3, "left_amygdala"},
        {4, "right_amygdala"},   {5, "ventricle"},
    };
    return legend;
}

Phantom generate_phantom(const PhantomSpec& spec) {
    if (spec.grid < 16) throw validation_error("phantom: grid must be >= 16");
    if (spec.severity < 0.0f || spec.severity > 1.0f)
        throw validation_error("phantom: severity must be in [0,1]");
    if (spec.variability < 0.0f)
        throw validation_error("phantom: variability must be >= 0");
    int target_label = -1;
    for (const auto& [l, name] : phantom_legend())
        if (name == spec.target_region) target_label = l;
    if (target_label < 0)
        throw validation_error("phantom: unknown target region '" + spec.target_region +
                               "' (known: left_hippocampus, right_hippocampus, "
                               "left_amygdala, right_amygdala, ventricle)");

    const int n = spec.grid;
    const float half = (float)n / 2.0f;
    const float mid = ((float)n - 1.0f) / 2.0f;
    const float jit = spec.variability;
    Rng geom = Rng(spec.seed).fork(1);
    Rng tex = Rng(spec.seed).fork(2);

    // Brain envelope. Base semi-axes in normalized units of half the grid.
    Ellipsoid brain;
    {
        const float base_ax[3] = {0.80f, 0.88f, 0.86f};
        for (int a = 0; a < 3; ++a) {
            brain.c[a] = mid + jit * geom.uniform(-0.02f, 0.02f) * half;
            brain.ax[a] = base_ax[a] * (1.0f + jit * geom.uniform(-0.05f, 0.05f)) * half;
        }
        brain.value = 0.50f + jit * geom.uniform(-0.03f, 0.03f);
    }
    float grad[3];
    for (int a = 0; a < 3; ++a) grad[a] = jit * geom.uniform(-0.04f, 0.04f);

    // Subregions, normalized (z, y, x) geometry scaled by half the grid.
    struct Proto {
        int32_t label;
        float c[3], ax[3], value;
    };
    const Proto protos[5] = {
        {1, {0.10f, 0.15f, -0.40f}, {0.20f, 0.16f, 0.16f}, 0.80f},
        {2, {0.10f, 0.15f, 0.40f}, {0.20f, 0.16f, 0.16f}, 0.80f},
        {3, {-0.32f, 0.10f, -0.38f}, {0.14f, 0.12f, 0.12f}, 0.68f},
        {4, {-0.32f, 0.10f, 0.38f}, {0.14f, 0.12f, 0.12f}, 0.68f},
        {5, {0.0f, 0.0f, 0.0f}, {0.30f, 0.13f, 0.14f}, 0.12f},
    };
    Ellipsoid regions[5];
    for (int i = 0; i < 5; ++i) {
        for (int a = 0; a < 3; ++a) {
            regions[i].c[a] =
                mid + (protos[i].c[a] + jit * geom.uniform(-0.03f, 0.03f)) * half;
            regions[i].ax[a] = protos[i].ax[a] *
                               (1.0f + jit * geom.uniform(-0.10f, 0.10f)) * half;
        }
        regions[i].value = protos[i].value + jit * geom.uniform(-0.04f, 0.04f);
    }

    // Seeded smooth texture: a fixed count of gaussian bumps.
    const int n_bumps = 40;
    std::vector<Bump> bumps((size_t)n_bumps);
    const float sigma_scale = (float)n / 32.0f;
    for (auto& b : bumps) {
        for (int a = 0; a < 3; ++a) b.c[a] = mid + tex.uniform(-0.9f, 0.9f) * half;
        b.amp = jit * tex.uniform(-0.07f, 0.07f);
        const float s = tex.uniform(1.2f, 3.0f) * sigma_scale;
        b.inv2s2 = 1.0f / (2.0f * s * s);
    }

    // Compose the healthy volume and mask.
    Volume vol;
    vol.data = NdArray({n, n, n});
    RegionMask mask;
    mask.shape = {n, n, n};
    mask.labels.assign((size_t)vol.data.size(), 0);
    mask.legend = phantom_legend();

    float* v = vol.data.data();
    for (int z = 0; z < n; ++z)
        for (int y = 0; y < n; ++y)
            for (int x = 0; x < n; ++x) {
                const long idx = ((long)z * n + y) * n + x;
                const float fz = (float)z, fy = (float)y, fx = (float)x;

                float texv = 0.0f;
                for (const auto& b : bumps) {
                    const float dz = fz - b.c[0], dy = fy - b.c[1], dx = fx - b.c[2];
                    texv += b.amp * std::exp(-(dz * dz + dy * dy + dx * dx) * b.inv2s2);
                }
                float tissue = brain.value + texv +
                               grad[0] * (fz - mid) / half + grad[1] * (fy - mid) / half +
                               grad[2] * (fx - mid) / half;

                int32_t label = 0;
                for (int i = 0; i < 5; ++i) {
                    const float r = rho(regions[i], fz, fy, fx);
                    if (r <= 1.0f && label == 0) label = protos[i].label;
                    const float wgt = edge(1.0f - r, 0.25f);
                    tissue = tissue + wgt * (regions[i].value - tissue);
                }

                const float wb = edge(1.0f - rho(brain, fz, fy, fx), 0.06f);
                float out = kBackground + wb * (tissue - kBackground);
                v[idx] = std::clamp(out, 0.01f, 0.98f);
                mask.labels[(size_t)idx] = wb > 0.5f ? label : 0;
            }

    Phantom ph;
    ph.gt_field = DeformationField::zeros(n, n, n);

    if (spec.severity > 0.0f) {
        const Ellipsoid& tgt = regions[target_label - 1];
        const float abar = (tgt.ax[0] + tgt.ax[1] + tgt.ax[2]) / 3.0f;
        const float big_r = kSupportScale * abar;
        float* u = ph.gt_field.data.data();
        const long sp = (long)n * n * n;
        for (int z = 0; z < n; ++z)
            for (int y = 0; y < n; ++y)
                for (int x = 0; x < n; ++x) {
                    const long idx = ((long)z * n + y) * n + x;
                    const float dz = (float)z - tgt.c[0];
                    const float dy = (float)y - tgt.c[1];
                    const float dx = (float)x - tgt.c[2];
                    const float r = std::sqrt(dz * dz + dy * dy + dx * dx);
                    if (r >= big_r) continue;
                    const float t = 1.0f - r / big_r;
                    const float g = spec.severity * kFoldGain * t * t;
                    u[idx] = g * dz;
                    u[sp + idx] = g * dy;
                    u[2 * sp + idx] = g * dx;
                }

        Volume warped = warp_volume(vol, ph.gt_field);
        // Darken toward fluid proportionally to local contraction: the
        // destroyed signal is what forces fold-based matching downstream.
        float* wv = warped.data.data();
        for (int z = 0; z < n; ++z)
            for (int y = 0; y < n; ++y)
                for (int x = 0; x < n; ++x) {
                    const long idx = ((long)z * n + y) * n + x;
                    const float dz = (float)z - tgt.c[0];
                    const float dy = (float)y - tgt.c[1];
                    const float dx = (float)x - tgt.c[2];
                    const float r = std::sqrt(dz * dz + dy * dy + dx * dx);
                    if (r >= big_r) continue;
                    const float t = 1.0f - r / big_r;
                    const float lam = 0.8f * spec.severity * t * t;
                    wv[idx] = wv[idx] + lam * (kFluid - wv[idx]);
                }
        ph.volume = std::move(warped);
        ph.mask = warp_mask_nearest(mask, ph.gt_field);
    } else {
        ph.volume = std::move(vol);
        ph.mask = std::move(mask);
    }
    return ph;
}

} // namespace anomorph
