#pragma once

namespace anomorph::tri {

// Shared trilinear sampling core (pull convention, clamp-to-border). Both
// the differentiable warp op and the plain volume warp build on these, so
// their forward arithmetic is identical bit for bit. f is always in [0,1):
// an exact integer coordinate reads a single voxel with no arithmetic on
// it, which makes the zero-field warp an exact identity.

struct Axis {
    int i0;        // lower lattice index
    int i1;        // neighbor, clamped to the last index
    float f;       // fractional offset in [0, 1)
    bool interior; // false where the border clamp kills the coordinate gradient
};

inline Axis setup(float c, int n) {
    Axis a;
    a.interior = (c > 0.0f && c < (float)(n - 1));
    if (c < 0.0f) c = 0.0f;
    if (c > (float)(n - 1)) c = (float)(n - 1);
    a.i0 = (int)c;
    a.i1 = a.i0 + 1 < n ? a.i0 + 1 : n - 1;
    a.f = c - (float)a.i0;
    return a;
}

// One sample from a [D,H,W] slab.
inline float sample(const float* s, int h, int w, const Axis& az, const Axis& ay,
                    const Axis& ax) {
    const long base = ((long)az.i0 * h + ay.i0) * w + ax.i0;
    const long dx = ax.i1 - ax.i0;
    const long dy = (long)(ay.i1 - ay.i0) * w;
    const long dz = (long)(az.i1 - az.i0) * h * w;
    const float fx = ax.f, fy = ay.f, fz = az.f;
    const float v00 = s[base] + fx * (s[base + dx] - s[base]);
    const float v01 = s[base + dy] + fx * (s[base + dy + dx] - s[base + dy]);
    const float v10 = s[base + dz] + fx * (s[base + dz + dx] - s[base + dz]);
    const float v11 = s[base + dz + dy] + fx * (s[base + dz + dy + dx] - s[base + dz + dy]);
    const float v0 = v00 + fy * (v01 - v00);
    const float v1 = v10 + fy * (v11 - v10);
    return v0 + fz * (v1 - v0);
}

// Full-volume pull warp of C channel slabs by one displacement field
// (layout [3,D,H,W], voxel units): out(p) = src(p + u(p)).
void warp_volume_raw(const float* src, const float* field, float* out, int c,
                     int d, int h, int w);

} // namespace anomorph::tri
