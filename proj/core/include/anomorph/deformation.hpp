#pragma once

#include <string>

#include "anomorph/volume.hpp"

namespace anomorph {

// Dense displacement field in voxel units, layout [3, D, H, W] with the
// component order (dz, dy, dx). Convention: a warped image reads its source
// at p + u(p) (pull sampling).
struct DeformationField {
    NdArray data; // rank 4, dim(0) == 3

    DeformationField() = default;
    explicit DeformationField(NdArray a);
    static DeformationField zeros(int d, int h, int w);

    int depth() const { return data.dim(1); }
    int height() const { return data.dim(2); }
    int width() const { return data.dim(3); }
};

// Pull-sampling trilinear warp with clamp-to-border: out(p) = src(p + u(p)).
Volume warp_volume(const Volume& src, const DeformationField& field);

// Nearest-neighbor pull for label grids: out(p) = labels(round(p + u(p))),
// coordinates clamped to the grid.
RegionMask warp_mask_nearest(const RegionMask& src, const DeformationField& field);

// Per-voxel determinant of J(p) = I + grad u(p), gradients by central
// differences in the interior and one-sided differences on the faces.
// Each spatial extent must be at least 3.
Volume jacobian_determinant(const DeformationField& field);

// Elementwise max(0, -det).
Volume folding_map(const Volume& jacobian);

// Binary dilation of {labels == label} (label < 0 means any nonzero) by a
// chebyshev radius, returned as 0/1 grid. Used for region bookkeeping.
std::vector<uint8_t> dilate_label(const RegionMask& m, int label, int radius);

// On-disk format: raw+JSON convention with shape [3,D,H,W] and
// "kind": "displacement_voxels".
void save_deformation_field(const DeformationField& f, const std::string& path);
DeformationField load_deformation_field(const std::string& path);

} // namespace anomorph
