#pragma once

#include <string>

#include "anomorph/volume.hpp"

namespace anomorph {

// Single-file uncompressed NIfTI-1 (.nii), magic "n+1", little-endian host.
// Supported datatypes: float32 (16) and int16 (4); scl_slope/scl_inter are
// applied (slope 0 means unscaled). The payload's x-fastest order coincides
// with Volume's (depth, height, width) row-major layout, so no permutation
// happens and spacing maps to (pixdim3, pixdim2, pixdim1).
Volume load_nifti(const std::string& path);

// Writes float32, slope 1 / inter 0, vox_offset 352.
void save_nifti(const Volume& v, const std::string& path);

} // namespace anomorph
