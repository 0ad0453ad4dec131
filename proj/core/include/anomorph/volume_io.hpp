#pragma once

#include <map>
#include <string>

#include "anomorph/volume.hpp"

namespace anomorph {

// Raw array storage convention: `<base>.f32raw` (little-endian float32,
// row-major) plus `<base>.json` sidecar carrying at least "shape". Paths
// may be given with or without the ".f32raw" extension.

// Low-level pair I/O. `extra` is merged into the sidecar; returned map
// holds the sidecar's non-shape fields as JSON-encoded strings.
void save_raw_with_sidecar(const NdArray& a, const std::string& path,
                           const std::map<std::string, std::string>& extra_json = {});
NdArray load_raw_with_sidecar(const std::string& path,
                              std::map<std::string, std::string>* fields_json = nullptr);

// Volume I/O: sidecar {"shape":[d,h,w], "spacing":[dz,dy,dx]}.
void save_volume(const Volume& v, const std::string& path);
Volume load_raw_volume(const std::string& path);

// Region masks reuse the raw convention with labels stored as exact small
// integers in f32 and the legend in the sidecar.
void save_region_mask(const RegionMask& m, const std::string& path);
RegionMask load_region_mask(const std::string& path);

// Linear intensity rescale: the lo_pct percentile maps to 0, hi_pct to 1
// (percentiles by linear interpolation over sorted values), then clamp to
// [0,1]. Throws on constant input.
Volume normalize_intensity(const Volume& v, double lo_pct = 0.5, double hi_pct = 99.5);

} // namespace anomorph
