#pragma once

#include <array>
#include <map>
#include <string>
#include <vector>

#include "anomorph/nd_array.hpp"

namespace anomorph {

// A dense 3D scalar image. Shape order is (depth, height, width); spacing
// is millimetres per voxel along the same axes and is informational only
// (all geometry in this library is computed in voxel units).
struct Volume {
    NdArray data;                              // rank 3 [d, h, w]
    std::array<float, 3> spacing{1.f, 1.f, 1.f};

    Volume() = default;
    explicit Volume(NdArray a, std::array<float, 3> sp = {1.f, 1.f, 1.f});

    int depth() const { return data.dim(0); }
    int height() const { return data.dim(1); }
    int width() const { return data.dim(2); }
    bool same_shape(const Volume& o) const { return data.same_shape(o.data); }
};

// Integer-labeled grid naming subregions of a paired Volume. Label 0 is
// background; every nonzero label appearing in the grid has a legend entry.
struct RegionMask {
    std::vector<int> shape;                    // [d, h, w]
    std::vector<int32_t> labels;               // row-major, size = product(shape)
    std::map<int32_t, std::string> legend;

    long size() const { return (long)labels.size(); }
    void validate() const;                     // shape/legend invariants
};

} // namespace anomorph
