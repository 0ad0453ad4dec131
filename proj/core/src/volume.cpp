#include "anomorph/volume.hpp"

#include "anomorph/errors.hpp"

namespace anomorph {

Volume::Volume(NdArray a, std::array<float, 3> sp) : data(std::move(a)), spacing(sp) {
    if (data.rank() != 3)
        throw validation_error("Volume: data must be rank 3, got " + data.shape_str());
    if (!data.all_finite()) throw validation_error("Volume: non-finite values");
}

void RegionMask::validate() const {
    if (shape.size() != 3) throw validation_error("RegionMask: shape must be rank 3");
    long n = 1;
    for (int s : shape) {
        if (s <= 0) throw validation_error("RegionMask: non-positive extent");
        n *= s;
    }
    if ((long)labels.size() != n)
        throw validation_error("RegionMask: label count does not match shape");
    for (int32_t v : labels) {
        if (v < 0) throw validation_error("RegionMask: negative label");
        if (v != 0 && !legend.count(v))
            throw validation_error("RegionMask: label " + std::to_string(v) +
                                   " missing from legend");
    }
}

} // namespace anomorph
