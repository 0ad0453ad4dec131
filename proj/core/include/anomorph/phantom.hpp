#pragma once

#include <map>
#include <string>

#include "anomorph/deformation.hpp"
#include "anomorph/volume.hpp"

namespace anomorph {

// Procedural "brain" phantom: an ellipsoidal foreground with seeded smooth
// texture, five labeled subregions, and an optional ground-truth atrophy
// deformation of one target region. Same spec -> bit-identical outputs.
struct PhantomSpec {
    uint64_t seed = 0;
    int grid = 32;                                  // voxels per axis, >= 16
    float severity = 0.0f;                          // in [0, 1]
    std::string target_region = "left_hippocampus"; // see phantom_legend()
    float variability = 1.0f;                       // inter-subject jitter scale, >= 0
};

struct Phantom {
    Volume volume;
    RegionMask mask;
    DeformationField gt_field; // the exact pull field applied (zero at severity 0)
};

// label -> region name for all phantoms.
const std::map<int32_t, std::string>& phantom_legend();

Phantom generate_phantom(const PhantomSpec& spec);

} // namespace anomorph
