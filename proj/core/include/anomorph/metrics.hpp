#pragma once

#include <vector>

#include "anomorph/volume.hpp"

namespace anomorph {

// Area under the ROC curve via the Mann-Whitney statistic with average ranks
// for ties. `labels` holds 0 (negative) / 1 (positive); both classes must be
// present.
double auroc(const std::vector<float>& scores, const std::vector<int>& labels);

// Mean absolute error over two same-shaped volumes.
double mae(const Volume& a, const Volume& b);

// Structural similarity from global statistics (one window spanning the whole
// volume), with the conventional stabilizers C1 = 0.01^2, C2 = 0.03^2 on a
// unit dynamic range.
double ssim(const Volume& a, const Volume& b);

} // namespace anomorph
