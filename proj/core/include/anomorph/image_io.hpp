#pragma once

#include <string>

#include "anomorph/volume.hpp"

namespace anomorph {

// Writes one slice of `v` as an 8-bit binary PGM (`P5\n<W> <H>\n255\n` +
// W*H bytes), min-max scaled; a constant slice renders uniform gray 128.
// axis: 0 = depth (rows y, cols x), 1 = height (rows z, cols x),
// 2 = width (rows z, cols y).
void render_slice(const Volume& v, int axis, int index, const std::string& path);

// Same slice geometry as a binary PPM (`P6`), grayscale base with `overlay`
// (min-max scaled) added into the red channel.
void render_slice_overlay(const Volume& base, const Volume& overlay, int axis,
                          int index, const std::string& path);

} // namespace anomorph
