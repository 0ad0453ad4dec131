#include "anomorph/image_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <vector>

#include "anomorph/errors.hpp"

namespace anomorph {

namespace {

// Gathers the slice as floats, row-major, returning (rows, cols).
std::pair<int, int> extract_slice(const Volume& v, int axis, int index,
                                  std::vector<float>& out) {
    if (axis < 0 || axis > 2)
        throw validation_error("render_slice: axis must be 0, 1, or 2");
    const int d = v.depth(), h = v.height(), w = v.width();
    const int ext[3] = {d, h, w};
    if (index < 0 || index >= ext[axis])
        throw validation_error("render_slice: index " + std::to_string(index) +
                               " out of range for axis extent " +
                               std::to_string(ext[axis]));
    const float* a = v.data.data();
    auto at = [&](int z, int y, int x) { return a[((long)z * h + y) * w + x]; };
    int rows, cols;
    if (axis == 0) {
        rows = h;
        cols = w;
        out.resize((size_t)rows * cols);
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) out[(size_t)y * cols + x] = at(index, y, x);
    } else if (axis == 1) {
        rows = d;
        cols = w;
        out.resize((size_t)rows * cols);
        for (int z = 0; z < d; ++z)
            for (int x = 0; x < w; ++x) out[(size_t)z * cols + x] = at(z, index, x);
    } else {
        rows = d;
        cols = h;
        out.resize((size_t)rows * cols);
        for (int z = 0; z < d; ++z)
            for (int y = 0; y < h; ++y) out[(size_t)z * cols + y] = at(z, y, index);
    }
    return {rows, cols};
}

// Min-max scale to bytes; constant input maps to `flat`.
std::vector<uint8_t> to_bytes(const std::vector<float>& s, uint8_t flat) {
    float lo = s[0], hi = s[0];
    for (float v : s) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    std::vector<uint8_t> b(s.size());
    if (hi == lo) {
        std::fill(b.begin(), b.end(), flat);
        return b;
    }
    const float scale = 255.0f / (hi - lo);
    for (size_t i = 0; i < s.size(); ++i)
        b[i] = (uint8_t)std::lround((s[i] - lo) * scale);
    return b;
}

void write_pnm(const std::string& path, const char* magic, int w, int h,
               const std::vector<uint8_t>& payload) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot write image: " + path);
    char header[64];
    const int n = std::snprintf(header, sizeof(header), "%s\n%d %d\n255\n", magic, w, h);
    f.write(header, n);
    f.write((const char*)payload.data(), (std::streamsize)payload.size());
    if (!f) throw std::runtime_error("write failed: " + path);
}

} // namespace

void render_slice(const Volume& v, int axis, int index, const std::string& path) {
    std::vector<float> s;
    auto [rows, cols] = extract_slice(v, axis, index, s);
    write_pnm(path, "P5", cols, rows, to_bytes(s, 128));
}

void render_slice_overlay(const Volume& base, const Volume& overlay, int axis,
                          int index, const std::string& path) {
    if (!base.same_shape(overlay))
        throw validation_error("render_slice: overlay shape mismatch");
    std::vector<float> sb, so;
    auto [rows, cols] = extract_slice(base, axis, index, sb);
    extract_slice(overlay, axis, index, so);
    std::vector<uint8_t> gray = to_bytes(sb, 128);
    std::vector<uint8_t> hot = to_bytes(so, 0);
    std::vector<uint8_t> rgb((size_t)rows * cols * 3);
    for (size_t i = 0; i < gray.size(); ++i) {
        rgb[3 * i + 0] = (uint8_t)std::min(255, (int)gray[i] + (int)hot[i]);
        rgb[3 * i + 1] = gray[i];
        rgb[3 * i + 2] = gray[i];
    }
    write_pnm(path, "P6", cols, rows, rgb);
}

} // namespace anomorph
