#include "anomorph/nd_array.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace anomorph {

int64_t NdArray::numel(const std::vector<int>& shape) {
    int64_t n = 1;
    for (int d : shape) {
        if (d <= 0) throw std::invalid_argument("NdArray: non-positive dimension");
        n *= d;
    }
    return n;
}

NdArray::NdArray(std::vector<int> shape, float fill) : shape_(std::move(shape)) {
    data_.assign(static_cast<size_t>(numel(shape_)), fill);
}

NdArray NdArray::from_data(std::vector<int> shape, std::vector<float> data) {
    if (numel(shape) != static_cast<int64_t>(data.size()))
        throw std::invalid_argument("NdArray: data size does not match shape");
    NdArray a;
    a.shape_ = std::move(shape);
    a.data_ = std::move(data);
    return a;
}

bool NdArray::all_finite() const {
    for (float v : data_)
        if (!std::isfinite(v)) return false;
    return true;
}

void NdArray::fill(float v) {
    for (float& x : data_) x = v;
}

void NdArray::add_inplace(const NdArray& other) {
    if (!same_shape(other)) throw std::invalid_argument("NdArray::add_inplace: shape mismatch");
    const float* src = other.data();
    float* dst = data();
    const int64_t n = size();
    for (int64_t i = 0; i < n; ++i) dst[i] += src[i];
}

void NdArray::scale_inplace(float c) {
    for (float& x : data_) x *= c;
}

std::string NdArray::shape_str() const {
    std::ostringstream os;
    os << "(";
    for (size_t i = 0; i < shape_.size(); ++i) os << (i ? "," : "") << shape_[i];
    os << ")";
    return os.str();
}

} // namespace anomorph
