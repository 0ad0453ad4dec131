#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace anomorph {

// Dense row-major float32 array. The last axis is contiguous.
class NdArray {
public:
    NdArray() = default;

    explicit NdArray(std::vector<int> shape, float fill = 0.0f);

    static NdArray from_data(std::vector<int> shape, std::vector<float> data);

    const std::vector<int>& shape() const { return shape_; }
    int rank() const { return static_cast<int>(shape_.size()); }
    int dim(int i) const { return shape_[static_cast<size_t>(i)]; }
    int64_t size() const { return static_cast<int64_t>(data_.size()); }
    bool empty() const { return data_.empty(); }

    float* data() { return data_.data(); }
    const float* data() const { return data_.data(); }

    float& operator[](int64_t i) { return data_[static_cast<size_t>(i)]; }
    float operator[](int64_t i) const { return data_[static_cast<size_t>(i)]; }

    bool same_shape(const NdArray& other) const { return shape_ == other.shape_; }
    bool all_finite() const;
    void fill(float v);
    void add_inplace(const NdArray& other);   // shapes must match
    void scale_inplace(float c);

    std::string shape_str() const;

    static int64_t numel(const std::vector<int>& shape);

private:
    std::vector<int> shape_;
    std::vector<float> data_;
};

} // namespace anomorph
