#pragma once

#include <cassert>
#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "genint/errors.hpp"

namespace genint {

using Shape = std::vector<int64_t>;

inline std::string shape_str(const Shape& s) {
    std::ostringstream os;
    os << "[";
    for (size_t i = 0; i < s.size(); ++i) os << (i ? "," : "") << s[i];
    os << "]";
    return os.str();
}

inline int64_t shape_numel(const Shape& s) {
    int64_t n = 1;
    for (int64_t d : s) {
        if (d < 0) throw DimensionError("negative dimension in shape " + shape_str(s));
        n *= d;
    }
    return n;
}

// Dense row-major tensor of 32-bit reals. The one numeric carrier used by
// every module; a 0-dim shape holds a single scalar.
class Tensor {
public:
    Tensor() = default;

    explicit Tensor(Shape shape) : shape_(std::move(shape)), data_(static_cast<size_t>(shape_numel(shape_)), 0.0f) {}

    Tensor(Shape shape, std::vector<float> data) : shape_(std::move(shape)), data_(std::move(data)) {
        if (shape_numel(shape_) != static_cast<int64_t>(data_.size()))
            throw DimensionError("shape " + shape_str(shape_) + " does not match data length " +
                                 std::to_string(data_.size()));
    }

    static Tensor zeros(Shape shape) { return Tensor(std::move(shape)); }

    static Tensor full(Shape shape, float v) {
        Tensor t(std::move(shape));
        for (auto& x : t.data_) x = v;
        return t;
    }

    static Tensor scalar(float v) { return Tensor(Shape{}, {v}); }

    static Tensor row(std::initializer_list<float> vals) {
        return Tensor(Shape{1, static_cast<int64_t>(vals.size())}, std::vector<float>(vals));
    }

    static Tensor vec(std::vector<float> vals) {
        auto n = static_cast<int64_t>(vals.size());
        return Tensor(Shape{n}, std::move(vals));
    }

    const Shape& shape() const { return shape_; }
    size_t ndim() const { return shape_.size(); }
    int64_t dim(size_t i) const { return shape_.at(i); }
    int64_t numel() const { return static_cast<int64_t>(data_.size()); }
    bool empty() const { return data_.empty(); }

    // Leading dimension / trailing flattened size for matrix-style access.
    int64_t rows() const { return shape_.empty() ? 1 : shape_[0]; }
    int64_t cols() const {
        int64_t c = 1;
        for (size_t i = 1; i < shape_.size(); ++i) c *= shape_[i];
        return c;
    }

    float* data() { return data_.data(); }
    const float* data() const { return data_.data(); }
    std::vector<float>& storage() { return data_; }
    const std::vector<float>& storage() const { return data_; }

    float& operator[](int64_t i) {
        assert(i >= 0 && i < numel());
        return data_[static_cast<size_t>(i)];
    }
    float operator[](int64_t i) const {
        assert(i >= 0 && i < numel());
        return data_[static_cast<size_t>(i)];
    }

    float& at2(int64_t i, int64_t j) {
        assert(ndim() >= 2);
        return data_[static_cast<size_t>(i * cols() + j)];
    }
    float at2(int64_t i, int64_t j) const {
        assert(ndim() >= 2);
        return data_[static_cast<size_t>(i * cols() + j)];
    }

    bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }

    Tensor reshaped(Shape shape) const {
        if (shape_numel(shape) != numel())
            throw DimensionError("cannot reshape " + shape_str(shape_) + " (numel " + std::to_string(numel()) +
                                 ") to " + shape_str(shape));
        return Tensor(std::move(shape), data_);
    }

    bool all_finite() const {
        for (float v : data_)
            if (!std::isfinite(v)) return false;
        return true;
    }

private:
    Shape shape_;
    std::vector<float> data_;
};

inline void require_same_shape(const Tensor& a, const Tensor& b, const char* what) {
    if (!a.same_shape(b))
        throw DimensionError(std::string(what) + ": shape mismatch " + shape_str(a.shape()) + " vs " +
                             shape_str(b.shape()));
}

}  // namespace genint
