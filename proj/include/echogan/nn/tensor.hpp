#pragma once

#include <algorithm>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "echogan/error.hpp"

namespace echogan::nn {

/// Batch/channel/height/width extents of a dense NCHW tensor.
struct Shape {
    int n = 0;
    int c = 0;
    int h = 0;
    int w = 0;

    std::size_t size() const noexcept {
        return static_cast<std::size_t>(n) * c * h * w;
    }
    std::size_t sample_size() const noexcept {
        return static_cast<std::size_t>(c) * h * w;
    }
    std::size_t plane_size() const noexcept { return static_cast<std::size_t>(h) * w; }

    bool operator==(const Shape&) const = default;

    std::string to_string() const {
        return "(" + std::to_string(n) + "," + std::to_string(c) + "," + std::to_string(h) +
               "," + std::to_string(w) + ")";
    }
};

/// Dense row-major NCHW tensor with value semantics.
template <typename T>
class BasicTensor {
public:
    using value_type = T;

    BasicTensor() = default;
    explicit BasicTensor(Shape shape, T fill = T{})
        : shape_(shape), data_(checked_size(shape), fill) {}
    BasicTensor(Shape shape, std::vector<T> values) : shape_(shape), data_(std::move(values)) {
        if (data_.size() != checked_size(shape)) {
            throw ShapeError("tensor data size " + std::to_string(data_.size()) +
                             " does not match shape " + shape.to_string());
        }
    }

    const Shape& shape() const noexcept { return shape_; }
    std::size_t size() const noexcept { return data_.size(); }
    bool empty() const noexcept { return data_.empty(); }

    std::span<T> values() noexcept { return data_; }
    std::span<const T> values() const noexcept { return data_; }
    T* data() noexcept { return data_.data(); }
    const T* data() const noexcept { return data_.data(); }

    T* sample(int n) noexcept { return data_.data() + n * shape_.sample_size(); }
    const T* sample(int n) const noexcept { return data_.data() + n * shape_.sample_size(); }

    T* plane(int n, int c) noexcept {
        return data_.data() + (static_cast<std::size_t>(n) * shape_.c + c) * shape_.plane_size();
    }
    const T* plane(int n, int c) const noexcept {
        return data_.data() + (static_cast<std::size_t>(n) * shape_.c + c) * shape_.plane_size();
    }

    T& at(int n, int c, int h, int w) noexcept { return plane(n, c)[h * shape_.w + w]; }
    const T& at(int n, int c, int h, int w) const noexcept {
        return plane(n, c)[h * shape_.w + w];
    }

    T& operator[](std::size_t i) noexcept { return data_[i]; }
    const T& operator[](std::size_t i) const noexcept { return data_[i]; }

    void fill(T value) { std::fill(data_.begin(), data_.end(), value); }

    bool operator==(const BasicTensor&) const = default;

private:
    static std::size_t checked_size(const Shape& s) {
        if (s.n < 0 || s.c < 0 || s.h < 0 || s.w < 0) {
            throw ShapeError("negative extent in shape " + s.to_string());
        }
        return s.size();
    }

    Shape shape_{};
    std::vector<T> data_;
};

using Tensor = BasicTensor<float>;

/// Stacks `first` and `second` along the channel axis (first's channels come first).
template <typename T>
BasicTensor<T> concat_channels(const BasicTensor<T>& first, const BasicTensor<T>& second) {
    const Shape& a = first.shape();
    const Shape& b = second.shape();
    if (a.n != b.n || a.h != b.h || a.w != b.w) {
        throw ShapeError("cannot concatenate " + a.to_string() + " and " + b.to_string());
    }
    BasicTensor<T> out(Shape{a.n, a.c + b.c, a.h, a.w});
    for (int n = 0; n < a.n; ++n) {
        std::copy_n(first.sample(n), a.sample_size(), out.sample(n));
        std::copy_n(second.sample(n), b.sample_size(), out.sample(n) + a.sample_size());
    }
    return out;
}

template <typename T>
BasicTensor<T> slice_channels(const BasicTensor<T>& t, int begin, int count) {
    const Shape& s = t.shape();
    if (begin < 0 || count < 0 || begin + count > s.c) {
        throw ShapeError("channel slice out of range for " + s.to_string());
    }
    BasicTensor<T> out(Shape{s.n, count, s.h, s.w});
    for (int n = 0; n < s.n; ++n) {
        std::copy_n(t.plane(n, begin), out.shape().sample_size(), out.sample(n));
    }
    return out;
}

/// Copies sample `index` into a batch-of-one tensor.
template <typename T>
BasicTensor<T> take_sample(const BasicTensor<T>& t, int index) {
    const Shape& s = t.shape();
    BasicTensor<T> out(Shape{1, s.c, s.h, s.w});
    std::copy_n(t.sample(index), s.sample_size(), out.data());
    return out;
}

}  // namespace echogan::nn
