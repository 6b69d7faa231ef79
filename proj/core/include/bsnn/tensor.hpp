#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace bsnn {

// Dense row-major N-d array. Single precision everywhere except the
// double-precision gradient verification path.
template <typename T>
struct TensorT {
    std::vector<std::size_t> shape;
    std::vector<T> data;

    TensorT() = default;

    explicit TensorT(std::vector<std::size_t> s, T fill = T(0))
        : shape(std::move(s)) {
        data.assign(count(shape), fill);
    }

    static TensorT from(std::vector<std::size_t> s, std::vector<T> values) {
        if (count(s) != values.size())
            throw std::invalid_argument("tensor data length != shape product");
        TensorT t;
        t.shape = std::move(s);
        t.data = std::move(values);
        return t;
    }

    static std::size_t count(const std::vector<std::size_t>& s) {
        if (s.empty()) throw std::invalid_argument("tensor rank 0");
        std::size_t n = 1;
        for (std::size_t e : s) {
            if (e < 1) throw std::invalid_argument("tensor extent < 1");
            n *= e;
        }
        return n;
    }

    std::size_t size() const { return data.size(); }
    std::size_t rank() const { return shape.size(); }
    std::size_t extent(std::size_t i) const { return shape.at(i); }

    T& operator[](std::size_t i) { return data[i]; }
    const T& operator[](std::size_t i) const { return data[i]; }

    // [a,b,c,d] indexing for the common NCHW case.
    T& at4(std::size_t a, std::size_t b, std::size_t c, std::size_t d) {
        return data[((a * shape[1] + b) * shape[2] + c) * shape[3] + d];
    }
    const T& at4(std::size_t a, std::size_t b, std::size_t c,
                 std::size_t d) const {
        return data[((a * shape[1] + b) * shape[2] + c) * shape[3] + d];
    }

    T& at2(std::size_t a, std::size_t b) { return data[a * shape[1] + b]; }
    const T& at2(std::size_t a, std::size_t b) const {
        return data[a * shape[1] + b];
    }

    bool same_shape(const TensorT& o) const { return shape == o.shape; }

    void fill(T v) { std::fill(data.begin(), data.end(), v); }

    bool all_finite() const {
        for (T v : data)
            if (!std::isfinite(static_cast<double>(v))) return false;
        return true;
    }

    template <typename U>
    TensorT<U> cast() const {
        TensorT<U> r;
        r.shape = shape;
        r.data.resize(data.size());
        for (std::size_t i = 0; i < data.size(); ++i)
            r.data[i] = static_cast<U>(data[i]);
        return r;
    }
};

using Tensor = TensorT<float>;
using DTensor = TensorT<double>;

inline std::string shape_str(const std::vector<std::size_t>& s) {
    std::string r = "[";
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (i) r += ",";
        r += std::to_string(s[i]);
    }
    return r + "]";
}

// Index of the largest element; ties break to the lowest index.
std::size_t argmax_index(const float* v, std::size_t n);

// Reshape [B, ...] to [B, rest] without copying semantics changes.
Tensor flatten2(const Tensor& t);

// value + gradient of identical shape, the training-time parameter carrier
template <typename T>
struct GradPairT {
    TensorT<T> value;
    TensorT<T> grad;

    explicit GradPairT(TensorT<T> v) : value(std::move(v)) {
        grad = TensorT<T>(value.shape, T(0));
    }
    GradPairT() = default;
};

using GradPair = GradPairT<float>;

}  // namespace bsnn
