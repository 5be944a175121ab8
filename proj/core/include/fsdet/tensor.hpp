// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstddef>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace fsdet {

/// Dense row-major tensor. The published element type is float; double
/// instantiations exist for high-precision gradient checking.
template <class T>
struct TensorT {
    std::vector<int> shape;
    std::vector<T> data;

    TensorT() = default;
    TensorT(std::vector<int> s, std::vector<T> d) : shape(std::move(s)), data(std::move(d)) {
        if (data.size() != count(shape))
            throw std::invalid_argument("tensor: data length does not match shape " +
                                        shape_string());
    }

    static std::size_t count(const std::vector<int>& s) {
        std::size_t n = 1;
        for (int d : s) {
            if (d <= 0) throw std::invalid_argument("tensor: non-positive dimension");
            n *= static_cast<std::size_t>(d);
        }
        return n;
    }

    static TensorT zeros(std::vector<int> s) {
        const std::size_t n = count(s);
        return TensorT(std::move(s), std::vector<T>(n, T(0)));
    }
    static TensorT full(std::vector<int> s, T v) {
        const std::size_t n = count(s);
        return TensorT(std::move(s), std::vector<T>(n, v));
    }
    static TensorT scalar(T v) { return TensorT({1}, {v}); }

    std::size_t numel() const { return data.size(); }
    int rank() const { return static_cast<int>(shape.size()); }

    std::string shape_string() const {
        std::string s = "(";
        for (std::size_t i = 0; i < shape.size(); ++i)
            s += (i ? "," : "") + std::to_string(shape[i]);
        return s + ")";
    }

    bool same_shape(const TensorT& o) const { return shape == o.shape; }

    // 3-d (c, y, x) accessors for CHW feature maps
    T& at3(int c, int y, int x) {
        return data[(static_cast<std::size_t>(c) * shape[1] + y) * shape[2] + x];
    }
    T at3(int c, int y, int x) const {
        return data[(static_cast<std::size_t>(c) * shape[1] + y) * shape[2] + x];
    }

    bool all_finite() const {
        for (T v : data)
            if (!std::isfinite(static_cast<double>(v))) return false;
        return true;
    }

    template <class U>
    TensorT<U> cast() const {
        TensorT<U> out;
        out.shape = shape;
        out.data.reserve(data.size());
        for (T v : data) out.data.push_back(static_cast<U>(v));
        return out;
    }
};

using Tensor = TensorT<float>;

template <class T>
void require_same_shape(const TensorT<T>& a, const TensorT<T>& b, const char* op) {
    if (!a.same_shape(b))
        throw std::invalid_argument(std::string(op) + ": shape mismatch " + a.shape_string() +
                                    " vs " + b.shape_string());
}

}  // namespace fsdet
