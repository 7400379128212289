// This file is part of the gaitdiff project, a silhouette-domain video
// diffusion toolkit for gait sequence synthesis and evaluation.
//
// Copyright 2026 the gaitdiff authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <vector>

#include "core/errors.hpp"

namespace gaitdiff {

/// Dense row-major tensor. Video activations use the channels-last layout
/// (frames, positions, channels): the innermost dimension is the channel
/// vector of one pixel, which keeps conv patch gathers, attention token
/// rows and per-channel broadcasts contiguous.
template <typename S>
struct TensorT {
    std::vector<S> v;
    std::vector<int64_t> shape;

    TensorT() = default;
    explicit TensorT(std::vector<int64_t> s) : shape(std::move(s)) { v.assign(numel_of(shape), S(0)); }

    static TensorT zeros(std::vector<int64_t> s) { return TensorT(std::move(s)); }

    static int64_t numel_of(const std::vector<int64_t>& s) {
        int64_t n = 1;
        for (int64_t d : s) n *= d;
        return n;
    }

    int64_t numel() const { return static_cast<int64_t>(v.size()); }
    bool empty() const { return v.empty(); }

    int64_t dim(size_t i) const { return shape.at(i); }
    size_t rank() const { return shape.size(); }

    /// 2-D view: all leading dimensions flattened into rows, the trailing
    /// dimension as columns.
    int64_t cols() const { return shape.empty() ? 0 : shape.back(); }
    int64_t rows() const { return cols() == 0 ? 0 : numel() / cols(); }

    S* data() { return v.data(); }
    const S* data() const { return v.data(); }
    std::span<S> span() { return {v.data(), v.size()}; }
    std::span<const S> span() const { return {v.data(), v.size()}; }

    S& operator[](int64_t i) { return v[static_cast<size_t>(i)]; }
    const S& operator[](int64_t i) const { return v[static_cast<size_t>(i)]; }

    void fill(S x) { std::fill(v.begin(), v.end(), x); }
    void zero() { fill(S(0)); }

    /// Reinterprets the shape without touching data.
    TensorT& reshape(std::vector<int64_t> s) {
        if (numel_of(s) != numel()) throw shape_error("reshape: element count mismatch");
        shape = std::move(s);
        return *this;
    }

    bool same_shape(const TensorT& o) const { return shape == o.shape; }

    bool all_finite() const {
        for (const S& x : v)
            if (!std::isfinite(static_cast<double>(x))) return false;
        return true;
    }

    template <typename T>
    TensorT<T> cast() const {
        TensorT<T> out(shape);
        for (size_t i = 0; i < v.size(); ++i) out.v[i] = static_cast<T>(v[i]);
        return out;
    }
};

using Tensor = TensorT<float>;
using DTensor = TensorT<double>;

template <typename S>
void add_inplace(TensorT<S>& a, const TensorT<S>& b) {
    if (!a.same_shape(b)) throw shape_error("add: shape mismatch");
    for (int64_t i = 0; i < a.numel(); ++i) a[i] += b[i];
}

template <typename S>
double max_abs_diff(const TensorT<S>& a, const TensorT<S>& b) {
    if (!a.same_shape(b)) throw shape_error("max_abs_diff: shape mismatch");
    double m = 0;
    for (int64_t i = 0; i < a.numel(); ++i)
        m = std::max(m, std::abs(static_cast<double>(a[i]) - static_cast<double>(b[i])));
    return m;
}

/// Mean of squared entries, accumulated in double.
template <typename S>
double mean_square(const TensorT<S>& a) {
    double s = 0;
    for (int64_t i = 0; i < a.numel(); ++i) {
        const double x = static_cast<double>(a[i]);
        s += x * x;
    }
    return a.numel() ? s / static_cast<double>(a.numel()) : 0.0;
}

}  // namespace gaitdiff
