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

#include <Eigen/Dense>

namespace gaitdiff {

template <typename S>
using EigenRowMat = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

template <typename S>
using MapRM = Eigen::Map<EigenRowMat<S>>;
template <typename S>
using CMapRM = Eigen::Map<const EigenRowMat<S>>;

/// C(m,n) = alpha * op(A) * op(B) + beta * C, row-major buffers.
/// op(A) is A (m,k) or A^T of a stored (k,m) when ta is set; same for B.
/// All network matmuls route through here so the backing implementation
/// (Eigen, threaded via OpenMP) is a single swap point.
template <typename S>
void gemm(bool ta, bool tb, int64_t m, int64_t n, int64_t k, S alpha, const S* A, const S* B, S beta,
          S* C) {
    CMapRM<S> a(A, ta ? k : m, ta ? m : k);
    CMapRM<S> b(B, tb ? n : k, tb ? k : n);
    MapRM<S> c(C, m, n);
    if (beta == S(0)) {
        if (!ta && !tb)
            c.noalias() = alpha * (a * b);
        else if (ta && !tb)
            c.noalias() = alpha * (a.transpose() * b);
        else if (!ta && tb)
            c.noalias() = alpha * (a * b.transpose());
        else
            c.noalias() = alpha * (a.transpose() * b.transpose());
    } else {
        if (beta != S(1)) c *= beta;
        if (!ta && !tb)
            c.noalias() += alpha * (a * b);
        else if (ta && !tb)
            c.noalias() += alpha * (a.transpose() * b);
        else if (!ta && tb)
            c.noalias() += alpha * (a * b.transpose());
        else
            c.noalias() += alpha * (a.transpose() * b.transpose());
    }
}

}  // namespace gaitdiff
