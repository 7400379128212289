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

// Neural-network primitives with explicit forward/backward passes.
//
// Everything is templated on the scalar type: training and sampling run in
// float, while the finite-difference gradient tests instantiate the same
// code in double. Activations use the channels-last layout: a video volume
// is a (F*H*W, C) matrix whose rows are pixel channel vectors. Forward
// passes write what the backward pass needs into caller-owned cache
// structs, so a model with frozen parameters has no hidden mutable state
// and inference is reentrant.

#include <cmath>
#include <string>
#include <vector>

#include "core/gemm.hpp"
#include "core/rng.hpp"
#include "core/tensor.hpp"

namespace gaitdiff::nn {

template <typename S>
struct ParamT {
    TensorT<S> value;
    TensorT<S> grad;

    void build(std::vector<int64_t> shape) {
        value = TensorT<S>(shape);
        grad = TensorT<S>(std::move(shape));
    }
    void zero_grad() { grad.zero(); }
    int64_t numel() const { return value.numel(); }
};

template <typename S>
struct ParamRef {
    std::string name;
    ParamT<S>* param;
};

template <typename S>
using ParamRefs = std::vector<ParamRef<S>>;

/// Fan-in scaled normal init.
template <typename S>
void init_fan_in(TensorT<S>& w, int64_t fan_in, Rng& rng) {
    const double scale = 1.0 / std::sqrt(static_cast<double>(fan_in));
    for (auto& x : w.v) x = static_cast<S>(rng.normal() * scale);
}

// ---------------------------------------------------------------------------
// Dense / 1x1 projection
// ---------------------------------------------------------------------------

template <typename S>
struct DenseT {
    ParamT<S> w;  // (in, out)
    ParamT<S> b;  // (out)
    int64_t in = 0, out = 0;

    void build(int64_t in_dim, int64_t out_dim, Rng& rng, bool zero_init = false) {
        in = in_dim;
        out = out_dim;
        w.build({in, out});
        b.build({out});
        if (!zero_init) init_fan_in(w.value, in, rng);
    }

    void collect(const std::string& prefix, ParamRefs<S>& refs) {
        refs.push_back({prefix + ".w", &w});
        refs.push_back({prefix + ".b", &b});
    }

    void forward(const TensorT<S>& x, TensorT<S>& y) const {
        const int64_t rows = x.rows();
        y = TensorT<S>({rows, out});
        gemm<S>(false, false, rows, out, in, S(1), x.data(), w.value.data(), S(0), y.data());
        for (int64_t r = 0; r < rows; ++r) {
            S* yr = y.data() + r * out;
            for (int64_t c = 0; c < out; ++c) yr[c] += b.value[c];
        }
    }

    /// dx may alias nothing; pass accumulate=true to add into dx.
    void backward(const TensorT<S>& x, const TensorT<S>& dy, TensorT<S>* dx, bool accumulate = false) {
        const int64_t rows = x.rows();
        gemm<S>(true, false, in, out, rows, S(1), x.data(), dy.data(), S(1), w.grad.data());
        for (int64_t r = 0; r < rows; ++r) {
            const S* dyr = dy.data() + r * out;
            for (int64_t c = 0; c < out; ++c) b.grad[c] += dyr[c];
        }
        if (dx) {
            if (!accumulate) *dx = TensorT<S>({rows, in});
            gemm<S>(false, true, rows, in, out, S(1), dy.data(), w.value.data(),
                    accumulate ? S(1) : S(0), dx->data());
        }
    }
};

// ---------------------------------------------------------------------------
// Label / identity embedding table
// ---------------------------------------------------------------------------

template <typename S>
struct EmbeddingT {
    ParamT<S> table;  // (count, dim)
    int64_t count = 0, dim = 0;

    void build(int64_t n, int64_t d, Rng& rng, bool zero_init = false) {
        count = n;
        dim = d;
        table.build({n, d});
        if (!zero_init) init_fan_in(table.value, d, rng);
    }

    void collect(const std::string& prefix, ParamRefs<S>& refs) {
        refs.push_back({prefix, &table});
    }

    /// Weighted sum of rows; a one-hot weight vector selects a single row.
    void forward(std::span<const float> weights, TensorT<S>& y) const {
        if (static_cast<int64_t>(weights.size()) != count)
            throw shape_error("embedding: weight length mismatch");
        y = TensorT<S>({dim});
        for (int64_t i = 0; i < count; ++i) {
            if (weights[i] == 0.0f) continue;
            const S wi = static_cast<S>(weights[i]);
            const S* row = table.value.data() + i * dim;
            for (int64_t c = 0; c < dim; ++c) y[c] += wi * row[c];
        }
    }

    void backward(std::span<const float> weights, const TensorT<S>& dy) {
        for (int64_t i = 0; i < count; ++i) {
            if (weights[i] == 0.0f) continue;
            const S wi = static_cast<S>(weights[i]);
            S* grow = table.grad.data() + i * dim;
            for (int64_t c = 0; c < dim; ++c) grow[c] += wi * dy[c];
        }
    }
};

// ---------------------------------------------------------------------------
// Group normalization (normalizes over all positions x group channels of
// one sample)
// ---------------------------------------------------------------------------

template <typename S>
struct GroupNormCacheT {
    std::vector<double> mean, rstd;  // per group
};

template <typename S>
struct GroupNormT {
    ParamT<S> gamma, beta;
    int64_t channels = 0;
    int groups = 1;

    void build(int64_t c, int g) {
        if (g < 1 || c % g != 0) throw shape_error("groupnorm: channels must divide into groups");
        channels = c;
        groups = g;
        gamma.build({c});
        beta.build({c});
        gamma.value.fill(S(1));
    }

    void collect(const std::string& prefix, ParamRefs<S>& refs) {
        refs.push_back({prefix + ".gamma", &gamma});
        refs.push_back({prefix + ".beta", &beta});
    }

    void forward(const TensorT<S>& x, TensorT<S>& y, GroupNormCacheT<S>* cache) const {
        const int64_t rows = x.rows();
        const int64_t cg = channels / groups;
        y = TensorT<S>({rows, channels});
        std::vector<double> mean(groups), rstd(groups);

        for (int g = 0; g < groups; ++g) {
            const int64_t c0 = g * cg;
            double sum = 0, sq = 0;
            for (int64_t r = 0; r < rows; ++r) {
                const S* xr = x.data() + r * channels + c0;
                for (int64_t c = 0; c < cg; ++c) {
                    const double v = static_cast<double>(xr[c]);
                    sum += v;
                    sq += v * v;
                }
            }
            const double n = static_cast<double>(rows * cg);
            const double mu = sum / n;
            const double var = std::max(0.0, sq / n - mu * mu);
            mean[g] = mu;
            rstd[g] = 1.0 / std::sqrt(var + 1e-5);
        }

        for (int64_t r = 0; r < rows; ++r) {
            const S* xr = x.data() + r * channels;
            S* yr = y.data() + r * channels;
            for (int64_t c = 0; c < channels; ++c) {
                const int g = static_cast<int>(c / cg);
                const double xhat = (static_cast<double>(xr[c]) - mean[g]) * rstd[g];
                yr[c] = static_cast<S>(xhat * static_cast<double>(gamma.value[c]) +
                                       static_cast<double>(beta.value[c]));
            }
        }
        if (cache) {
            cache->mean = std::move(mean);
            cache->rstd = std::move(rstd);
        }
    }

    void backward(const TensorT<S>& x, const TensorT<S>& dy, const GroupNormCacheT<S>& cache,
                  TensorT<S>& dx) {
        const int64_t rows = x.rows();
        const int64_t cg = channels / groups;
        dx = TensorT<S>({rows, channels});

        // Per-channel parameter grads.
        for (int64_t r = 0; r < rows; ++r) {
            const S* xr = x.data() + r * channels;
            const S* dyr = dy.data() + r * channels;
            for (int64_t c = 0; c < channels; ++c) {
                const int g = static_cast<int>(c / cg);
                const double xhat = (static_cast<double>(xr[c]) - cache.mean[g]) * cache.rstd[g];
                gamma.grad[c] += static_cast<S>(static_cast<double>(dyr[c]) * xhat);
                beta.grad[c] += dyr[c];
            }
        }

        // dx = rstd * (g - mean(g) - xhat * mean(g*xhat)), g = dy * gamma.
        for (int g = 0; g < groups; ++g) {
            const int64_t c0 = g * cg;
            const double n = static_cast<double>(rows * cg);
            double sum_g = 0, sum_gx = 0;
            for (int64_t r = 0; r < rows; ++r) {
                const S* xr = x.data() + r * channels + c0;
                const S* dyr = dy.data() + r * channels + c0;
                for (int64_t c = 0; c < cg; ++c) {
                    const double gv =
                        static_cast<double>(dyr[c]) * static_cast<double>(gamma.value[c0 + c]);
                    const double xhat = (static_cast<double>(xr[c]) - cache.mean[g]) * cache.rstd[g];
                    sum_g += gv;
                    sum_gx += gv * xhat;
                }
            }
            const double mg = sum_g / n;
            const double mgx = sum_gx / n;
            for (int64_t r = 0; r < rows; ++r) {
                const S* xr = x.data() + r * channels + c0;
                const S* dyr = dy.data() + r * channels + c0;
                S* dxr = dx.data() + r * channels + c0;
                for (int64_t c = 0; c < cg; ++c) {
                    const double gv =
                        static_cast<double>(dyr[c]) * static_cast<double>(gamma.value[c0 + c]);
                    const double xhat = (static_cast<double>(xr[c]) - cache.mean[g]) * cache.rstd[g];
                    dxr[c] = static_cast<S>(cache.rstd[g] * (gv - mg - xhat * mgx));
                }
            }
        }
    }
};

// ---------------------------------------------------------------------------
// SiLU
// ---------------------------------------------------------------------------

template <typename S>
void silu_forward(const TensorT<S>& x, TensorT<S>& y) {
    y = TensorT<S>(x.shape);
#pragma omp parallel for schedule(static)
    for (int64_t i = 0; i < x.numel(); ++i) {
        const double v = static_cast<double>(x[i]);
        y[i] = static_cast<S>(v / (1.0 + std::exp(-v)));
    }
}

template <typename S>
void silu_backward(const TensorT<S>& x, const TensorT<S>& dy, TensorT<S>& dx) {
    dx = TensorT<S>(x.shape);
#pragma omp parallel for schedule(static)
    for (int64_t i = 0; i < x.numel(); ++i) {
        const double v = static_cast<double>(x[i]);
        const double sig = 1.0 / (1.0 + std::exp(-v));
        dx[i] = static_cast<S>(static_cast<double>(dy[i]) * sig * (1.0 + v * (1.0 - sig)));
    }
}

// ---------------------------------------------------------------------------
// Spatial 3x3 convolution applied per frame (stride 1 same-size, or
// stride 2 halving). Weights are stored as (9*Cin, Cout) matching the
// im2col column order (ky, kx, cin).
// ---------------------------------------------------------------------------

template <typename S>
struct Conv3x3T {
    ParamT<S> w;  // (9*Cin, Cout)
    ParamT<S> b;  // (Cout)
    int64_t cin = 0, cout = 0;
    int stride = 1;

    void build(int64_t in_ch, int64_t out_ch, int stride_, Rng& rng, bool zero_init = false) {
        cin = in_ch;
        cout = out_ch;
        stride = stride_;
        w.build({9 * cin, cout});
        b.build({cout});
        if (!zero_init) init_fan_in(w.value, 9 * cin, rng);
    }

    void collect(const std::string& prefix, ParamRefs<S>& refs) {
        refs.push_back({prefix + ".w", &w});
        refs.push_back({prefix + ".b", &b});
    }

    int64_t out_h(int64_t h) const { return stride == 1 ? h : h / 2; }
    int64_t out_w(int64_t w_) const { return stride == 1 ? w_ : w_ / 2; }

    /// x: (F*H*W, Cin); y: (F*OH*OW, Cout).
    void forward(const TensorT<S>& x, int64_t frames, int64_t h, int64_t w_, TensorT<S>& y) const {
        const int64_t oh = out_h(h), ow = out_w(w_);
        TensorT<S> col;
        im2col(x, frames, h, w_, col);
        y = TensorT<S>({frames * oh * ow, cout});
        gemm<S>(false, false, col.rows(), cout, 9 * cin, S(1), col.data(), w.value.data(), S(0),
                y.data());
        const int64_t rows = y.rows();
#pragma omp parallel for schedule(static)
        for (int64_t r = 0; r < rows; ++r) {
            S* yr = y.data() + r * cout;
            for (int64_t c = 0; c < cout; ++c) yr[c] += b.value[c];
        }
    }

    void backward(const TensorT<S>& x, int64_t frames, int64_t h, int64_t w_, const TensorT<S>& dy,
                  TensorT<S>* dx) {
        const int64_t oh = out_h(h), ow = out_w(w_);
        const int64_t orows = frames * oh * ow;

        TensorT<S> col;
        im2col(x, frames, h, w_, col);
        gemm<S>(true, false, 9 * cin, cout, orows, S(1), col.data(), dy.data(), S(1), w.grad.data());
        for (int64_t r = 0; r < orows; ++r) {
            const S* dyr = dy.data() + r * cout;
            for (int64_t c = 0; c < cout; ++c) b.grad[c] += dyr[c];
        }

        if (!dx) return;
        TensorT<S> dcol({orows, 9 * cin});
        gemm<S>(false, true, orows, 9 * cin, cout, S(1), dy.data(), w.value.data(), S(0),
                dcol.data());
        col2im(dcol, frames, h, w_, *dx);
    }

  private:
    void im2col(const TensorT<S>& x, int64_t frames, int64_t h, int64_t w_, TensorT<S>& col) const {
        const int64_t oh = out_h(h), ow = out_w(w_);
        col = TensorT<S>({frames * oh * ow, 9 * cin});
#pragma omp parallel for schedule(static) collapse(2)
        for (int64_t f = 0; f < frames; ++f) {
            for (int64_t oy = 0; oy < oh; ++oy) {
                const S* xf = x.data() + f * h * w_ * cin;
                for (int64_t ox = 0; ox < ow; ++ox) {
                    S* row = col.data() + ((f * oh + oy) * ow + ox) * 9 * cin;
                    const int64_t iy0 = stride * oy - 1;
                    const int64_t ix0 = stride * ox - 1;
                    for (int64_t ky = 0; ky < 3; ++ky) {
                        const int64_t iy = iy0 + ky;
                        S* dst = row + ky * 3 * cin;
                        if (iy < 0 || iy >= h) {
                            std::fill(dst, dst + 3 * cin, S(0));
                            continue;
                        }
                        for (int64_t kx = 0; kx < 3; ++kx) {
                            const int64_t ix = ix0 + kx;
                            if (ix < 0 || ix >= w_) {
                                std::fill(dst + kx * cin, dst + (kx + 1) * cin, S(0));
                            } else {
                                const S* src = xf + (iy * w_ + ix) * cin;
                                std::copy(src, src + cin, dst + kx * cin);
                            }
                        }
                    }
                }
            }
        }
    }

    /// Gather formulation (race-free): each input pixel sums the patch
    /// entries of every output position that read it.
    void col2im(const TensorT<S>& dcol, int64_t frames, int64_t h, int64_t w_, TensorT<S>& dx) const {
        const int64_t oh = out_h(h), ow = out_w(w_);
        dx = TensorT<S>({frames * h * w_, cin});
#pragma omp parallel for schedule(static) collapse(2)
        for (int64_t f = 0; f < frames; ++f) {
            for (int64_t y = 0; y < h; ++y) {
                for (int64_t x_ = 0; x_ < w_; ++x_) {
                    S* out = dx.data() + ((f * h + y) * w_ + x_) * cin;
                    for (int64_t ky = 0; ky < 3; ++ky) {
                        const int64_t ny = y - ky + 1;
                        if (ny < 0 || ny % stride != 0) continue;
                        const int64_t oy = ny / stride;
                        if (oy >= oh) continue;
                        for (int64_t kx = 0; kx < 3; ++kx) {
                            const int64_t nx = x_ - kx + 1;
                            if (nx < 0 || nx % stride != 0) continue;
                            const int64_t ox = nx / stride;
                            if (ox >= ow) continue;
                            const S* src =
                                dcol.data() + ((f * oh + oy) * ow + ox) * 9 * cin + (ky * 3 + kx) * cin;
                            for (int64_t c = 0; c < cin; ++c) out[c] += src[c];
                        }
                    }
                }
            }
        }
    }
};

// ---------------------------------------------------------------------------
// Nearest-neighbour 2x spatial upsampling (parameter-free)
// ---------------------------------------------------------------------------

template <typename S>
void upsample2x_forward(const TensorT<S>& x, int64_t frames, int64_t h, int64_t w_, int64_t c,
                        TensorT<S>& y) {
    y = TensorT<S>({frames * 2 * h * 2 * w_, c});
#pragma omp parallel for schedule(static) collapse(2)
    for (int64_t f = 0; f < frames; ++f) {
        for (int64_t oy = 0; oy < 2 * h; ++oy) {
            const int64_t iy = oy / 2;
            for (int64_t ox = 0; ox < 2 * w_; ++ox) {
                const S* src = x.data() + ((f * h + iy) * w_ + ox / 2) * c;
                S* dst = y.data() + ((f * 2 * h + oy) * 2 * w_ + ox) * c;
                std::copy(src, src + c, dst);
            }
        }
    }
}

template <typename S>
void upsample2x_backward(const TensorT<S>& dy, int64_t frames, int64_t h, int64_t w_, int64_t c,
                         TensorT<S>& dx) {
    dx = TensorT<S>({frames * h * w_, c});
#pragma omp parallel for schedule(static) collapse(2)
    for (int64_t f = 0; f < frames; ++f) {
        for (int64_t iy = 0; iy < h; ++iy) {
            for (int64_t ix = 0; ix < w_; ++ix) {
                S* out = dx.data() + ((f * h + iy) * w_ + ix) * c;
                for (int64_t sy = 0; sy < 2; ++sy) {
                    for (int64_t sx = 0; sx < 2; ++sx) {
                        const S* src =
                            dy.data() + ((f * 2 * h + 2 * iy + sy) * 2 * w_ + 2 * ix + sx) * c;
                        for (int64_t k = 0; k < c; ++k) out[k] += src[k];
                    }
                }
            }
        }
    }
}

// ---------------------------------------------------------------------------
// (F, P, C) <-> (P, F, C) permutation, used to run the shared attention
// kernel over temporal token sequences.
// ---------------------------------------------------------------------------

template <typename S>
void transpose_fp(const TensorT<S>& x, int64_t frames, int64_t positions, int64_t c, TensorT<S>& y) {
    y = TensorT<S>({positions * frames, c});
#pragma omp parallel for schedule(static)
    for (int64_t f = 0; f < frames; ++f) {
        for (int64_t p = 0; p < positions; ++p) {
            const S* src = x.data() + (f * positions + p) * c;
            S* dst = y.data() + (p * frames + f) * c;
            std::copy(src, src + c, dst);
        }
    }
}

// ---------------------------------------------------------------------------
// Multi-head self-attention over a batch of token sequences, with
// pre-normalization and a residual connection:
//   y = x + W_out * attend(W_qkv * groupnorm(x))
// Softmax score matrices are recomputed in the backward pass instead of
// cached; at volume scale they dominate memory otherwise.
// ---------------------------------------------------------------------------

template <typename S>
struct AttentionCacheT {
    GroupNormCacheT<S> gn;
    TensorT<S> normed;  // (rows, C)
    TensorT<S> qkv;     // (rows, 3C)
    TensorT<S> heads;   // (rows, C), concatenated head outputs
};

template <typename S>
struct AttentionT {
    GroupNormT<S> norm;
    DenseT<S> qkv;  // C -> 3C
    DenseT<S> out;  // C -> C
    int64_t channels = 0;
    int heads = 1;

    void build(int64_t c, int n_heads, int norm_groups, Rng& rng) {
        if (n_heads < 1 || c % n_heads != 0) throw shape_error("attention: heads must divide channels");
        channels = c;
        heads = n_heads;
        norm.build(c, norm_groups);
        qkv.build(c, 3 * c, rng);
        out.build(c, c, rng);
    }

    void collect(const std::string& prefix, ParamRefs<S>& refs) {
        norm.collect(prefix + ".norm", refs);
        qkv.collect(prefix + ".qkv", refs);
        out.collect(prefix + ".out", refs);
    }

    /// x: (nseq*tokens, C) viewed as nseq independent sequences.
    void forward(const TensorT<S>& x, int64_t nseq, int64_t tokens, TensorT<S>& y,
                 AttentionCacheT<S>* cache) const {
        AttentionCacheT<S> local;
        AttentionCacheT<S>& cc = cache ? *cache : local;

        norm.forward(x, cc.normed, &cc.gn);
        qkv.forward(cc.normed, cc.qkv);

        const int64_t dh = channels / heads;
        TensorT<S> qp, kp, vp;
        pack_heads(cc.qkv, nseq, tokens, 0, qp);
        pack_heads(cc.qkv, nseq, tokens, 1, kp);
        pack_heads(cc.qkv, nseq, tokens, 2, vp);

        TensorT<S> op({nseq * heads * tokens, dh});
        const int64_t blocks = nseq * heads;
#pragma omp parallel for schedule(static)
        for (int64_t blk = 0; blk < blocks; ++blk) {
            EigenRowMat<S> att = scores(qp, kp, blk, tokens, dh);
            softmax_rows(att);
            MapRM<S> o(op.data() + blk * tokens * dh, tokens, dh);
            CMapRM<S> v(vp.data() + blk * tokens * dh, tokens, dh);
            o.noalias() = att * v;
        }

        unpack_heads(op, nseq, tokens, cc.heads);
        TensorT<S> proj;
        out.forward(cc.heads, proj);
        y = TensorT<S>({nseq * tokens, channels});
#pragma omp parallel for schedule(static)
        for (int64_t i = 0; i < y.numel(); ++i) y[i] = x[i] + proj[i];
    }

    void backward(const TensorT<S>& x, int64_t nseq, int64_t tokens, const TensorT<S>& dy,
                  const AttentionCacheT<S>& cc, TensorT<S>& dx) {
        TensorT<S> dheads;
        out.backward(cc.heads, dy, &dheads);

        const int64_t dh = channels / heads;
        TensorT<S> qp, kp, vp, dop;
        pack_heads(cc.qkv, nseq, tokens, 0, qp);
        pack_heads(cc.qkv, nseq, tokens, 1, kp);
        pack_heads(cc.qkv, nseq, tokens, 2, vp);
        pack_heads_single(dheads, nseq, tokens, dop);

        TensorT<S> dqp({nseq * heads * tokens, dh});
        TensorT<S> dkp({nseq * heads * tokens, dh});
        TensorT<S> dvp({nseq * heads * tokens, dh});
        const int64_t blocks = nseq * heads;
        const S scale = static_cast<S>(1.0 / std::sqrt(static_cast<double>(dh)));

#pragma omp parallel for schedule(static)
        for (int64_t blk = 0; blk < blocks; ++blk) {
            // Scores are recomputed rather than cached.
            EigenRowMat<S> att = scores(qp, kp, blk, tokens, dh);
            softmax_rows(att);

            CMapRM<S> q(qp.data() + blk * tokens * dh, tokens, dh);
            CMapRM<S> k(kp.data() + blk * tokens * dh, tokens, dh);
            CMapRM<S> v(vp.data() + blk * tokens * dh, tokens, dh);
            CMapRM<S> dov(dop.data() + blk * tokens * dh, tokens, dh);
            MapRM<S> dq(dqp.data() + blk * tokens * dh, tokens, dh);
            MapRM<S> dk(dkp.data() + blk * tokens * dh, tokens, dh);
            MapRM<S> dv(dvp.data() + blk * tokens * dh, tokens, dh);

            dv.noalias() = att.transpose() * dov;
            EigenRowMat<S> datt = dov * v.transpose();
            // Softmax backward: dS = A .* (dA - rowsum(dA .* A)).
            for (int64_t i = 0; i < tokens; ++i) {
                const S dot = (datt.row(i).array() * att.row(i).array()).sum();
                datt.row(i) = (att.row(i).array() * (datt.row(i).array() - dot)).matrix() * scale;
            }
            dq.noalias() = datt * k;
            dk.noalias() = datt.transpose() * q;
        }

        TensorT<S> dqkv({nseq * tokens, 3 * channels});
        unpack_heads_into(dqp, nseq, tokens, 0, dqkv);
        unpack_heads_into(dkp, nseq, tokens, 1, dqkv);
        unpack_heads_into(dvp, nseq, tokens, 2, dqkv);

        TensorT<S> dnormed;
        qkv.backward(cc.normed, dqkv, &dnormed);
        norm.backward(x, dnormed, cc.gn, dx);
#pragma omp parallel for schedule(static)
        for (int64_t i = 0; i < dx.numel(); ++i) dx[i] += dy[i];  // residual path
    }

  private:
    /// (rows, 3C) -> head-major (nseq*heads, tokens, dh) for one of q/k/v.
    void pack_heads(const TensorT<S>& qkv_act, int64_t nseq, int64_t tokens, int which,
                    TensorT<S>& packed) const {
        const int64_t dh = channels / heads;
        packed = TensorT<S>({nseq * heads * tokens, dh});
#pragma omp parallel for schedule(static)
        for (int64_t s = 0; s < nseq; ++s) {
            for (int h = 0; h < heads; ++h) {
                for (int64_t tkn = 0; tkn < tokens; ++tkn) {
                    const S* src =
                        qkv_act.data() + (s * tokens + tkn) * 3 * channels + which * channels + h * dh;
                    S* dst = packed.data() + ((s * heads + h) * tokens + tkn) * dh;
                    std::copy(src, src + dh, dst);
                }
            }
        }
    }

    void pack_heads_single(const TensorT<S>& act, int64_t nseq, int64_t tokens,
                           TensorT<S>& packed) const {
        const int64_t dh = channels / heads;
        packed = TensorT<S>({nseq * heads * tokens, dh});
#pragma omp parallel for schedule(static)
        for (int64_t s = 0; s < nseq; ++s) {
            for (int h = 0; h < heads; ++h) {
                for (int64_t tkn = 0; tkn < tokens; ++tkn) {
                    const S* src = act.data() + (s * tokens + tkn) * channels + h * dh;
                    S* dst = packed.data() + ((s * heads + h) * tokens + tkn) * dh;
                    std::copy(src, src + dh, dst);
                }
            }
        }
    }

    void unpack_heads(const TensorT<S>& packed, int64_t nseq, int64_t tokens, TensorT<S>& act) const {
        const int64_t dh = channels / heads;
        act = TensorT<S>({nseq * tokens, channels});
#pragma omp parallel for schedule(static)
        for (int64_t s = 0; s < nseq; ++s) {
            for (int h = 0; h < heads; ++h) {
                for (int64_t tkn = 0; tkn < tokens; ++tkn) {
                    const S* src = packed.data() + ((s * heads + h) * tokens + tkn) * dh;
                    S* dst = act.data() + (s * tokens + tkn) * channels + h * dh;
                    std::copy(src, src + dh, dst);
                }
            }
        }
    }

    void unpack_heads_into(const TensorT<S>& packed, int64_t nseq, int64_t tokens, int which,
                           TensorT<S>& qkv_grad) const {
        const int64_t dh = channels / heads;
#pragma omp parallel for schedule(static)
        for (int64_t s = 0; s < nseq; ++s) {
            for (int h = 0; h < heads; ++h) {
                for (int64_t tkn = 0; tkn < tokens; ++tkn) {
                    const S* src = packed.data() + ((s * heads + h) * tokens + tkn) * dh;
                    S* dst =
                        qkv_grad.data() + (s * tokens + tkn) * 3 * channels + which * channels + h * dh;
                    std::copy(src, src + dh, dst);
                }
            }
        }
    }

    EigenRowMat<S> scores(const TensorT<S>& qp, const TensorT<S>& kp, int64_t blk, int64_t tokens,
                          int64_t dh) const {
        CMapRM<S> q(qp.data() + blk * tokens * dh, tokens, dh);
        CMapRM<S> k(kp.data() + blk * tokens * dh, tokens, dh);
        const S scale = static_cast<S>(1.0 / std::sqrt(static_cast<double>(dh)));
        return (q * k.transpose()) * scale;
    }

    static void softmax_rows(EigenRowMat<S>& m) {
        for (int64_t i = 0; i < m.rows(); ++i) {
            auto row = m.row(i);
            const S mx = row.maxCoeff();
            row = (row.array() - mx).exp();
            row /= row.sum();
        }
    }
};

// ---------------------------------------------------------------------------
// Misc helpers
// ---------------------------------------------------------------------------

/// y[r, c] += v[c] for every row.
template <typename S>
void add_row_broadcast(TensorT<S>& y, const TensorT<S>& v) {
    const int64_t c = y.cols();
    if (v.numel() != c) throw shape_error("broadcast add: channel mismatch");
    const int64_t rows = y.rows();
#pragma omp parallel for schedule(static)
    for (int64_t r = 0; r < rows; ++r) {
        S* yr = y.data() + r * c;
        for (int64_t k = 0; k < c; ++k) yr[k] += v[k];
    }
}

/// dv[c] += sum_r dy[r, c].
template <typename S>
void reduce_rows(const TensorT<S>& dy, TensorT<S>& dv) {
    const int64_t c = dy.cols();
    const int64_t rows = dy.rows();
    for (int64_t r = 0; r < rows; ++r) {
        const S* dyr = dy.data() + r * c;
        for (int64_t k = 0; k < c; ++k) dv[k] += dyr[k];
    }
}

/// Concatenate two channels-last tensors along the channel axis.
template <typename S>
void concat_channels(const TensorT<S>& a, const TensorT<S>& b, TensorT<S>& y) {
    const int64_t rows = a.rows();
    if (b.rows() != rows) throw shape_error("concat: row mismatch");
    const int64_t ca = a.cols(), cb = b.cols();
    y = TensorT<S>({rows, ca + cb});
#pragma omp parallel for schedule(static)
    for (int64_t r = 0; r < rows; ++r) {
        std::copy(a.data() + r * ca, a.data() + (r + 1) * ca, y.data() + r * (ca + cb));
        std::copy(b.data() + r * cb, b.data() + (r + 1) * cb, y.data() + r * (ca + cb) + ca);
    }
}

template <typename S>
void split_channels(const TensorT<S>& dy, TensorT<S>& da, TensorT<S>& db, int64_t ca, int64_t cb) {
    const int64_t rows = dy.rows();
    da = TensorT<S>({rows, ca});
    db = TensorT<S>({rows, cb});
#pragma omp parallel for schedule(static)
    for (int64_t r = 0; r < rows; ++r) {
        const S* src = dy.data() + r * (ca + cb);
        std::copy(src, src + ca, da.data() + r * ca);
        std::copy(src + ca, src + ca + cb, db.data() + r * cb);
    }
}

/// Sinusoidal position encoding of an integer timestep, computed in double.
template <typename S>
TensorT<S> sinusoidal_embedding(int t, int64_t dim) {
    TensorT<S> out({dim});
    const int64_t half = dim / 2;
    for (int64_t i = 0; i < half; ++i) {
        const double freq =
            std::exp(-std::log(10000.0) * static_cast<double>(i) / std::max<int64_t>(1, half - 1));
        out[i] = static_cast<S>(std::sin(t * freq));
        out[half + i] = static_cast<S>(std::cos(t * freq));
    }
    if (dim % 2 == 1) out[dim - 1] = S(0);
    return out;
}

}  // namespace gaitdiff::nn
