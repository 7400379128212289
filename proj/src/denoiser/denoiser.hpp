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

// The noise-prediction network: a U-Net over silhouette video volumes.
//
// Architecture (per level i, channel width base_dim * channel_mults[i],
// spatial size (H, W) / 2^i):
//   - stem:      3x3 conv, in_channels -> dims[0]
//   - encoder:   per level, a stride-2 3x3 down conv (levels > 0), then
//                res_blocks_per_level residual blocks, then factorized
//                attention (spatial over H*W per frame followed by temporal
//                over F per pixel) at the two coarsest levels only
//   - decoder:   mirrored; each level above the coarsest concatenates the
//                encoder skip, runs its blocks and attention, and hands
//                upward through nearest-2x upsampling + 3x3 conv
//   - head:      groupnorm -> SiLU -> zero-initialized 3x3 conv back to
//                in_channels, so a fresh model predicts zero noise
//
// Residual block: GN -> SiLU -> conv, plus per-block linear projections of
// the timestep embedding and the identity token broadcast-added per
// channel, then GN -> SiLU -> conv and the residual shortcut (1x1 when the
// width changes). The timestep enters as a sinusoidal encoding of width
// base_dim through a two-layer MLP of width 4*base_dim; the identity token
// has that same width.
//
// Activations are channels-last (F*H*W, C) per sample; batches are
// processed sample by sample, which keeps per-sample outputs independent
// of batch composition by construction.

#include <cstdint>
#include <string>
#include <vector>

#include "conditioning/conditioning.hpp"
#include "core/rng.hpp"
#include "core/tensor.hpp"
#include "nn/layers.hpp"

namespace gaitdiff {

struct DenoiserConfig {
    int base_dim = 64;
    std::vector<int> channel_mults = {1, 2, 4, 8};
    int in_channels = 1;
    int clip_length = 30;
    int frame_h = 64;
    int frame_w = 64;
    int n_ids = 0;
    int n_views = 0;
    int n_covariates = 0;
    int attention_heads = 4;
    int res_blocks_per_level = 2;
    int norm_groups = 8;

    int levels() const { return static_cast<int>(channel_mults.size()); }
    int64_t dim(int level) const { return static_cast<int64_t>(base_dim) * channel_mults[level]; }
    int64_t time_dim() const { return 4 * static_cast<int64_t>(base_dim); }
    int64_t id_dim() const { return time_dim(); }
    /// Attention sits at the two lowest-resolution levels.
    bool attention_at(int level) const { return level >= levels() - 2; }

    /// Throws a config error when the geometry is inconsistent (spatial
    /// size not divisible by 2^(levels-1), groups/heads not dividing the
    /// level widths, empty vocabularies, ...).
    void validate() const;
};

// ---------------------------------------------------------------------------

template <typename S>
struct ResBlockT {
    struct Cache {
        nn::GroupNormCacheT<S> gn1c, gn2c;
        TensorT<S> n1, s1, hmid, n2, s2;
    };

    nn::GroupNormT<S> gn1, gn2;
    nn::Conv3x3T<S> conv1, conv2;
    nn::DenseT<S> temb_proj, id_proj;
    nn::DenseT<S> skip_proj;
    bool has_skip = false;
    int64_t cin = 0, cout = 0;

    void build(int64_t in_ch, int64_t out_ch, int64_t tdim, int64_t idim, int groups, Rng& rng) {
        cin = in_ch;
        cout = out_ch;
        gn1.build(cin, groups);
        gn2.build(cout, groups);
        conv1.build(cin, cout, 1, rng);
        conv2.build(cout, cout, 1, rng);
        temb_proj.build(tdim, cout, rng);
        id_proj.build(idim, cout, rng);
        has_skip = cin != cout;
        if (has_skip) skip_proj.build(cin, cout, rng);
    }

    void collect(const std::string& p, nn::ParamRefs<S>& refs) {
        gn1.collect(p + ".gn1", refs);
        conv1.collect(p + ".conv1", refs);
        temb_proj.collect(p + ".temb", refs);
        id_proj.collect(p + ".idemb", refs);
        gn2.collect(p + ".gn2", refs);
        conv2.collect(p + ".conv2", refs);
        if (has_skip) skip_proj.collect(p + ".skip", refs);
    }

    void forward(const TensorT<S>& x, int64_t frames, int64_t h, int64_t w, const TensorT<S>& temb,
                 const TensorT<S>& id_token, TensorT<S>& y, Cache* cache) const {
        Cache local;
        Cache& c = cache ? *cache : local;

        gn1.forward(x, c.n1, &c.gn1c);
        nn::silu_forward(c.n1, c.s1);
        conv1.forward(c.s1, frames, h, w, c.hmid);

        TensorT<S> tp, ip;
        temb_proj.forward(temb, tp);
        id_proj.forward(id_token, ip);
        tp.reshape({cout});
        ip.reshape({cout});
        nn::add_row_broadcast(c.hmid, tp);
        nn::add_row_broadcast(c.hmid, ip);

        gn2.forward(c.hmid, c.n2, &c.gn2c);
        nn::silu_forward(c.n2, c.s2);
        conv2.forward(c.s2, frames, h, w, y);

        if (has_skip) {
            TensorT<S> sk;
            skip_proj.forward(x, sk);
            add_inplace(y, sk);
        } else {
            add_inplace(y, x);
        }
    }

    void backward(const TensorT<S>& x, int64_t frames, int64_t h, int64_t w, const TensorT<S>& temb,
                  const TensorT<S>& id_token, const TensorT<S>& dy, Cache& c, TensorT<S>& dx,
                  TensorT<S>& dtemb_acc, TensorT<S>& did_acc) {
        TensorT<S> ds2, dn2, dmid, ds1, dn1;
        conv2.backward(c.s2, frames, h, w, dy, &ds2);
        nn::silu_backward(c.n2, ds2, dn2);
        gn2.backward(c.hmid, dn2, c.gn2c, dmid);

        TensorT<S> rsum({int64_t{1}, cout});
        nn::reduce_rows(dmid, rsum.reshape({cout}));
        rsum.reshape({int64_t{1}, cout});
        temb_proj.backward(temb, rsum, &dtemb_acc, /*accumulate=*/true);
        id_proj.backward(id_token, rsum, &did_acc, /*accumulate=*/true);

        conv1.backward(c.s1, frames, h, w, dmid, &ds1);
        nn::silu_backward(c.n1, ds1, dn1);
        gn1.backward(x, dn1, c.gn1c, dx);

        if (has_skip) {
            skip_proj.backward(x, dy, &dx, /*accumulate=*/true);
        } else {
            add_inplace(dx, dy);
        }
    }
};

// ---------------------------------------------------------------------------

template <typename S>
struct UNetT {
    struct EncLevel {
        nn::Conv3x3T<S> down;
        bool has_down = false;
        std::vector<ResBlockT<S>> blocks;
        nn::AttentionT<S> sattn, tattn;
        bool has_attn = false;
    };
    struct DecLevel {
        std::vector<ResBlockT<S>> blocks;
        nn::AttentionT<S> sattn, tattn;
        bool has_attn = false;
        nn::Conv3x3T<S> up;
        bool has_up = false;
    };

    struct LevelCache {
        TensorT<S> down_in;
        std::vector<TensorT<S>> block_in;
        std::vector<typename ResBlockT<S>::Cache> blocks;
        TensorT<S> sattn_in, tattn_in;  // tattn_in is stored permuted (P, F, C)
        nn::AttentionCacheT<S> sattn, tattn;
        TensorT<S> up_conv_in;  // upsampled tensor feeding the up conv
    };

    struct Cache {
        TensorT<S> t_sin, t_h1, t_h1s, temb;
        std::vector<LevelCache> enc, dec;
        std::vector<TensorT<S>> skips;
        TensorT<S> head_in, head_n, head_s;
        nn::GroupNormCacheT<S> head_gnc;
    };

    DenoiserConfig cfg;
    nn::DenseT<S> time_fc1, time_fc2;
    nn::Conv3x3T<S> stem;
    std::vector<EncLevel> enc;
    std::vector<DecLevel> dec;
    nn::GroupNormT<S> head_gn;
    nn::Conv3x3T<S> head_conv;

    void build(const DenoiserConfig& config, Rng& rng) {
        cfg = config;
        cfg.validate();
        const int L = cfg.levels();
        const int64_t tdim = cfg.time_dim();
        const int64_t idim = cfg.id_dim();

        time_fc1.build(cfg.base_dim, tdim, rng);
        time_fc2.build(tdim, tdim, rng);
        stem.build(cfg.in_channels, cfg.dim(0), 1, rng);

        enc.resize(L);
        dec.resize(L);
        for (int i = 0; i < L; ++i) {
            if (i > 0) {
                enc[i].down.build(cfg.dim(i - 1), cfg.dim(i), 2, rng);
                enc[i].has_down = true;
            }
            enc[i].blocks.resize(cfg.res_blocks_per_level);
            for (auto& b : enc[i].blocks) b.build(cfg.dim(i), cfg.dim(i), tdim, idim, cfg.norm_groups, rng);
            enc[i].has_attn = cfg.attention_at(i);
            if (enc[i].has_attn) {
                enc[i].sattn.build(cfg.dim(i), cfg.attention_heads, cfg.norm_groups, rng);
                enc[i].tattn.build(cfg.dim(i), cfg.attention_heads, cfg.norm_groups, rng);
            }
        }
        for (int i = 0; i < L; ++i) {
            dec[i].blocks.resize(cfg.res_blocks_per_level);
            for (int b = 0; b < cfg.res_blocks_per_level; ++b) {
                const int64_t bin = (b == 0 && i != L - 1) ? 2 * cfg.dim(i) : cfg.dim(i);
                dec[i].blocks[b].build(bin, cfg.dim(i), tdim, idim, cfg.norm_groups, rng);
            }
            dec[i].has_attn = cfg.attention_at(i);
            if (dec[i].has_attn) {
                dec[i].sattn.build(cfg.dim(i), cfg.attention_heads, cfg.norm_groups, rng);
                dec[i].tattn.build(cfg.dim(i), cfg.attention_heads, cfg.norm_groups, rng);
            }
            if (i > 0) {
                dec[i].up.build(cfg.dim(i), cfg.dim(i - 1), 1, rng);
                dec[i].has_up = true;
            }
        }
        head_gn.build(cfg.dim(0), cfg.norm_groups);
        head_conv.build(cfg.dim(0), cfg.in_channels, 1, rng, /*zero_init=*/true);
    }

    void collect(nn::ParamRefs<S>& refs) {
        time_fc1.collect("time.fc1", refs);
        time_fc2.collect("time.fc2", refs);
        stem.collect("stem", refs);
        for (size_t i = 0; i < enc.size(); ++i) {
            const std::string p = "enc." + std::to_string(i);
            if (enc[i].has_down) enc[i].down.collect(p + ".down", refs);
            for (size_t b = 0; b < enc[i].blocks.size(); ++b)
                enc[i].blocks[b].collect(p + ".block" + std::to_string(b), refs);
            if (enc[i].has_attn) {
                enc[i].sattn.collect(p + ".sattn", refs);
                enc[i].tattn.collect(p + ".tattn", refs);
            }
        }
        for (size_t i = 0; i < dec.size(); ++i) {
            const std::string p = "dec." + std::to_string(i);
            for (size_t b = 0; b < dec[i].blocks.size(); ++b)
                dec[i].blocks[b].collect(p + ".block" + std::to_string(b), refs);
            if (dec[i].has_attn) {
                dec[i].sattn.collect(p + ".sattn", refs);
                dec[i].tattn.collect(p + ".tattn", refs);
            }
            if (dec[i].has_up) dec[i].up.collect(p + ".up", refs);
        }
        head_gn.collect("head.gn", refs);
        head_conv.collect("head.conv", refs);
    }

    int64_t level_h(int i) const { return cfg.frame_h >> i; }
    int64_t level_w(int i) const { return cfg.frame_w >> i; }

    /// x: (F*H*W, in_channels), already condition-biased. out has x's shape.
    void forward(const TensorT<S>& x, int t, const TensorT<S>& id_token, TensorT<S>& out,
                 Cache* cache) const {
        Cache local;
        Cache& c = cache ? *cache : local;
        const int L = cfg.levels();
        const int64_t F = cfg.clip_length;
        c.enc.resize(L);
        c.dec.resize(L);
        c.skips.resize(L);

        // Timestep embedding.
        c.t_sin = nn::sinusoidal_embedding<S>(t, cfg.base_dim);
        c.t_sin.reshape({int64_t{1}, static_cast<int64_t>(cfg.base_dim)});
        time_fc1.forward(c.t_sin, c.t_h1);
        nn::silu_forward(c.t_h1, c.t_h1s);
        time_fc2.forward(c.t_h1s, c.temb);

        TensorT<S> id_row = id_token;
        id_row.reshape({int64_t{1}, cfg.id_dim()});

        TensorT<S> h;
        stem.forward(x, F, cfg.frame_h, cfg.frame_w, h);

        for (int i = 0; i < L; ++i) {
            LevelCache& lc = c.enc[i];
            if (enc[i].has_down) {
                lc.down_in = h;
                TensorT<S> down;
                enc[i].down.forward(h, F, level_h(i - 1), level_w(i - 1), down);
                h = std::move(down);
            }
            run_blocks(enc[i].blocks, lc, h, F, level_h(i), level_w(i), c.temb, id_row);
            if (enc[i].has_attn)
                run_attention(enc[i].sattn, enc[i].tattn, lc, h, F, level_h(i) * level_w(i));
            c.skips[i] = h;
        }

        h = c.skips[L - 1];
        for (int i = L - 1; i >= 0; --i) {
            LevelCache& lc = c.dec[i];
            if (i != L - 1) {
                TensorT<S> cat;
                nn::concat_channels(h, c.skips[i], cat);
                h = std::move(cat);
            }
            run_blocks(dec[i].blocks, lc, h, F, level_h(i), level_w(i), c.temb, id_row);
            if (dec[i].has_attn)
                run_attention(dec[i].sattn, dec[i].tattn, lc, h, F, level_h(i) * level_w(i));
            if (dec[i].has_up) {
                TensorT<S> ups;
                nn::upsample2x_forward(h, F, level_h(i), level_w(i), cfg.dim(i), ups);
                lc.up_conv_in = std::move(ups);
                dec[i].up.forward(lc.up_conv_in, F, level_h(i - 1), level_w(i - 1), h);
            }
        }

        c.head_in = h;
        head_gn.forward(c.head_in, c.head_n, &c.head_gnc);
        nn::silu_forward(c.head_n, c.head_s);
        head_conv.forward(c.head_s, F, cfg.frame_h, cfg.frame_w, out);
    }

    /// Accumulates parameter gradients; dx and d_id (optional) receive the
    /// input and identity-token gradients.
    void backward(const TensorT<S>& x, const TensorT<S>& id_token, const TensorT<S>& dout, Cache& c,
                  TensorT<S>* dx, TensorT<S>* d_id_token) {
        const int L = cfg.levels();
        const int64_t F = cfg.clip_length;

        TensorT<S> id_row = id_token;
        id_row.reshape({int64_t{1}, cfg.id_dim()});
        TensorT<S> dtemb({int64_t{1}, cfg.time_dim()});
        TensorT<S> did({int64_t{1}, cfg.id_dim()});

        // Head.
        TensorT<S> ds, dn, d;
        head_conv.backward(c.head_s, F, cfg.frame_h, cfg.frame_w, dout, &ds);
        nn::silu_backward(c.head_n, ds, dn);
        head_gn.backward(c.head_in, dn, c.head_gnc, d);

        // Decoder, finest level first. After level i (< L-1) is unwound,
        // d refers to the output of level i+1's up path, which the next
        // iteration consumes.
        std::vector<TensorT<S>> dskip(L);
        for (int i = 0; i < L; ++i) {
            LevelCache& lc = c.dec[i];
            if (dec[i].has_up) {
                TensorT<S> dups, dpre;
                dec[i].up.backward(lc.up_conv_in, F, level_h(i - 1), level_w(i - 1), d, &dups);
                nn::upsample2x_backward(dups, F, level_h(i), level_w(i), cfg.dim(i), dpre);
                d = std::move(dpre);
            }
            if (dec[i].has_attn)
                backward_attention(dec[i].sattn, dec[i].tattn, lc, d, F, level_h(i) * level_w(i));
            backward_blocks(dec[i].blocks, lc, d, F, level_h(i), level_w(i), c.temb, id_row, dtemb,
                            did);
            if (i != L - 1) {
                TensorT<S> dh, dsk;
                nn::split_channels(d, dh, dsk, cfg.dim(i), cfg.dim(i));
                dskip[i] = std::move(dsk);
                d = std::move(dh);
            } else {
                dskip[L - 1] = std::move(d);
            }
        }

        // Encoder, bottom level back to the stem. Each skip tensor fed both
        // the decoder and (via the down conv) the next encoder level, so
        // down-conv input gradients accumulate into the previous skip grad.
        TensorT<S> dcur;
        for (int i = L - 1; i >= 0; --i) {
            LevelCache& lc = c.enc[i];
            dcur = std::move(dskip[i]);
            if (enc[i].has_attn)
                backward_attention(enc[i].sattn, enc[i].tattn, lc, dcur, F, level_h(i) * level_w(i));
            backward_blocks(enc[i].blocks, lc, dcur, F, level_h(i), level_w(i), c.temb, id_row, dtemb,
                            did);
            if (enc[i].has_down) {
                TensorT<S> dprev;
                enc[i].down.backward(lc.down_in, F, level_h(i - 1), level_w(i - 1), dcur, &dprev);
                add_inplace(dskip[i - 1], dprev);
            }
        }
        stem.backward(x, F, cfg.frame_h, cfg.frame_w, dcur, dx);

        // Timestep MLP.
        TensorT<S> dt_h1s, dt_h1;
        time_fc2.backward(c.t_h1s, dtemb, &dt_h1s);
        nn::silu_backward(c.t_h1, dt_h1s, dt_h1);
        time_fc1.backward(c.t_sin, dt_h1, nullptr);

        if (d_id_token) *d_id_token = did.reshape({cfg.id_dim()});
    }

  private:
    void run_blocks(const std::vector<ResBlockT<S>>& blocks, LevelCache& lc, TensorT<S>& h,
                    int64_t F, int64_t h_sz, int64_t w_sz, const TensorT<S>& temb,
                    const TensorT<S>& id_row) const {
        lc.block_in.resize(blocks.size());
        lc.blocks.resize(blocks.size());
        for (size_t b = 0; b < blocks.size(); ++b) {
            lc.block_in[b] = h;
            TensorT<S> y;
            blocks[b].forward(lc.block_in[b], F, h_sz, w_sz, temb, id_row, y, &lc.blocks[b]);
            h = std::move(y);
        }
    }

    void backward_blocks(std::vector<ResBlockT<S>>& blocks, LevelCache& lc, TensorT<S>& d, int64_t F,
                         int64_t h_sz, int64_t w_sz, const TensorT<S>& temb, const TensorT<S>& id_row,
                         TensorT<S>& dtemb, TensorT<S>& did) {
        for (int b = static_cast<int>(blocks.size()) - 1; b >= 0; --b) {
            TensorT<S> dx;
            blocks[b].backward(lc.block_in[b], F, h_sz, w_sz, temb, id_row, d, lc.blocks[b], dx,
                               dtemb, did);
            d = std::move(dx);
        }
    }

    void run_attention(const nn::AttentionT<S>& sattn, const nn::AttentionT<S>& tattn, LevelCache& lc,
                       TensorT<S>& h, int64_t F, int64_t positions) const {
        lc.sattn_in = h;
        TensorT<S> hs;
        sattn.forward(lc.sattn_in, F, positions, hs, &lc.sattn);
        TensorT<S> perm;
        nn::transpose_fp(hs, F, positions, sattn.channels, perm);
        lc.tattn_in = std::move(perm);
        TensorT<S> ho;
        tattn.forward(lc.tattn_in, positions, F, ho, &lc.tattn);
        nn::transpose_fp(ho, positions, F, tattn.channels, h);
    }

    void backward_attention(nn::AttentionT<S>& sattn, nn::AttentionT<S>& tattn, LevelCache& lc,
                            TensorT<S>& d, int64_t F, int64_t positions) {
        TensorT<S> dperm_out;
        nn::transpose_fp(d, F, positions, tattn.channels, dperm_out);
        TensorT<S> dperm_in;
        tattn.backward(lc.tattn_in, positions, F, dperm_out, lc.tattn, dperm_in);
        TensorT<S> dhs;
        nn::transpose_fp(dperm_in, positions, F, tattn.channels, dhs);
        TensorT<S> dx;
        sattn.backward(lc.sattn_in, F, positions, dhs, lc.sattn, dx);
        d = std::move(dx);
    }
};

// ---------------------------------------------------------------------------

/// Complete parameter set: the U-Net plus the conditioning encoders,
/// with a stable-named parameter registry for the optimizer, checkpoints
/// and gradient checks.
template <typename S>
struct DenoiserT {
    DenoiserConfig config;
    UNetT<S> unet;
    ConditionEncodersT<S> cond;
    nn::ParamRefs<S> params;
    uint64_t init_seed = 0;

    static DenoiserT build(const DenoiserConfig& cfg, const std::vector<std::string>& views,
                           const std::vector<std::string>& covariates, uint64_t seed) {
        cfg.validate();
        if (static_cast<int>(views.size()) != cfg.n_views ||
            static_cast<int>(covariates.size()) != cfg.n_covariates)
            throw param_error("denoiser: label vocabulary sizes disagree with config");
        DenoiserT m;
        m.config = cfg;
        m.init_seed = seed;
        Rng rng = Rng::stream(seed, 0xD1FFull);
        m.unet.build(cfg, rng);
        m.cond.build(views, covariates, cfg.n_ids, cfg.id_dim(), cfg.frame_h, cfg.frame_w,
                     cfg.in_channels, rng);
        m.collect();
        return m;
    }

    void collect() {
        params.clear();
        unet.collect(params);
        cond.collect("cond", params);
    }

    int64_t num_params() const {
        int64_t n = 0;
        for (const auto& r : params) n += r.param->numel();
        return n;
    }

    void zero_grads() {
        for (auto& r : params) r.param->zero_grad();
    }

    /// FNV-1a over all parameter bytes in registry order.
    uint64_t param_checksum() const {
        uint64_t h = 1469598103934665603ull;
        for (const auto& r : params) {
            const auto* bytes = reinterpret_cast<const uint8_t*>(r.param->value.data());
            const size_t n = r.param->value.v.size() * sizeof(S);
            for (size_t i = 0; i < n; ++i) h = (h ^ bytes[i]) * 1099511628211ull;
        }
        return h;
    }

    /// Batched noise prediction on condition-biased inputs. Each sample is
    /// (F*H*W, in_channels) (or any shape with that element count).
    std::vector<TensorT<S>> predict_noise(const std::vector<TensorT<S>>& y_biased,
                                          const std::vector<int>& ts,
                                          const std::vector<TensorT<S>>& id_tokens) const {
        if (y_biased.size() != ts.size() || y_biased.size() != id_tokens.size())
            throw shape_error("predict_noise: batch size mismatch between inputs");
        const int64_t rows =
            static_cast<int64_t>(config.clip_length) * config.frame_h * config.frame_w;
        std::vector<TensorT<S>> out(y_biased.size());
        for (size_t i = 0; i < y_biased.size(); ++i) {
            if (y_biased[i].numel() != rows * config.in_channels)
                throw shape_error("predict_noise: sample " + std::to_string(i) +
                                  " does not match the configured clip shape");
            if (id_tokens[i].numel() != config.id_dim())
                throw shape_error("predict_noise: id token width mismatch");
            if (ts[i] < 0) throw param_error("predict_noise: negative timestep");
            if (!y_biased[i].all_finite()) throw numeric_error("predict_noise: non-finite input");
            TensorT<S> x = y_biased[i];
            x.reshape({rows, static_cast<int64_t>(config.in_channels)});
            unet.forward(x, ts[i], id_tokens[i], out[i], nullptr);
            if (!out[i].all_finite()) throw numeric_error("predict_noise: non-finite output");
        }
        return out;
    }
};

using Denoiser = DenoiserT<float>;

}  // namespace gaitdiff
