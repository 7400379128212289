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

#include <array>
#include <cmath>
#include <cstdint>
#include <span>

namespace gaitdiff {

/// Counter-independent seed mixer (splitmix64). Used both to expand seeds
/// into generator state and to derive independent stream keys from
/// (seed, stream id) pairs, so e.g. per-variation noise streams never
/// overlap regardless of scheduling.
inline uint64_t mix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

inline uint64_t mix_streams(uint64_t seed, uint64_t stream) {
    return mix64(seed ^ mix64(stream + 0x632be59bd9b4e019ull));
}

/// xoshiro256** generator. We own the generator (rather than relying on
/// <random> distributions, whose output is implementation-defined) so that
/// seeded runs are bitwise reproducible and the full state can be stored
/// in checkpoints.
class Rng {
  public:
    using State = std::array<uint64_t, 4>;

    Rng() : Rng(0) {}
    explicit Rng(uint64_t seed) {
        uint64_t x = seed;
        for (auto& s : s_) {
            x = mix64(x);
            s = x;
        }
    }

    /// Independent generator for (seed, stream). Identical (seed, stream)
    /// pairs always yield identical sequences.
    static Rng stream(uint64_t seed, uint64_t stream_id) { return Rng(mix_streams(seed, stream_id)); }

    uint64_t next_u64() {
        const uint64_t result = rotl(s_[1] * 5, 7) * 9;
        const uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    /// Uniform double in [0, 1).
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform double in (0, 1].
    double uniform_open() { return 1.0 - uniform(); }

    /// Uniform integer in [0, n), unbiased (rejection sampling).
    uint64_t below(uint64_t n) {
        if (n == 0) return 0;
        const uint64_t threshold = (0 - n) % n;
        for (;;) {
            const uint64_t r = next_u64();
            if (r >= threshold) return r % n;
        }
    }

    /// Standard normal draw. Box-Muller; the paired value is discarded so
    /// the generator carries no hidden cache and its state fully describes
    /// the sequence.
    double normal() {
        const double u = uniform_open();
        const double v = uniform();
        return std::sqrt(-2.0 * std::log(u)) * std::cos(6.283185307179586476925286766559 * v);
    }

    /// Fills a span with unit normals, consuming Box-Muller pairs.
    template <typename S>
    void fill_normal(std::span<S> out) {
        size_t i = 0;
        const size_t n = out.size();
        while (i + 1 < n) {
            const double u = uniform_open();
            const double v = uniform();
            const double r = std::sqrt(-2.0 * std::log(u));
            const double a = 6.283185307179586476925286766559 * v;
            out[i] = static_cast<S>(r * std::cos(a));
            out[i + 1] = static_cast<S>(r * std::sin(a));
            i += 2;
        }
        if (i < n) out[i] = static_cast<S>(normal());
    }

    State state() const { return s_; }
    void set_state(const State& s) { s_ = s; }

  private:
    static uint64_t rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
    State s_{};
};

}  // namespace gaitdiff
