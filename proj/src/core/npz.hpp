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

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace gaitdiff {

/// Named-array archive: an uncompressed NPZ (a ZIP of NPY members), so
/// checkpoints can be inspected with any numpy-compatible tool. Supported
/// dtypes: '<f4', '<f8', '<u8', '<i8', '|u1'.
struct NpzEntry {
    std::string dtype;
    std::vector<int64_t> shape;
    std::vector<uint8_t> bytes;

    int64_t numel() const {
        int64_t n = 1;
        for (int64_t d : shape) n *= d;
        return n;
    }
};

class NpzWriter {
  public:
    void add_f32(const std::string& name, std::span<const float> data, std::vector<int64_t> shape);
    void add_f64(const std::string& name, std::span<const double> data, std::vector<int64_t> shape);
    void add_u64(const std::string& name, std::span<const uint64_t> data);
    void add_i64(const std::string& name, std::span<const int64_t> data);
    void add_bytes(const std::string& name, std::span<const uint8_t> data);

    /// Writes the archive atomically (temp file + rename).
    void save(const std::string& path) const;

  private:
    void add_raw(const std::string& name, const std::string& dtype, std::vector<int64_t> shape,
                 const uint8_t* data, size_t nbytes);
    std::vector<std::pair<std::string, NpzEntry>> entries_;
};

class NpzReader {
  public:
    explicit NpzReader(const std::string& path);

    bool has(const std::string& name) const { return entries_.count(name) > 0; }
    const NpzEntry& get(const std::string& name) const;
    std::vector<std::string> names() const;

    std::vector<float> read_f32(const std::string& name) const;
    std::vector<double> read_f64(const std::string& name) const;
    std::vector<uint64_t> read_u64(const std::string& name) const;
    std::vector<int64_t> read_i64(const std::string& name) const;
    std::vector<uint8_t> read_bytes(const std::string& name) const;

  private:
    std::map<std::string, NpzEntry> entries_;
};

}  // namespace gaitdiff
