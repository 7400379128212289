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

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "core/tensor.hpp"

namespace gaitdiff {

/// All sequences are loaded at this fixed resolution. Source frames of any
/// size are resized on load; CASIA-style 64x44 inputs get stretched to
/// square, which the downstream models tolerate.
inline constexpr int kFrameHeight = 64;
inline constexpr int kFrameWidth = 64;

/// A fixed-length silhouette clip with its conditioning labels.
/// frames has shape (F, H, W), values in [0, 1].
struct SilhouetteSequence {
    Tensor frames;
    int identity_index = 0;
    std::string view_label;
    std::string covariate_label;
    std::string sequence_id;

    int64_t clip_length() const { return frames.rank() == 3 ? frames.dim(0) : 0; }
};

struct ManifestEntry {
    std::string sequence_id;
    int identity_index = 0;
    std::string view_label;
    std::string covariate_label;
    int frame_count = 0;
    std::string relative_path;  // directory of zero-padded NNNN.png frames
    bool synthetic = false;
};

struct DatasetManifest {
    std::string root_path;
    std::vector<ManifestEntry> entries;
    int n_ids = 0;
    std::vector<std::string> views;
    std::vector<std::string> covariates;

    const ManifestEntry& find(const std::string& sequence_id) const;
    std::vector<int> entries_for_identity(int identity_index) const;
};

/// Reads and validates a manifest file. Label vocabularies come back
/// deduplicated and sorted; every entry is checked against the
/// vocabularies, n_ids, and the frame directories on disk.
DatasetManifest load_dataset(const std::string& manifest_path);

/// Writes `manifest.json` under manifest.root_path.
std::string save_manifest(const DatasetManifest& manifest);

/// Loads one sequence, resized to (kFrameHeight, kFrameWidth) and scaled
/// to [0, 1]. Takes exactly clip_length frames starting at `start`; when
/// the source is shorter, loop_pad wraps around (gait is periodic) and
/// otherwise the call fails.
SilhouetteSequence load_sequence(const DatasetManifest& manifest, const std::string& sequence_id,
                                 int clip_length, int start = 0, bool loop_pad = false);

/// Writes a sequence into `root/relative_path` as zero-padded 8-bit PNGs.
void save_sequence_frames(const std::string& root, const std::string& relative_path,
                          const Tensor& frames);

/// Read-through cache of fully decoded sequences, so per-step crops during
/// training do not re-decode PNGs. Read-only over the manifest.
class SequenceStore {
  public:
    explicit SequenceStore(const DatasetManifest& manifest) : manifest_(manifest) {}

    /// Cropped clip starting at `start`; decodes and caches the whole
    /// source sequence on first access.
    SilhouetteSequence clip(const std::string& sequence_id, int clip_length, int start,
                            bool loop_pad = false);

  private:
    const DatasetManifest& manifest_;
    std::map<std::string, SilhouetteSequence> full_;
};

/// Affine map [0,1] -> [-1,1] used at the model boundary, and its inverse.
template <typename S>
void to_model_range(std::span<S> x) {
    for (auto& v : x) v = S(2) * v - S(1);
}
template <typename S>
void from_model_range(std::span<S> x) {
    for (auto& v : x) v = (v + S(1)) / S(2);
}

/// Pelvic-scale parameters of one procedural walker identity.
struct WalkerParams {
    double torso_height = 24;     // px
    double torso_width = 9;       // px
    double limb_length = 15;      // px
    double stride_frequency = 1;  // gait cycles per clip
    double phase_offset = 0;      // radians
    double amplitude = 6;         // px, horizontal leg swing
};

/// Deterministic identity -> parameters mapping for a given dataset seed.
WalkerParams walker_params_for_identity(uint64_t seed, int identity_index);

/// Renders one frame of a walker: torso ellipse + head + two sinusoidally
/// swinging leg segments. BG adds a static blob at hand height, CL dilates
/// the torso, and the view label's angle scales the body width.
void render_walker_frame(const WalkerParams& params, double phase, double view_scale,
                         const std::string& covariate, Tensor& frame_hw);

/// Builds a complete on-disk dataset of procedural walkers and returns its
/// validated manifest. Pure function of its arguments: the same call always
/// produces byte-identical frame files.
DatasetManifest synthesize_walker_dataset(const std::string& root_out, int n_ids,
                                          int sequences_per_id, int frames_per_sequence,
                                          const std::vector<std::string>& views,
                                          const std::vector<std::string>& covariates, uint64_t seed);

}  // namespace gaitdiff
