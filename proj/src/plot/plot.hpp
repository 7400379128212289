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

#include <span>
#include <string>

#include "core/tensor.hpp"

namespace gaitdiff {

/// Tiles the frames of a clip ((F, H, W), values in [0, 1]) into one
/// grayscale grid image with 1px separators.
void save_frame_grid(const std::string& path, const Tensor& frames, int columns = 6);

/// Simple log-ish loss curve raster (grayscale PNG).
void save_loss_curve(const std::string& path, std::span<const double> losses);

/// Histogram raster over [lo, hi].
void save_histogram(const std::string& path, std::span<const float> values, int bins, double lo,
                    double hi);

}  // namespace gaitdiff
