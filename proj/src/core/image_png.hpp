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
#include <string>
#include <vector>

namespace gaitdiff {

/// 8-bit grayscale raster, row-major.
struct GrayImage {
    int width = 0;
    int height = 0;
    std::vector<uint8_t> pixels;

    uint8_t at(int y, int x) const { return pixels[static_cast<size_t>(y) * width + x]; }
    uint8_t& at(int y, int x) { return pixels[static_cast<size_t>(y) * width + x]; }
};

GrayImage make_gray(int width, int height, uint8_t fill = 0);

/// Decodes a PNG of any color type / bit depth to 8-bit grayscale.
GrayImage read_png_gray8(const std::string& path);

void write_png_gray8(const std::string& path, const GrayImage& img);

GrayImage resize_bilinear(const GrayImage& src, int width, int height);

}  // namespace gaitdiff
