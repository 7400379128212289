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

#include "plot/plot.hpp"

#include <algorithm>
#include <cmath>

#include "core/errors.hpp"
#include "core/image_png.hpp"

namespace gaitdiff {

void save_frame_grid(const std::string& path, const Tensor& frames, int columns) {
    if (frames.rank() != 3) throw shape_error("frame grid: expected (F, H, W)");
    const int F = static_cast<int>(frames.dim(0));
    const int H = static_cast<int>(frames.dim(1));
    const int W = static_cast<int>(frames.dim(2));
    const int cols = std::max(1, std::min(columns, F));
    const int rows = (F + cols - 1) / cols;

    GrayImage img = make_gray(cols * (W + 1) + 1, rows * (H + 1) + 1, 32);
    for (int f = 0; f < F; ++f) {
        const int r = f / cols, c = f % cols;
        const int oy = 1 + r * (H + 1), ox = 1 + c * (W + 1);
        const float* src = frames.data() + static_cast<int64_t>(f) * H * W;
        for (int y = 0; y < H; ++y)
            for (int x = 0; x < W; ++x) {
                const float v = std::clamp(src[y * W + x], 0.0f, 1.0f);
                img.at(oy + y, ox + x) = static_cast<uint8_t>(std::lround(v * 255.0f));
            }
    }
    write_png_gray8(path, img);
}

void save_loss_curve(const std::string& path, std::span<const double> losses) {
    if (losses.empty()) throw param_error("loss curve: no data");
    const int W = 640, H = 360, margin = 8;
    GrayImage img = make_gray(W, H, 255);

    double lo = losses[0], hi = losses[0];
    for (double v : losses) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    if (hi <= lo) hi = lo + 1e-12;

    auto px = [&](size_t i) {
        return margin + static_cast<int>((W - 2 * margin - 1) * static_cast<double>(i) /
                                         std::max<size_t>(1, losses.size() - 1));
    };
    auto py = [&](double v) {
        return H - 1 - margin -
               static_cast<int>((H - 2 * margin - 1) * (v - lo) / (hi - lo));
    };

    for (size_t i = 0; i + 1 < losses.size(); ++i) {
        int x0 = px(i), y0 = py(losses[i]);
        int x1 = px(i + 1), y1 = py(losses[i + 1]);
        const int steps = std::max({std::abs(x1 - x0), std::abs(y1 - y0), 1});
        for (int s = 0; s <= steps; ++s) {
            const int x = x0 + (x1 - x0) * s / steps;
            const int y = y0 + (y1 - y0) * s / steps;
            if (x >= 0 && x < W && y >= 0 && y < H) img.at(y, x) = 0;
        }
    }
    write_png_gray8(path, img);
}

void save_histogram(const std::string& path, std::span<const float> values, int bins, double lo,
                    double hi) {
    if (values.empty() || bins < 1 || !(hi > lo)) throw param_error("histogram: bad arguments");
    std::vector<int64_t> count(static_cast<size_t>(bins), 0);
    for (float v : values) {
        const double t = (static_cast<double>(v) - lo) / (hi - lo);
        if (t < 0.0 || t > 1.0) continue;
        const int b = std::min(bins - 1, static_cast<int>(t * bins));
        ++count[static_cast<size_t>(b)];
    }
    const int64_t peak = std::max<int64_t>(1, *std::max_element(count.begin(), count.end()));

    const int W = std::max(bins * 6 + 2, 128), H = 240;
    GrayImage img = make_gray(W, H, 255);
    const int bar_w = (W - 2) / bins;
    for (int b = 0; b < bins; ++b) {
        const int h = static_cast<int>((H - 2) * static_cast<double>(count[static_cast<size_t>(b)]) /
                                       static_cast<double>(peak));
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < bar_w - 1; ++x) img.at(H - 2 - y, 1 + b * bar_w + x) = 64;
    }
    write_png_gray8(path, img);
}

}  // namespace gaitdiff
