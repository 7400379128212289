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

#include "data/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>

#include <json.hpp>

#include "core/errors.hpp"
#include "core/image_png.hpp"
#include "core/rng.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace gaitdiff {

namespace {

std::string frame_filename(int index) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d.png", index);
    return buf;
}

std::string pad3(int v) {
    char buf[8];
    std::snprintf(buf, sizeof(buf), "%03d", v);
    return buf;
}

void sort_unique(std::vector<std::string>& v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
}

bool in_vocab(const std::vector<std::string>& vocab, const std::string& label) {
    return std::find(vocab.begin(), vocab.end(), label) != vocab.end();
}

}  // namespace

const ManifestEntry& DatasetManifest::find(const std::string& sequence_id) const {
    for (const auto& e : entries)
        if (e.sequence_id == sequence_id) return e;
    throw param_error("unknown sequence_id: " + sequence_id);
}

std::vector<int> DatasetManifest::entries_for_identity(int identity_index) const {
    std::vector<int> out;
    for (size_t i = 0; i < entries.size(); ++i)
        if (entries[i].identity_index == identity_index) out.push_back(static_cast<int>(i));
    return out;
}

DatasetManifest load_dataset(const std::string& manifest_path) {
    if (!fs::exists(manifest_path)) throw io_error("manifest not found: " + manifest_path);
    std::ifstream f(manifest_path);
    json j;
    try {
        j = json::parse(f);
    } catch (const json::exception& e) {
        throw parse_error("manifest parse failed: " + manifest_path + ": " + e.what());
    }

    DatasetManifest m;
    m.root_path = fs::path(manifest_path).parent_path().string();
    try {
        m.n_ids = j.at("n_ids").get<int>();
        m.views = j.at("views").get<std::vector<std::string>>();
        m.covariates = j.at("covariates").get<std::vector<std::string>>();
        for (const auto& je : j.at("entries")) {
            ManifestEntry e;
            e.sequence_id = je.at("sequence_id").get<std::string>();
            e.identity_index = je.at("identity_index").get<int>();
            e.view_label = je.at("view").get<std::string>();
            e.covariate_label = je.at("covariate").get<std::string>();
            e.frame_count = je.at("frame_count").get<int>();
            e.relative_path = je.at("relative_path").get<std::string>();
            e.synthetic = je.value("synthetic", false);
            m.entries.push_back(std::move(e));
        }
    } catch (const json::exception& e) {
        throw parse_error("manifest field error: " + manifest_path + ": " + e.what());
    }

    sort_unique(m.views);
    sort_unique(m.covariates);

    if (m.n_ids < 1) throw validation_error("manifest: n_ids must be >= 1");
    std::set<std::string> seen_ids;
    for (const auto& e : m.entries) {
        if (!seen_ids.insert(e.sequence_id).second)
            throw validation_error("manifest: duplicate sequence_id " + e.sequence_id);
        if (e.identity_index < 0 || e.identity_index >= m.n_ids)
            throw validation_error("manifest: identity_index " + std::to_string(e.identity_index) +
                                   " out of range for entry " + e.sequence_id);
        if (!in_vocab(m.views, e.view_label))
            throw validation_error("manifest: view '" + e.view_label + "' outside vocabulary in entry " +
                                   e.sequence_id);
        if (!in_vocab(m.covariates, e.covariate_label))
            throw validation_error("manifest: covariate '" + e.covariate_label +
                                   "' outside vocabulary in entry " + e.sequence_id);
        if (e.frame_count < 1)
            throw validation_error("manifest: nonpositive frame_count in entry " + e.sequence_id);
        const fs::path dir = fs::path(m.root_path) / e.relative_path;
        if (!fs::is_directory(dir))
            throw io_error("manifest: frame directory missing: " + dir.string());
        const fs::path first = dir / frame_filename(0);
        const fs::path last = dir / frame_filename(e.frame_count - 1);
        if (!fs::exists(first) || !fs::exists(last))
            throw io_error("manifest: frame files missing under " + dir.string());
    }
    return m;
}

std::string save_manifest(const DatasetManifest& manifest) {
    json j;
    j["format"] = "gaitdiff-dataset-v1";
    j["n_ids"] = manifest.n_ids;
    j["views"] = manifest.views;
    j["covariates"] = manifest.covariates;
    j["entries"] = json::array();
    for (const auto& e : manifest.entries) {
        json je;
        je["sequence_id"] = e.sequence_id;
        je["identity_index"] = e.identity_index;
        je["view"] = e.view_label;
        je["covariate"] = e.covariate_label;
        je["frame_count"] = e.frame_count;
        je["relative_path"] = e.relative_path;
        je["synthetic"] = e.synthetic;
        j["entries"].push_back(std::move(je));
    }

    fs::create_directories(manifest.root_path);
    const fs::path path = fs::path(manifest.root_path) / "manifest.json";
    std::ofstream f(path);
    if (!f) throw io_error("cannot write manifest: " + path.string());
    f << j.dump(2) << "\n";
    return path.string();
}

SilhouetteSequence load_sequence(const DatasetManifest& manifest, const std::string& sequence_id,
                                 int clip_length, int start, bool loop_pad) {
    const ManifestEntry& e = manifest.find(sequence_id);
    if (clip_length < 1) throw param_error("load_sequence: clip_length must be >= 1");
    if (start < 0) throw param_error("load_sequence: negative start");
    if (!loop_pad && start + clip_length > e.frame_count)
        throw Error(ErrorCode::validation,
                    "sequence " + sequence_id + " has " + std::to_string(e.frame_count) +
                        " frames, need " + std::to_string(start + clip_length) +
                        " (enable loop padding or shorten the clip)");

    SilhouetteSequence seq;
    seq.identity_index = e.identity_index;
    seq.view_label = e.view_label;
    seq.covariate_label = e.covariate_label;
    seq.sequence_id = e.sequence_id;
    seq.frames = Tensor({clip_length, kFrameHeight, kFrameWidth});

    const fs::path dir = fs::path(manifest.root_path) / e.relative_path;
    for (int f = 0; f < clip_length; ++f) {
        const int src = (start + f) % e.frame_count;
        GrayImage img = read_png_gray8((dir / frame_filename(src)).string());
        if (img.width != kFrameWidth || img.height != kFrameHeight)
            img = resize_bilinear(img, kFrameWidth, kFrameHeight);
        float* dst = seq.frames.data() + static_cast<int64_t>(f) * kFrameHeight * kFrameWidth;
        for (size_t i = 0; i < img.pixels.size(); ++i) dst[i] = static_cast<float>(img.pixels[i]) / 255.0f;
    }
    return seq;
}

void save_sequence_frames(const std::string& root, const std::string& relative_path,
                          const Tensor& frames) {
    if (frames.rank() != 3) throw shape_error("save_sequence_frames: expected (F, H, W)");
    const int F = static_cast<int>(frames.dim(0));
    const int H = static_cast<int>(frames.dim(1));
    const int W = static_cast<int>(frames.dim(2));
    const fs::path dir = fs::path(root) / relative_path;
    fs::create_directories(dir);
    GrayImage img = make_gray(W, H);
    for (int f = 0; f < F; ++f) {
        const float* src = frames.data() + static_cast<int64_t>(f) * H * W;
        for (int i = 0; i < H * W; ++i) {
            const float v = std::clamp(src[i], 0.0f, 1.0f);
            img.pixels[i] = static_cast<uint8_t>(std::lround(v * 255.0f));
        }
        write_png_gray8((dir / frame_filename(f)).string(), img);
    }
}

SilhouetteSequence SequenceStore::clip(const std::string& sequence_id, int clip_length, int start,
                                       bool loop_pad) {
    auto it = full_.find(sequence_id);
    if (it == full_.end()) {
        const ManifestEntry& e = manifest_.find(sequence_id);
        it = full_.emplace(sequence_id, load_sequence(manifest_, sequence_id, e.frame_count, 0)).first;
    }
    const SilhouetteSequence& src = it->second;
    const int total = static_cast<int>(src.clip_length());
    if (clip_length < 1) throw param_error("clip: clip_length must be >= 1");
    if (start < 0) throw param_error("clip: negative start");
    if (!loop_pad && start + clip_length > total)
        throw Error(ErrorCode::validation, "sequence " + sequence_id + " has " +
                                               std::to_string(total) + " frames, need " +
                                               std::to_string(start + clip_length));

    SilhouetteSequence out;
    out.identity_index = src.identity_index;
    out.view_label = src.view_label;
    out.covariate_label = src.covariate_label;
    out.sequence_id = src.sequence_id;
    out.frames = Tensor({clip_length, kFrameHeight, kFrameWidth});
    const int64_t fsz = static_cast<int64_t>(kFrameHeight) * kFrameWidth;
    for (int f = 0; f < clip_length; ++f) {
        const int sf = (start + f) % total;
        std::copy(src.frames.data() + sf * fsz, src.frames.data() + (sf + 1) * fsz,
                  out.frames.data() + f * fsz);
    }
    return out;
}

WalkerParams walker_params_for_identity(uint64_t seed, int identity_index) {
    Rng rng = Rng::stream(seed, 0x77a1ull + static_cast<uint64_t>(identity_index));
    WalkerParams p;
    p.torso_height = 20.0 + 10.0 * rng.uniform();
    p.torso_width = 7.0 + 5.0 * rng.uniform();
    p.limb_length = 12.0 + 6.0 * rng.uniform();
    p.stride_frequency = 1.0 + rng.uniform();
    p.phase_offset = 6.283185307179586 * rng.uniform();
    p.amplitude = 4.0 + 5.0 * rng.uniform();
    return p;
}

namespace {

double view_scale_for_label(const std::string& view_label) {
    // The label is an angle in degrees (CASIA-style "000".."180"); profile
    // views show the widest body, frontal views the narrowest.
    try {
        const double deg = std::stod(view_label);
        return 0.55 + 0.45 * std::sin(deg * 3.14159265358979323846 / 180.0);
    } catch (...) {
        throw vocab_error("walker synthesis needs numeric view labels, got '" + view_label + "'");
    }
}

struct Segment {
    double x0, y0, x1, y1, thickness;
};

double dist2_to_segment(double px, double py, const Segment& s) {
    const double dx = s.x1 - s.x0, dy = s.y1 - s.y0;
    const double len2 = dx * dx + dy * dy;
    double t = len2 > 0 ? ((px - s.x0) * dx + (py - s.y0) * dy) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    const double cx = s.x0 + t * dx, cy = s.y0 + t * dy;
    return (px - cx) * (px - cx) + (py - cy) * (py - cy);
}

}  // namespace

void render_walker_frame(const WalkerParams& params, double phase, double view_scale,
                         const std::string& covariate, Tensor& frame_hw) {
    if (frame_hw.rank() != 2) throw shape_error("render_walker_frame: expected (H, W)");
    const int H = static_cast<int>(frame_hw.dim(0));
    const int W = static_cast<int>(frame_hw.dim(1));
    frame_hw.zero();

    const bool coat = covariate == "CL";
    const bool bag = covariate == "BG";

    const double cx = W / 2.0;
    const double torso_cy = H * 0.40;
    const double torso_a = (params.torso_width / 2.0) * view_scale * (coat ? 1.4 : 1.0);
    const double torso_b = params.torso_height / 2.0;
    const double hip_y = torso_cy + torso_b - 1.0;
    const double head_r = 3.2;
    const double head_cy = torso_cy - torso_b - head_r - 1.0;

    const double swing = params.amplitude * view_scale;
    const double lift = 0.15 * params.limb_length;
    Segment legs[2];
    for (int leg = 0; leg < 2; ++leg) {
        const double ph = phase + (leg == 1 ? 3.14159265358979323846 : 0.0);
        const double tip_x = cx + swing * std::sin(ph);
        const double tip_y = hip_y + params.limb_length - lift * std::max(0.0, std::cos(ph));
        legs[leg] = {cx, hip_y, tip_x, tip_y, 1.4};
    }

    const double bag_x = cx + (torso_a + 3.5);
    const double bag_y = torso_cy + torso_b * 0.5;
    const double bag_r = 2.8;

    for (int y = 0; y < H; ++y) {
        for (int x = 0; x < W; ++x) {
            const double px = x + 0.5, py = y + 0.5;
            bool on = false;
            const double ex = (px - cx) / torso_a, ey = (py - torso_cy) / torso_b;
            on = on || (ex * ex + ey * ey <= 1.0);
            const double hx = px - cx, hy = py - head_cy;
            on = on || (hx * hx + hy * hy <= head_r * head_r);
            for (const auto& leg : legs)
                on = on || (dist2_to_segment(px, py, leg) <= leg.thickness * leg.thickness);
            if (bag) {
                const double bx = px - bag_x, by = py - bag_y;
                on = on || (bx * bx + by * by <= bag_r * bag_r);
            }
            if (on) frame_hw[static_cast<int64_t>(y) * W + x] = 1.0f;
        }
    }
}

DatasetManifest synthesize_walker_dataset(const std::string& root_out, int n_ids,
                                          int sequences_per_id, int frames_per_sequence,
                                          const std::vector<std::string>& views,
                                          const std::vector<std::string>& covariates, uint64_t seed) {
    if (n_ids < 1) throw param_error("synthesize: n_ids must be >= 1");
    if (sequences_per_id < 1) throw param_error("synthesize: sequences_per_id must be >= 1");
    if (frames_per_sequence < 1) throw param_error("synthesize: frames_per_sequence must be >= 1");
    if (views.empty() || covariates.empty()) throw param_error("synthesize: empty label vocabulary");

    DatasetManifest m;
    m.root_path = root_out;
    m.n_ids = n_ids;
    m.views = views;
    m.covariates = covariates;
    std::sort(m.views.begin(), m.views.end());
    std::sort(m.covariates.begin(), m.covariates.end());

    Tensor frame({kFrameHeight, kFrameWidth});
    Tensor clip({frames_per_sequence, kFrameHeight, kFrameWidth});

    for (int id = 0; id < n_ids; ++id) {
        const WalkerParams params = walker_params_for_identity(seed, id);
        for (int s = 0; s < sequences_per_id; ++s) {
            const std::string& view = m.views[s % m.views.size()];
            const std::string& cov = m.covariates[(s / m.views.size()) % m.covariates.size()];
            // Per-sequence start phase keeps multiple clips of one identity
            // from being pixel-identical while staying seed-deterministic.
            Rng seq_rng = Rng::stream(seed, mix64(0x9d00ull + static_cast<uint64_t>(id) * 1000 + s));
            const double phase_jitter = 6.283185307179586 * seq_rng.uniform();

            const double scale = view_scale_for_label(view);
            for (int f = 0; f < frames_per_sequence; ++f) {
                const double phase = 6.283185307179586 * params.stride_frequency * f /
                                         static_cast<double>(frames_per_sequence) +
                                     params.phase_offset + phase_jitter;
                render_walker_frame(params, phase, scale, cov, frame);
                std::copy(frame.v.begin(), frame.v.end(),
                          clip.v.begin() + static_cast<int64_t>(f) * kFrameHeight * kFrameWidth);
            }

            ManifestEntry e;
            e.identity_index = id;
            e.view_label = view;
            e.covariate_label = cov;
            e.frame_count = frames_per_sequence;
            e.sequence_id = pad3(id) + "-" + cov + "-" + view + "-" + pad3(s);
            e.relative_path =
                (fs::path(pad3(id)) / cov / view / pad3(s)).string();
            e.synthetic = false;
            save_sequence_frames(root_out, e.relative_path, clip);
            m.entries.push_back(std::move(e));
        }
    }
    save_manifest(m);
    return m;
}

}  // namespace gaitdiff
