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
#include <memory>
#include <string>
#include <vector>

#include "data/dataset.hpp"

namespace gaitdiff {

struct EmbeddingVector {
    std::vector<double> values;
    std::string source_sequence_id;
    int identity_index = 0;
    bool is_synthetic = false;
    bool degenerate_norm = false;  // zero-norm source (e.g. an all-black clip)
};

class Embedder {
  public:
    virtual ~Embedder() = default;
    virtual std::string name() const = 0;
    virtual EmbeddingVector embed(const SilhouetteSequence& seq) const = 0;
};

/// Reference embedder: the temporal mean of the silhouette frames (the
/// classic gait energy image), flattened and L2-normalized. Deliberately
/// dependency-free and frame-order invariant; production gait-recognition
/// embedders plug in through the external table contract below.
class GeiEmbedder : public Embedder {
  public:
    std::string name() const override { return "gei"; }
    EmbeddingVector embed(const SilhouetteSequence& seq) const override;
};

enum class GbsPairing {
    same_identity,  // synthetic ids must exist among the real ids
    matched_ids,    // k-th distinct synthetic id pairs with k-th distinct real id
};

/// Gait biometric similarity: for each synthetic sequence, the cosine
/// similarity between its embedding and the centroid of the real
/// embeddings of the paired identity; scores averaged overall and per
/// identity. Zero-norm embeddings are excluded and counted.
struct GbsReport {
    double overall_score = 0.0;  // in [-1, 1]
    std::map<int, double> per_identity;
    int pair_count = 0;
    std::string embedder_name;
    int excluded_zero_norm = 0;
};

GbsReport gbs(const std::vector<EmbeddingVector>& real, const std::vector<EmbeddingVector>& synthetic,
              const std::string& embedder_name, GbsPairing pairing);

/// Convenience overload that embeds both sets first.
GbsReport gbs(const std::vector<SilhouetteSequence>& real,
              const std::vector<SilhouetteSequence>& synthetic, const Embedder& embedder,
              GbsPairing pairing);

double cosine_similarity(const std::vector<double>& a, const std::vector<double>& b);

// ---------------------------------------------------------------------------
// Embedding tables (tab-separated, header row, one row per sequence,
// sorted by sequence_id; full double precision)
// ---------------------------------------------------------------------------

void write_embedding_table(const std::string& path, std::vector<EmbeddingVector> embeddings);
std::vector<EmbeddingVector> read_embedding_table(const std::string& path);

/// Embeds every sequence of a manifest (full source length) and writes the
/// table. Returns the embeddings in table order.
std::vector<EmbeddingVector> export_embeddings(const DatasetManifest& manifest,
                                               const Embedder& embedder, const std::string& out_path);

/// Embeds a manifest's sequences in-process.
std::vector<EmbeddingVector> embed_manifest(const DatasetManifest& manifest, const Embedder& embedder);

/// External embedder contract: runs `command <dataset_root> <out_table>`
/// (the dataset root contains manifest.json) and reads the table back.
std::vector<EmbeddingVector> external_embeddings(const std::string& command,
                                                 const std::string& dataset_root);

/// Resolves an embedder spec: "gei" for the reference embedder, or
/// "cmd:<shell command>" for the external contract.
std::vector<EmbeddingVector> embeddings_for_spec(const DatasetManifest& manifest,
                                                 const std::string& spec);

std::string embedder_display_name(const std::string& spec);

}  // namespace gaitdiff
