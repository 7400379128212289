/* This file is part of the gaitdiff project, a silhouette-domain video
 * diffusion toolkit for gait sequence synthesis and evaluation.
 *
 * Copyright 2026 the gaitdiff authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

/* Public C API of the gaitdiff shared library.
 *
 * Conventions:
 *   - Every fallible call returns a gd_status; GD_OK is 0. On failure,
 *     gd_last_error() returns a one-line message (thread-local storage,
 *     valid until the next failing call on the same thread).
 *   - Objects are opaque handles created/destroyed by matching calls.
 *   - Structured inputs and outputs are JSON strings or files; datasets
 *     travel as manifest paths in the standard on-disk layout
 *     (<root>/<id>/<covariate>/<view>/<seq>/NNNN.png + manifest.json).
 */

#ifndef GAITDIFF_H
#define GAITDIFF_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define GD_API __declspec(dllexport)
#else
#define GD_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum gd_status {
    GD_OK = 0,
    GD_ERR_IO = 1,         /* filesystem / decode / encode failures        */
    GD_ERR_PARSE = 2,      /* malformed config, manifest or archive       */
    GD_ERR_VALIDATION = 3, /* semantically invalid data or config         */
    GD_ERR_PARAM = 4,      /* bad argument value                          */
    GD_ERR_SHAPE = 5,      /* tensor shape mismatch                       */
    GD_ERR_VOCAB = 6,      /* unknown label / identity out of range       */
    GD_ERR_NUMERIC = 7,    /* non-finite values encountered               */
    GD_ERR_INTERNAL = 8
} gd_status;

GD_API const char* gd_version(void);

/* Message for the most recent failure on this thread. Never NULL. */
GD_API const char* gd_last_error(void);

/* Compute thread count for GEMM and data-parallel kernels. 0 = hardware
 * default; 1 = the fully deterministic single-threaded mode. */
GD_API void gd_set_threads(int n);

/* Default configuration tree as JSON (static storage). */
GD_API const char* gd_default_config_json(void);

/* ------------------------------------------------------------------ */
/* Datasets                                                             */
/* ------------------------------------------------------------------ */

typedef struct gd_manifest gd_manifest;

/* Procedural walker dataset: n_ids identities x seqs_per_id sequences,
 * frames_per_seq frames each, labels as comma-separated lists (views must
 * be numeric angle labels, e.g. "000,090"). Deterministic in seed. */
GD_API gd_status gd_synth_dataset(const char* out_dir, int n_ids, int seqs_per_id,
                                  int frames_per_seq, const char* views_csv,
                                  const char* covariates_csv, uint64_t seed);

GD_API gd_status gd_manifest_open(const char* manifest_path, gd_manifest** out);
GD_API void gd_manifest_close(gd_manifest* m);
GD_API int gd_manifest_num_ids(const gd_manifest* m);
GD_API int gd_manifest_num_entries(const gd_manifest* m);
/* Summary (n_ids, label vocabularies, entry count) as JSON; the returned
 * pointer is owned by the handle. */
GD_API const char* gd_manifest_info_json(gd_manifest* m);

/* Splits a manifest (mode "closed_set": keep `fraction` of samples per id;
 * "open_set": keep `fraction` of ids, densely reindexed). The subset
 * manifest is written to out_manifest_path beside the source data. */
GD_API gd_status gd_split_manifest(const char* manifest_path, const char* mode, double fraction,
                                   uint64_t seed, const char* out_manifest_path);

/* ------------------------------------------------------------------ */
/* Training                                                             */
/* ------------------------------------------------------------------ */

/* Trains per the merged config JSON (see gd_default_config_json for the
 * schema) on manifest_path, writing checkpoints (ckpt_<step>.bin + a
 * `latest` pointer file) and loss.csv under run_dir. Pass a checkpoint
 * path as resume_checkpoint (or NULL) to continue a previous run. The
 * final checkpoint path is copied into out_ckpt_path (out_cap bytes). */
GD_API gd_status gd_train(const char* config_json, const char* manifest_path, const char* run_dir,
                          const char* resume_checkpoint, char* out_ckpt_path, size_t out_cap);

/* ------------------------------------------------------------------ */
/* Models and generation                                                */
/* ------------------------------------------------------------------ */

typedef struct gd_model gd_model;

GD_API gd_status gd_model_open(const char* checkpoint_path, gd_model** out);
GD_API void gd_model_close(gd_model* m);
/* Model card (config, schedule, vocabularies, step) as JSON; pointer owned
 * by the handle. */
GD_API const char* gd_model_info_json(gd_model* m);

/* Generates clips into out_dir (dataset layout + manifest). request_json:
 * {
 *   "identity": 0            (pure identity index)  OR
 *   "mix_ids": [0, 1],       (novel identity; >= 2 distinct ids)
 *   "normalize_mix": false,
 *   "view": "090", "covariate": "NM",
 *   "seed": 7,
 *   "variations": 1,
 *   "export_trajectory": false,
 *   "binarize_threshold": null | 0.5
 * }
 * Trajectory export writes one frame-grid PNG per recorded timestep plus
 * raw snapshots and a pixel-histogram PNG under out_dir/trajectory/. */
GD_API gd_status gd_generate(const gd_model* m, const char* request_json, const char* out_dir);

/* Augmentation plan (plan_json):
 * { "mode": "original_ids" | "novel_ids" | "combined" | "synthetic_only",
 *   "n_original": 0,              (0 = all ids in the checkpoint)
 *   "variations_per_setting": 5,
 *   "id_mixing_pairs": [[0,1]],   (optional; default consecutive pairs)
 *   "views": [...], "covariates": [...] }                                */
GD_API gd_status gd_augment(const gd_model* m, const char* plan_json, uint64_t seed,
                            const char* out_dir);

/* One clip per seed under a fixed condition; writes clips, a summary JSON
 * (pairwise mean absolute differences, optional per-seed GBS against
 * reference_manifest) under out_dir. seeds_csv e.g. "1,2,3". */
GD_API gd_status gd_seed_sweep(const gd_model* m, const char* request_json, const char* seeds_csv,
                               const char* reference_manifest, const char* out_dir);

/* ------------------------------------------------------------------ */
/* Evaluation                                                           */
/* ------------------------------------------------------------------ */

/* Gait biometric similarity between a real and a synthetic dataset.
 * embedder: "gei" (reference embedder) or "cmd:<command>" (external
 * contract: command is invoked as `<command> <dataset_root> <out_table>`
 * and must write an embedding table). pairing: "same_identity" or
 * "matched_ids". Writes the full report JSON to report_path (optional)
 * and stores the overall score in *overall_score (optional). */
GD_API gd_status gd_eval_gbs(const char* real_manifest, const char* synthetic_manifest,
                             const char* embedder, const char* pairing, const char* report_path,
                             double* overall_score);

/* Embeds every sequence of a manifest and writes the tab-separated
 * embedding table (header row; rows sorted by sequence id). */
GD_API gd_status gd_export_embeddings(const char* manifest_path, const char* embedder,
                                      const char* out_path);

/* Renders a loss.csv training log as a PNG curve. */
GD_API gd_status gd_plot_loss(const char* loss_csv_path, const char* out_png_path);

#ifdef __cplusplus
}
#endif

#endif /* GAITDIFF_H */
