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

namespace gaitdiff {

/// Sets the compute thread count (Eigen GEMM and OpenMP loops).
/// n == 0 selects the hardware default. All kernels are written so that
/// every output element is produced by exactly one thread, so results are
/// run-to-run deterministic for any fixed thread count; n == 1 is the
/// fully single-threaded mode the reproducibility tests run under.
void set_compute_threads(int n);
int compute_threads();

}  // namespace gaitdiff
