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

#include "core/threading.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <thread>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace gaitdiff {

namespace {
int g_threads = 0;

int resolve(int n) {
    if (n > 0) return n;
    const unsigned hw = std::thread::hardware_concurrency();
    return std::max(1, static_cast<int>(std::min(hw, 8u)));
}
}  // namespace

void set_compute_threads(int n) {
    g_threads = resolve(n);
    Eigen::setNbThreads(g_threads);
#ifdef _OPENMP
    omp_set_num_threads(g_threads);
#endif
}

int compute_threads() {
    if (g_threads == 0) set_compute_threads(0);
    return g_threads;
}

}  // namespace gaitdiff
