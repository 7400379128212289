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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "core/rng.hpp"
#include "schedule/schedule.hpp"

using namespace gaitdiff;

TEST_CASE("linear schedule: endpoints and derived tables") {
    const auto s = make_linear_schedule(100, 1e-4, 0.02);
    CHECK(s.beta[0] == doctest::Approx(1e-4).epsilon(1e-15));
    CHECK(s.beta[99] == doctest::Approx(0.02).epsilon(1e-15));
    for (int t = 0; t < 100; ++t) CHECK(s.alpha[t] == 1.0 - s.beta[t]);
}

TEST_CASE("linear schedule: T=1 uses beta_start") {
    const auto s = make_linear_schedule(1, 1e-4, 0.02);
    CHECK(s.alpha_bar[0] == doctest::Approx(1.0 - 1e-4).epsilon(1e-15));
}

TEST_CASE("linear schedule: invalid bounds rejected") {
    CHECK_THROWS_AS(make_linear_schedule(0, 1e-4, 0.02), Error);
    CHECK_THROWS_AS(make_linear_schedule(10, 0.0, 0.02), Error);
    CHECK_THROWS_AS(make_linear_schedule(10, 0.03, 0.02), Error);
    CHECK_THROWS_AS(make_linear_schedule(10, 1e-4, 1.0), Error);
}

// Independent oracle: recompute every cumulative product from scratch.
TEST_CASE("alpha_bar matches a brute-force sequential product to 1e-12") {
    const auto s = make_linear_schedule(100, 1e-4, 0.02);
    for (int t = 0; t < 100; ++t) {
        double prod = 1.0;
        for (int k = 0; k <= t; ++k) prod *= 1.0 - (1e-4 + (0.02 - 1e-4) * k / 99.0);
        CHECK(std::abs(s.alpha_bar[t] - prod) < 1e-12);
    }
}

TEST_CASE("alpha_bar is strictly decreasing and consistent with alpha") {
    const auto s = make_linear_schedule(100, 1e-4, 0.02);
    CHECK(s.alpha_bar[0] == s.alpha[0]);
    for (int t = 1; t < 100; ++t) {
        CHECK(s.alpha_bar[t] < s.alpha_bar[t - 1]);
        CHECK(s.alpha_bar[t] == s.alpha_bar[t - 1] * s.alpha[t]);  // exact fp identity
    }
}

TEST_CASE("forward_step: zero-noise and scalar oracle cases") {
    const auto s = make_linear_schedule(100, 1e-4, 0.02);
    const double y = 1.7;
    double out = 0, zero = 0;
    forward_step<double>({&y, 1}, 13, {&zero, 1}, s, {&out, 1});
    CHECK(out == doctest::Approx(std::sqrt(s.alpha[13]) * y).epsilon(1e-15));

    // Hand-evaluated formula at alpha = 0.99: numerically independent path.
    NoiseSchedule custom;
    custom.timesteps = 1;
    custom.beta = {0.01};
    custom.alpha = {0.99};
    custom.alpha_bar = {0.99};
    const double y0 = 1.0, eps = 1.0;
    forward_step<double>({&y0, 1}, 0, {&eps, 1}, custom, {&out, 1});
    const double expected = std::sqrt(0.99) * 1.0 + std::sqrt(1.0 - 0.99) * 1.0;
    CHECK(std::abs(out - expected) < 1e-12);
}

TEST_CASE("forward_step: alpha == 1 is the identity") {
    NoiseSchedule s;
    s.timesteps = 1;
    s.beta = {0.0};
    s.alpha = {1.0};
    s.alpha_bar = {1.0};
    const double y = -0.37, eps = 5.0;
    double out = 0;
    forward_step<double>({&y, 1}, 0, {&eps, 1}, s, {&out, 1});
    CHECK(out == y);
}

TEST_CASE("forward_step: shape mismatch raises") {
    const auto s = make_linear_schedule(10, 1e-4, 0.02);
    std::vector<double> a(4), b(3), out(4);
    CHECK_THROWS_AS((forward_step<double>(a, 1, b, s, out)), Error);
}

TEST_CASE("forward_marginal: t=0 equals forward_step and zero-noise scales by sqrt(alpha_bar)") {
    const auto s = make_linear_schedule(100, 1e-4, 0.02);
    std::vector<double> y0{0.3, -1.2, 0.9}, eps{0.5, 0.25, -2.0};
    std::vector<double> m(3), st(3);
    forward_marginal<double>(y0, 0, eps, s, m);
    forward_step<double>(y0, 0, eps, s, st);
    for (int i = 0; i < 3; ++i) CHECK(m[i] == st[i]);  // alpha_bar[0] == alpha[0]

    std::vector<double> zero(3, 0.0);
    forward_marginal<double>(y0, 57, zero, s, m);
    for (int i = 0; i < 3; ++i)
        CHECK(m[i] == doctest::Approx(std::sqrt(s.alpha_bar[57]) * y0[i]).epsilon(1e-15));
}

TEST_CASE("forward_marginal: Monte-Carlo mean within 4 standard errors") {
    const auto s = make_linear_schedule(100, 1e-4, 0.02);
    const int t = 40, n = 10000;
    const double y0 = 0.8;
    Rng rng(123);
    double sum = 0;
    for (int i = 0; i < n; ++i) {
        const double eps = rng.normal();
        double out = 0;
        forward_marginal<double>({&y0, 1}, t, {&eps, 1}, s, {&out, 1});
        sum += out;
    }
    const double mean = sum / n;
    const double expected = std::sqrt(s.alpha_bar[t]) * y0;
    const double se = std::sqrt((1.0 - s.alpha_bar[t]) / n);
    CHECK(std::abs(mean - expected) < 4.0 * se);
}

TEST_CASE("iterated forward steps match the marginal's moments") {
    const auto s = make_linear_schedule(20, 1e-3, 0.05);
    const int t = 19, n = 20000;
    const double y0 = 0.5;
    Rng rng(77);
    double sum = 0, sq = 0;
    for (int i = 0; i < n; ++i) {
        double y = y0;
        for (int k = 0; k <= t; ++k) {
            const double eps = rng.normal();
            forward_step<double>({&y, 1}, k, {&eps, 1}, s, {&y, 1});
        }
        sum += y;
        sq += y * y;
    }
    const double mean = sum / n;
    const double var = sq / n - mean * mean;
    const double exp_mean = std::sqrt(s.alpha_bar[t]) * y0;
    const double exp_var = 1.0 - s.alpha_bar[t];
    // 5-sigma-ish Monte-Carlo tolerances.
    CHECK(std::abs(mean - exp_mean) < 5.0 * std::sqrt(exp_var / n));
    CHECK(std::abs(var - exp_var) < 5.0 * exp_var * std::sqrt(2.0 / n));
}

TEST_CASE("forward_step is linear in both arguments (superposition)") {
    const auto s = make_linear_schedule(50, 1e-4, 0.02);
    Rng rng(11);
    std::vector<double> y1(8), y2(8), e1(8), e2(8), lhs(8), a(8), b(8);
    rng.fill_normal<double>(y1);
    rng.fill_normal<double>(y2);
    rng.fill_normal<double>(e1);
    rng.fill_normal<double>(e2);
    std::vector<double> ysum(8), esum(8);
    for (int i = 0; i < 8; ++i) {
        ysum[i] = y1[i] + y2[i];
        esum[i] = e1[i] + e2[i];
    }
    forward_step<double>(ysum, 17, esum, s, lhs);
    forward_step<double>(y1, 17, e1, s, a);
    forward_step<double>(y2, 17, e2, s, b);
    for (int i = 0; i < 8; ++i) CHECK(lhs[i] == doctest::Approx(a[i] + b[i]).epsilon(1e-12));
}
