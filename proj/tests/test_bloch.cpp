// Copyright 2026 The xzmon Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <catch_amalgamated.hpp>

#include <cmath>
#include <limits>
#include <numbers>

#include <xzmon/bloch.hpp>

using namespace xzmon;
using Catch::Matchers::WithinAbs;

TEST_CASE("density matrix round trip", "[bloch]") {
    for (const BlochState s : {BlochState{0, 0, 1}, BlochState{0.3, -0.4, 0.5}, BlochState{0.6, 0.0, -0.8},
                               BlochState{0, 0, 0}}) {
        const auto m = bloch_to_density(s);
        CHECK_THAT(m.trace().real(), WithinAbs(1.0, 1e-15));
        CHECK(m.hermiticity_error() < 1e-15);
        // det rho = (1 - |s|^2) / 4
        CHECK_THAT(m.determinant(), WithinAbs(0.25 * (1.0 - s.norm2()), 1e-15));
        const auto back = density_to_bloch(m);
        CHECK(bloch_distance(back, s) < 1e-15);
    }
}

TEST_CASE("density matrix entries follow the Pauli expansion", "[bloch]") {
    const auto m = bloch_to_density({0.2, 0.4, -0.6});
    CHECK_THAT(m.rho00.real(), WithinAbs(0.2, 1e-15));
    CHECK_THAT(m.rho11.real(), WithinAbs(0.8, 1e-15));
    CHECK_THAT(m.rho01.real(), WithinAbs(0.1, 1e-15));
    CHECK_THAT(m.rho01.imag(), WithinAbs(-0.2, 1e-15));
}

TEST_CASE("invalid states are rejected", "[bloch]") {
    CHECK_THROWS_AS(bloch_to_density({1.0, 1.0, 0.0}), std::invalid_argument);
    CHECK_THROWS_AS(bloch_to_density({std::numeric_limits<double>::quiet_NaN(), 0, 0}), std::invalid_argument);
    DensityMatrixView m;
    m.rho00 = {0.7, 0.0};
    CHECK_THROWS_AS(density_to_bloch(m), std::invalid_argument); // trace 1.2
    DensityMatrixView h;
    h.rho01 = {0.1, 0.0};
    h.rho10 = {0.2, 0.0};
    CHECK_THROWS_AS(density_to_bloch(h), std::invalid_argument);
}

TEST_CASE("ball and purity predicates", "[bloch]") {
    CHECK(bloch_ball_check({0, 0, 1}));
    CHECK(bloch_ball_check({0, 0, 1.0 + 1e-10}));
    CHECK_FALSE(bloch_ball_check({0, 0, 1.0 + 1e-8}));
    CHECK(is_pure({0.6, 0, 0.8}));
    CHECK_FALSE(is_pure({0.5, 0, 0.5}));
    CHECK_THAT(project_direction({1, 0, 0}, std::numbers::pi / 3), WithinAbs(0.5, 1e-15));
    CHECK_THAT(bloch_distance({1, 0, 0}, {0, 0, 1}), WithinAbs(std::sqrt(2.0), 1e-15));
}
