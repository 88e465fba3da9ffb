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
#include <numbers>
#include <vector>

#include <xzmon/leggett_garg.hpp>

using namespace xzmon;
using Catch::Matchers::WithinAbs;

namespace {

const ReadoutRecord &long_record() {
    static const ReadoutRecord rec = [] {
        RunConfig rc;
        rc.duration = 2e4;
        return run_kraus({0, 0, 1}, rc).readouts;
    }();
    return rec;
}

} // namespace

TEST_CASE("rotated readout is the linear combination", "[lg]") {
    ReadoutRecord rec{0.01, 1.0, 1.0, 1.0, {1.0, 2.0}, {3.0, -1.0}};
    const auto r = rotate_readout(rec, std::numbers::pi / 2);
    CHECK_THAT(r.samples[0], WithinAbs(3.0, 1e-15));
    CHECK_THAT(r.samples[1], WithinAbs(-1.0, 1e-15));
    CHECK(r.source == &rec);
}

TEST_CASE("rotated correlators are phi invariant", "[lg]") {
    CorrelationOptions co;
    co.bin_width = 0.25;
    co.max_lag = 3.0;
    for (const double phi : {0.0, 0.4, std::numbers::pi / 4, 1.3}) {
        const auto a = phi_autocorrelator(long_record(), phi, co);
        const auto o = phi_orthogonal_correlator(long_record(), phi, co);
        for (std::size_t i = 0; i < a.size(); ++i) {
            CHECK(std::abs(a.values[i] - a.theory[i]) < 5.0 * a.std_errors[i]);
            CHECK(std::abs(o.values[i]) < 5.0 * o.std_errors[i]);
        }
    }
}

TEST_CASE("continuous LG combination agrees with its theory", "[lg]") {
    CorrelationOptions co;
    co.bin_width = 0.1;
    const auto r = lg_combination(long_record(), std::numbers::pi / 4, 0.1, co);
    CHECK(std::abs(r.lhs - r.theory) < 5.0 * r.std_error);
    CHECK_THAT(r.theory, WithinAbs(std::sqrt(2.0) * std::exp(-0.05), 2e-3));
    CHECK(r.violated());
    const auto m = lg_combination(long_record(), -std::numbers::pi / 4, 0.1, co);
    CHECK_FALSE(m.violated());
    CHECK_THROWS_AS(lg_combination(long_record(), 0.0, 0.15, co), std::invalid_argument);
}

TEST_CASE("violation boundary interpolates the first crossing", "[lg]") {
    std::vector<LGResult> scan(3);
    scan[0].t = 0.5, scan[0].lhs = 1.2;
    scan[1].t = 0.6, scan[1].lhs = 1.1;
    scan[2].t = 0.7, scan[2].lhs = 0.9;
    const auto t = violation_boundary(scan);
    REQUIRE(t);
    CHECK_THAT(*t, WithinAbs(0.65, 1e-12));
    scan[2].lhs = 1.05;
    CHECK_FALSE(violation_boundary(scan));
    CHECK_THAT(violation_boundary_theory(std::numbers::pi / 4), WithinAbs(std::log(2.0), 1e-15));
}

TEST_CASE("Rabi rotation about x", "[lg]") {
    const auto s = rabi_rotate({0, 0, 1}, 1.0, std::numbers::pi / 2);
    CHECK(bloch_distance(s, {0, -1, 0}) < 1e-15);
}

TEST_CASE("projective three-time correlator", "[lg]") {
    ProjectiveLGConfig cfg;
    cfg.n_shots = 40000;
    const auto r = projective_lg(cfg);
    CHECK_THAT(r.theory, WithinAbs(1.5, 1e-12));
    CHECK(std::abs(r.lhs - 1.5) < 4.0 * r.std_error);
    CHECK(r.violated());
    cfg.delta_t = std::numbers::pi / 2; // 2cos(pi/2) - cos(pi) = 1
    const auto b = projective_lg(cfg);
    CHECK_THAT(b.theory, WithinAbs(1.0, 1e-12));
    CHECK_FALSE(b.violated());
    cfg.n_shots = 0;
    CHECK_THROWS_AS(projective_lg(cfg), std::invalid_argument);
}

TEST_CASE("projective correlator of an eigenstate", "[lg]") {
    // <z(0) z(t)> = cos(Omega t) for a first outcome drawn from |+z>.
    ProjectiveLGConfig cfg;
    cfg.n_shots = 40000;
    NoiseStream shots(5, 0);
    const auto [m, se] = projective_correlator(cfg, 0.0, 1.0, shots);
    CHECK(std::abs(m - std::cos(1.0)) < 4.0 * se);
}
