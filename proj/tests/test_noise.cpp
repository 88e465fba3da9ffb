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

#include <xzmon/noise.hpp>

using namespace xzmon;

namespace {

struct Moments {
    double mean = 0, var = 0;
};

template <class Draw>
Moments moments(std::size_t n, Draw &&draw) {
    double s = 0, s2 = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double v = draw();
        s += v;
        s2 += v * v;
    }
    const double m = s / static_cast<double>(n);
    return {m, s2 / static_cast<double>(n) - m * m};
}

} // namespace

TEST_CASE("splitmix64 reference output", "[noise]") {
    // First output of the reference generator seeded with 0.
    CHECK(splitmix64(0) == 0xe220a8397b1dcdafULL);
}

TEST_CASE("stream ids pack trajectory and channel", "[noise]") {
    CHECK(stream_id(0, NoiseChannel::readout_x) == 0);
    CHECK(stream_id(3, NoiseChannel::shots) == (3u << 8 | 6u));
    CHECK(stream_id(1, NoiseChannel::readout_x) != stream_id(0, NoiseChannel::branch_x));
}

TEST_CASE("streams are reproducible and independent", "[noise]") {
    NoiseStream a(7, 11), b(7, 11), c(7, 12), d(8, 11);
    std::vector<double> va, vb, vc, vd;
    for (int i = 0; i < 100; ++i) {
        va.push_back(a.standard_normal());
        vb.push_back(b.standard_normal());
        vc.push_back(c.standard_normal());
        vd.push_back(d.standard_normal());
    }
    CHECK(va == vb);
    CHECK(va != vc);
    CHECK(va != vd);
    CHECK(a.id() == 11);
    CHECK(a.seed() == 7);
}

TEST_CASE("standard normal moments", "[noise]") {
    NoiseStream s(1, 0);
    const std::size_t n = 400000;
    const auto m = moments(n, [&] { return s.standard_normal(); });
    CHECK(std::abs(m.mean) < 4.0 / std::sqrt(static_cast<double>(n)));
    CHECK(std::abs(m.var - 1.0) < 4.0 * std::sqrt(2.0 / static_cast<double>(n)));
}

TEST_CASE("uniform moments", "[noise]") {
    NoiseStream s(2, 0);
    const std::size_t n = 400000;
    const auto m = moments(n, [&] { return s.uniform(); });
    CHECK(std::abs(m.mean - 0.5) < 4.0 * std::sqrt(1.0 / 12.0 / static_cast<double>(n)));
    CHECK(std::abs(m.var - 1.0 / 12.0) < 1e-3);
}

TEST_CASE("white-noise increments have variance 1/dt", "[noise]") {
    NoiseStream s(3, 5);
    const double dt = 0.01;
    const std::size_t n = 200000;
    const auto m = moments(n, [&] { return s.next_increment(dt).value; });
    CHECK(std::abs(m.var * dt - 1.0) < 4.0 * std::sqrt(2.0 / static_cast<double>(n)));
    CHECK_THROWS_AS(s.next_increment(0.0), std::invalid_argument);
}

TEST_CASE("rotated noise stays unit white and is uncorrelated with its orthogonal partner", "[noise]") {
    NoiseStream sx(4, 1), sz(4, 2);
    const double dt = 0.01, phi = 0.7;
    const std::size_t n = 200000;
    double s11 = 0, s22 = 0, s12 = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const auto x = sx.next_increment(dt), z = sz.next_increment(dt);
        const double a = rotate_noise(x, z, phi).value * std::sqrt(dt);
        const double b = rotate_noise(x, z, phi + std::numbers::pi / 2).value * std::sqrt(dt);
        s11 += a * a;
        s22 += b * b;
        s12 += a * b;
    }
    const double nn = static_cast<double>(n), tol = 4.0 * std::sqrt(2.0 / nn);
    CHECK(std::abs(s11 / nn - 1.0) < tol);
    CHECK(std::abs(s22 / nn - 1.0) < tol);
    CHECK(std::abs(s12 / nn) < 4.0 / std::sqrt(nn));
    CHECK_THROWS_AS(rotate_noise({1.0, 0.01}, {1.0, 0.02}, 0.0), std::invalid_argument);
}

TEST_CASE("muted streams are silent", "[noise]") {
    auto m = NoiseStream::muted();
    CHECK(m.is_muted());
    CHECK(m.standard_normal() == 0.0);
    CHECK(m.uniform() == 0.5);
}
