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

#include <array>
#include <cmath>
#include <complex>
#include <numbers>

#include <xzmon/measurement.hpp>

using namespace xzmon;
using Catch::Matchers::WithinAbs;

namespace {

// Independent oracle: explicit 2x2 operators.
using cd = std::complex<double>;
using Mat = std::array<std::array<cd, 2>, 2>;

Mat mul(const Mat &a, const Mat &b) {
    Mat c{};
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            for (int k = 0; k < 2; ++k) c[i][j] += a[i][k] * b[k][j];
    return c;
}

Mat dagger(const Mat &a) {
    Mat c{};
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) c[i][j] = std::conj(a[j][i]);
    return c;
}

Mat rho_of(const BlochState &s) {
    return Mat{{{cd(0.5 * (1 + s.z)), cd(0.5 * s.x, -0.5 * s.y)}, {cd(0.5 * s.x, 0.5 * s.y), cd(0.5 * (1 - s.z))}}};
}

BlochState bloch_of(const Mat &m) {
    return {2.0 * m[0][1].real(), -2.0 * m[0][1].imag(), (m[0][0] - m[1][1]).real()};
}

// Gaussian Kraus operator exp(-k (r - sigma)^2 / 4) for sigma_z; sigma_x by a Hadamard conjugation.
Mat kraus_operator(double r, double k, Axis axis) {
    const double pre = std::pow(k / (2 * std::numbers::pi), 0.25);
    Mat mz{{{cd(pre * std::exp(-k * (r - 1) * (r - 1) / 4)), cd(0)}, {cd(0), cd(pre * std::exp(-k * (r + 1) * (r + 1) / 4))}}};
    if (axis == Axis::z) return mz;
    const double h = 1.0 / std::sqrt(2.0);
    Mat H{{{cd(h), cd(h)}, {cd(h), cd(-h)}}};
    return mul(H, mul(mz, H));
}

BlochState oracle_update(const BlochState &s, double r, double k, Axis axis) {
    const Mat m = kraus_operator(r, k, axis);
    Mat out = mul(m, mul(rho_of(s), dagger(m)));
    const cd tr = out[0][0] + out[1][1];
    for (auto &row : out)
        for (auto &v : row) v /= tr;
    return bloch_of(out);
}

} // namespace

TEST_CASE("closed-form Kraus update matches the matrix oracle", "[measurement]") {
    const BlochState states[] = {{0, 0, 1}, {0.3, -0.4, 0.5}, {0.6, 0.0, -0.8}, {0, 0, 0}, {-0.2, 0.9, 0.1}};
    for (const double k : {0.001, 0.01, 0.1}) {
        for (const double r : {-25.0, -3.0, -0.5, 0.0, 1.0, 4.0, 30.0}) {
            for (const auto &s : states) {
                for (const Axis a : {Axis::x, Axis::z}) {
                    const MeasurementChannel ch{a, 1.0, k};
                    CHECK(bloch_distance(kraus_update(s, r, ch), oracle_update(s, r, k, a)) < 1e-13);
                }
            }
        }
    }
}

TEST_CASE("reference increment from the maximally mixed state", "[measurement]") {
    // r = 1 at dt/tau = 0.01 moves z from 0 to tanh(0.01).
    const auto s = kraus_update({0, 0, 0}, 1.0, {Axis::z, 1.0, 0.01});
    CHECK_THAT(s.z, WithinAbs(0.00999966667999946, 1e-16));
    CHECK(s.x == 0.0);
}

TEST_CASE("Bayes odds update", "[measurement]") {
    // (1+z')/(1-z') = (1+z)/(1-z) * exp(2 r dt / tau)
    const double z = 0.3, r = 2.5, k = 0.02;
    const auto s = kraus_update({0, 0, z}, r, {Axis::z, 2.0, 2.0 * k});
    const double odds = (1 + s.z) / (1 - s.z);
    CHECK_THAT(odds, WithinAbs((1 + z) / (1 - z) * std::exp(2 * r * k), 1e-12));
}

TEST_CASE("Kraus update preserves purity", "[measurement]") {
    BlochState s{0.6, 0.0, 0.8};
    const MeasurementChannel cx{Axis::x, 1.0, 0.01}, cz{Axis::z, 1.0, 0.01};
    for (int i = 0; i < 1000; ++i) s = apply_readouts(s, 7.0 * std::sin(i), -5.0 * std::cos(0.7 * i), cx, cz);
    CHECK(std::abs(s.norm2() - 1.0) < 1e-12);
}

TEST_CASE("readout mixture moments", "[measurement]") {
    // z = 0.5 at tau/dt = 100: mean 0.5, variance tau/dt + 1 - z^2 = 100.75.
    const MeasurementChannel ch{Axis::z, 1.0, 0.01};
    auto streams = ChannelStreams::make(9, 0, Axis::z);
    const std::size_t n = 1000000;
    double s = 0, s2 = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double r = sample_readout({0, 0, 0.5}, ch, streams);
        s += r;
        s2 += r * r;
    }
    const double nn = static_cast<double>(n), m = s / nn, v = s2 / nn - m * m;
    CHECK(std::abs(m - 0.5) < 4.0 * std::sqrt(100.75 / nn));
    CHECK(std::abs(v - 100.75) < 4.0 * 100.75 * std::sqrt(2.0 / nn));
}

TEST_CASE("readouts of an eigenstate fall within two standard deviations at the Gaussian rate", "[measurement]") {
    const MeasurementChannel ch{Axis::x, 1.0, 0.01};
    auto streams = ChannelStreams::make(10, 0, Axis::x);
    const std::size_t n = 200000;
    std::size_t inside = 0;
    for (std::size_t i = 0; i < n; ++i) inside += std::abs(sample_readout({1, 0, 0}, ch, streams) - 1.0) < 20.0;
    const double p = std::erf(2.0 / std::sqrt(2.0));
    const double frac = static_cast<double>(inside) / static_cast<double>(n);
    CHECK(std::abs(frac - p) < 4.0 * std::sqrt(p * (1 - p) / static_cast<double>(n)));
}

TEST_CASE("POVM elements integrate to the identity", "[measurement]") {
    for (const double k : {0.001, 0.01, 0.1}) CHECK(povm_normalization_check({Axis::z, 1.0, k}) < 1e-10);
    CHECK_THROWS_AS(povm_normalization_check({Axis::z, 1.0, 0.01}, {5.0, 4000}), std::invalid_argument);
    CHECK_THROWS_AS(povm_mass_deviation({Axis::z, 1.0, 0.01}, {8.0, 3}), std::invalid_argument);
}

TEST_CASE("weak-measurement limit is enforced", "[measurement]") {
    CHECK_THROWS_AS((MeasurementChannel{Axis::z, 1.0, 0.2}.validate()), std::invalid_argument);
    CHECK_THROWS_AS((MeasurementChannel{Axis::z, -1.0, 0.01}.validate()), std::invalid_argument);
    CHECK_NOTHROW((MeasurementChannel{Axis::z, 1.0, 0.1}.validate()));
    CHECK((MeasurementChannel{Axis::z, 1.0, 0.05}.coarse()));
}

TEST_CASE("update order matters at second order in the step", "[measurement]") {
    const BlochState s{0.48, 0.6, 0.64};
    double prev = 0.0;
    for (const double k : {0.02, 0.01}) {
        const double e = sequencing_error(s, 1.5, -0.7, {Axis::x, 1.0, k}, {Axis::z, 1.0, k});
        if (prev > 0.0) CHECK_THAT(prev / e, WithinAbs(4.0, 0.2));
        prev = e;
    }
}

TEST_CASE("joint step samples the second readout from the intermediate state", "[measurement]") {
    auto xs = ChannelStreams::make(3, 0, Axis::x), zs = ChannelStreams::make(3, 0, Axis::z);
    auto xs2 = ChannelStreams::make(3, 0, Axis::x), zs2 = ChannelStreams::make(3, 0, Axis::z);
    const MeasurementChannel cx{Axis::x, 1.0, 0.01}, cz{Axis::z, 1.0, 0.01};
    const BlochState s{0.6, 0, 0.8};
    const auto o = joint_step(s, cx, cz, xs, zs);
    const double rx = sample_readout(s, cx, xs2);
    const auto mid = kraus_update(s, rx, cx);
    const double rz = sample_readout(mid, cz, zs2);
    CHECK(o.r_x == rx);
    CHECK(o.r_z == rz);
    CHECK(o.state == kraus_update(mid, rz, cz));
    CHECK_THROWS_AS(joint_step(s, cx, {Axis::z, 1.0, 0.02}, xs, zs), std::invalid_argument);
}
