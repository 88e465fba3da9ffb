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
#include <vector>

#include <xzmon/emulator.hpp>
#include <xzmon/leggett_garg.hpp>

using namespace xzmon;
using Catch::Matchers::WithinAbs;

TEST_CASE("angle diffuses at rate one over tau", "[emulator]") {
    EmulatorConfig c;
    c.duration = 2.0;
    c.make_readouts = false;
    const std::size_t n = 4000;
    double s = 0, s2 = 0;
    for (std::size_t i = 0; i < n; ++i) {
        c.trajectory = i;
        const auto rd = run_emulator(c);
        const double d = rd.theta.back() - rd.theta.front();
        s += d;
        s2 += d * d;
    }
    const double var = s2 / n - (s / n) * (s / n);
    CHECK(std::abs(var / 2.0 - 1.0) < 4.0 * std::sqrt(2.0 / n));
}

TEST_CASE("switching off the subjective noise leaves the angle bit-identical", "[emulator]") {
    EmulatorConfig on, off;
    on.trajectory = off.trajectory = 4;
    off.make_readouts = false;
    const auto a = run_emulator(on), b = run_emulator(off);
    CHECK(a.theta == b.theta);
    CHECK(a.r_tilde == b.r_tilde);
    CHECK(b.s_tilde.empty());
    CHECK_FALSE(b.has_readouts());
    CHECK_THROWS_AS((void)b.readout_record(), std::logic_error);
}

TEST_CASE("reconstruction identity holds to rounding", "[emulator]") {
    const auto rd = run_emulator(EmulatorConfig{});
    CHECK(reconstruction_identity_residual(rd) < 1e-12);
}

TEST_CASE("effective readouts are unbiased with unit white noise", "[emulator]") {
    // Fixed angle: E[r_x] = cos theta, Var = tau/dt for both channels, no cross term.
    const double theta = 0.9, spread = 10.0;
    NoiseStream p(1, 1), q(1, 2);
    const std::size_t n = 400000;
    double mx = 0, mz = 0, vx = 0, vz = 0, cxz = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const auto [rx, rz] = effective_readouts(theta, spread * p.standard_normal(), spread * q.standard_normal());
        mx += rx, mz += rz;
        vx += (rx - std::cos(theta)) * (rx - std::cos(theta));
        vz += (rz - std::sin(theta)) * (rz - std::sin(theta));
        cxz += (rx - std::cos(theta)) * (rz - std::sin(theta));
    }
    const double nn = static_cast<double>(n);
    CHECK(std::abs(mx / nn - std::cos(theta)) < 4.0 * spread / std::sqrt(nn));
    CHECK(std::abs(mz / nn - std::sin(theta)) < 4.0 * spread / std::sqrt(nn));
    CHECK(std::abs(vx / nn / 100.0 - 1.0) < 4.0 * std::sqrt(2.0 / nn));
    CHECK(std::abs(vz / nn / 100.0 - 1.0) < 4.0 * std::sqrt(2.0 / nn));
    CHECK(std::abs(cxz / nn / 100.0) < 4.0 / std::sqrt(nn));
}

TEST_CASE("emulated readouts carry the qubit correlator", "[emulator]") {
    EmulatorConfig c;
    c.duration = 2e4;
    const auto rd = run_emulator(c);
    CorrelationOptions co;
    co.bin_width = 0.25;
    co.max_lag = 3.0;
    const auto xx = autocorrelate(rd.readout_record(), ReadoutPair::xx, co);
    for (std::size_t i = 0; i < xx.size(); ++i) CHECK(std::abs(xx.values[i] - xx.theory[i]) < 5.0 * xx.std_errors[i]);
    co.bin_width = 0.1;
    const auto lg = lg_combination(rd.readout_record(), std::numbers::pi / 4, 0.1, co);
    CHECK(lg.violated());
}

TEST_CASE("step samples expose the effective noises", "[emulator]") {
    std::vector<EmulatorStep> steps;
    EmulatorConfig c;
    c.duration = 0.05;
    simulate_emulator(c, [&](const EmulatorStep &s) { steps.push_back(s); });
    REQUIRE(steps.size() == 5);
    const auto &s = steps[2];
    const auto sample = s.as_step_sample(1.0);
    CHECK_THAT(sample.r_x - sample.before.x, WithinAbs(s.noise_x(), 1e-12));
    CHECK_THAT(sample.r_z - sample.before.z, WithinAbs(s.noise_z(), 1e-12));
    CHECK(steps[3].theta_before == s.theta_after);
}

TEST_CASE("third-party reconstruction stays near the spin but not within a few percent", "[emulator]") {
    EmulatorConfig c;
    const auto rd = run_emulator(c);
    const auto rec = third_party_reconstruct(rd, SpinState{c.theta0}.bloch());
    const double err = reconstruction_error(rd, rec);
    // Left-point angle update against any consistent integrator: strong order one half.
    CHECK(err > 0.0);
    CHECK(err < 1.0);
    for (const auto &s : rec.states) CHECK(bloch_ball_check(s));
}

TEST_CASE("effective readouts from a supplied path", "[emulator]") {
    const auto base = run_emulator(EmulatorConfig{});
    NoiseStream s(1, stream_id(0, NoiseChannel::subjective));
    const auto rd = make_effective_readouts(base.theta, base.r_tilde, s, base.dt, base.tau);
    CHECK(rd.r_x == base.r_x);
    CHECK(rd.s_tilde_stream == base.s_tilde_stream);
    CHECK_THROWS_AS(make_effective_readouts(std::span(base.theta).first(3), base.r_tilde, s, base.dt, base.tau),
                    std::invalid_argument);
}

TEST_CASE("unequal measurement times are refused", "[emulator]") {
    EmulatorConfig c;
    c.tau_x = 1.0;
    c.tau_z = 2.0;
    CHECK_THROWS_WITH(run_emulator(c), Catch::Matchers::ContainsSubstring("tau_x = tau_z"));
    c.tau_z = 1.0;
    CHECK_NOTHROW(c.validate());
    c.dt_over_tau = 0.5;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
}
