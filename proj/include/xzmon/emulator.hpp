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

#pragma once

/**
 * @file emulator.hpp
 * Classical spin that reproduces the monitored-qubit readouts.
 *
 * A unit vector in the x-z plane at angle theta diffuses under physical
 * white noise r~ with per-step variance tau/dt:
 *
 *   theta' = theta + r~ dt / tau,  so Var[theta(t) - theta(0)] = t / tau.
 *
 * An agent that knows theta and r~ publishes effective readouts using an
 * independent subjective noise s~ of the same variance,
 *
 *   r~_x = x + (-z r~ + x s~),   r~_z = z + (x r~ + z s~),
 *
 * with (x, z) = (cos theta, sin theta) taken at the start of the step. The
 * two effective noises are a rotation of (r~, s~), hence unit white and
 * uncorrelated, and on the unit circle (1 - x^2) r~_x - x z r~_z = -z r~.
 * The model is only valid for equal measurement times on both axes.
 */

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "bloch.hpp"
#include "integrators.hpp"
#include "measurement.hpp"
#include "noise.hpp"

namespace xzmon {

struct SpinState {
    double theta = 0.0; ///< unwrapped

    [[nodiscard]] double x() const noexcept { return std::cos(theta); }
    [[nodiscard]] double z() const noexcept { return std::sin(theta); }
    [[nodiscard]] BlochState bloch() const noexcept { return {x(), 0.0, z()}; }
};

[[nodiscard]] inline SpinState step_spin(const SpinState &s, double r_tilde, double dt, double tau) noexcept {
    return {s.theta + r_tilde * dt / tau};
}

struct EmulatorConfig {
    double tau = 1.0;
    double tau_x = 0.0; ///< 0 means "same as tau"; must equal tau_z
    double tau_z = 0.0;
    double dt_over_tau = 0.01;
    double duration = 10.0; ///< units of tau
    std::uint64_t seed = 1;
    std::uint64_t trajectory = 0;
    double theta0 = 0.0;
    /// When false no s~ is drawn and no readouts are formed; theta is unaffected.
    bool make_readouts = true;

    [[nodiscard]] double dt() const noexcept { return dt_over_tau * tau; }
    [[nodiscard]] std::size_t steps() const noexcept {
        return static_cast<std::size_t>(std::llround(duration / dt_over_tau));
    }

    void validate() const {
        const double tx = tau_x > 0.0 ? tau_x : tau;
        const double tz = tau_z > 0.0 ? tau_z : tau;
        if (tx != tz) {
            throw std::invalid_argument(
                "classical emulator requires equal measurement times on both axes (tau_x = tau_z); "
                "with unequal strengths a single diffusing angle cannot reproduce the readout statistics");
        }
        if (!(tau > 0.0) || !(duration > 0.0)) throw std::invalid_argument("emulator: tau and duration must be positive");
        MeasurementChannel{Axis::z, tau, dt()}.validate();
        if (!std::isfinite(theta0)) throw std::invalid_argument("emulator: theta0 must be finite");
    }
};

/// One emulator step: angle before and after, both noises, and the
/// published readouts (zero when readouts are not formed).
struct EmulatorStep {
    std::size_t k = 0;
    double theta_before = 0.0;
    double theta_after = 0.0;
    double r_tilde = 0.0;
    double s_tilde = 0.0;
    double rx_eff = 0.0;
    double rz_eff = 0.0;

    /// Effective noises in readout units.
    [[nodiscard]] double noise_x() const noexcept {
        return -std::sin(theta_before) * r_tilde + std::cos(theta_before) * s_tilde;
    }
    [[nodiscard]] double noise_z() const noexcept {
        return std::cos(theta_before) * r_tilde + std::sin(theta_before) * s_tilde;
    }
    /// The sample this step contributes to a StepSample-style sink.
    [[nodiscard]] StepSample as_step_sample(double tau) const noexcept {
        StepSample s;
        s.k = k;
        s.before = SpinState{theta_before}.bloch();
        s.after = SpinState{theta_after}.bloch();
        s.r_x = rx_eff;
        s.r_z = rz_eff;
        const double inv = 1.0 / std::sqrt(tau);
        s.xi_x = noise_x() * inv;
        s.xi_z = noise_z() * inv;
        return s;
    }
};

/// Both readouts from the pre-step angle.
[[nodiscard]] inline std::pair<double, double> effective_readouts(double theta, double r_tilde, double s_tilde) noexcept {
    const double x = std::cos(theta), z = std::sin(theta);
    return {x + (-z * r_tilde + x * s_tilde), z + (x * r_tilde + z * s_tilde)};
}

/// Streams: r~ on the physical channel, s~ on the subjective channel.
template <class Sink>
void simulate_emulator(const EmulatorConfig &cfg, Sink &&sink) {
    cfg.validate();
    NoiseStream physical(cfg.seed, stream_id(cfg.trajectory, NoiseChannel::physical));
    NoiseStream subjective(cfg.seed, stream_id(cfg.trajectory, NoiseChannel::subjective));
    const double dt = cfg.dt();
    const double spread = std::sqrt(cfg.tau / dt);
    SpinState s{cfg.theta0};
    EmulatorStep step;
    for (std::size_t k = 0, n = cfg.steps(); k < n; ++k) {
        step.k = k;
        step.theta_before = s.theta;
        step.r_tilde = spread * physical.standard_normal();
        if (cfg.make_readouts) {
            step.s_tilde = spread * subjective.standard_normal();
            const auto [rx, rz] = effective_readouts(s.theta, step.r_tilde, step.s_tilde);
            step.rx_eff = rx;
            step.rz_eff = rz;
        }
        s = step_spin(s, step.r_tilde, dt, cfg.tau);
        step.theta_after = s.theta;
        sink(static_cast<const EmulatorStep &>(step));
    }
}

/// Stored emulator run.
struct EmulatedReadouts {
    double dt = 0.0;
    double tau = 1.0;
    std::uint64_t seed = 0;
    std::uint64_t r_tilde_stream = 0;
    std::uint64_t s_tilde_stream = 0;
    std::vector<double> theta;   ///< size n + 1; theta[k] at t = k dt
    std::vector<double> r_tilde; ///< size n
    std::vector<double> s_tilde; ///< size n, empty when readouts were not formed
    std::vector<double> r_x;     ///< effective readouts, size n (or empty)
    std::vector<double> r_z;

    [[nodiscard]] std::size_t size() const noexcept { return r_tilde.size(); }
    [[nodiscard]] bool has_readouts() const noexcept { return !r_x.empty(); }

    /// The published record, as a third party sees it.
    [[nodiscard]] ReadoutRecord readout_record() const {
        if (!has_readouts()) throw std::logic_error("emulator run has no readouts");
        return ReadoutRecord{dt, tau, tau, tau, r_x, r_z};
    }
};

[[nodiscard]] inline EmulatedReadouts run_emulator(const EmulatorConfig &cfg) {
    cfg.validate();
    EmulatedReadouts out;
    out.dt = cfg.dt();
    out.tau = cfg.tau;
    out.seed = cfg.seed;
    out.r_tilde_stream = stream_id(cfg.trajectory, NoiseChannel::physical);
    out.s_tilde_stream = stream_id(cfg.trajectory, NoiseChannel::subjective);
    const std::size_t n = cfg.steps();
    out.theta.reserve(n + 1);
    out.theta.push_back(cfg.theta0);
    out.r_tilde.reserve(n);
    if (cfg.make_readouts) {
        out.s_tilde.reserve(n);
        out.r_x.reserve(n);
        out.r_z.reserve(n);
    }
    simulate_emulator(cfg, [&](const EmulatorStep &st) {
        out.theta.push_back(st.theta_after);
        out.r_tilde.push_back(st.r_tilde);
        if (cfg.make_readouts) {
            out.s_tilde.push_back(st.s_tilde);
            out.r_x.push_back(st.rx_eff);
            out.r_z.push_back(st.rz_eff);
        }
    });
    return out;
}

/**
 * Forms effective readouts for a given angle path and physical noise with
 * s~ drawn from the supplied stream.
 */
[[nodiscard]] inline EmulatedReadouts make_effective_readouts(std::span<const double> theta,
                                                              std::span<const double> r_tilde, NoiseStream &s_tilde,
                                                              double dt, double tau) {
    if (theta.size() != r_tilde.size() + 1) {
        throw std::invalid_argument("make_effective_readouts: theta path must have one more entry than r~");
    }
    MeasurementChannel{Axis::z, tau, dt}.validate();
    EmulatedReadouts out;
    out.dt = dt;
    out.tau = tau;
    out.s_tilde_stream = s_tilde.id();
    out.theta.assign(theta.begin(), theta.end());
    out.r_tilde.assign(r_tilde.begin(), r_tilde.end());
    const double spread = std::sqrt(tau / dt);
    out.s_tilde.reserve(r_tilde.size());
    out.r_x.reserve(r_tilde.size());
    out.r_z.reserve(r_tilde.size());
    for (std::size_t k = 0; k < r_tilde.size(); ++k) {
        const double s = spread * s_tilde.standard_normal();
        const auto [rx, rz] = effective_readouts(theta[k], r_tilde[k], s);
        out.s_tilde.push_back(s);
        out.r_x.push_back(rx);
        out.r_z.push_back(rz);
    }
    return out;
}

/// max_k |(1 - x^2) r~_x - x z r~_z + z r~| with (x, z) at the start of step k.
[[nodiscard]] inline double reconstruction_identity_residual(const EmulatedReadouts &rd) {
    if (!rd.has_readouts()) throw std::invalid_argument("reconstruction identity: run has no readouts");
    double worst = 0.0;
    for (std::size_t k = 0; k < rd.size(); ++k) {
        const double x = std::cos(rd.theta[k]), z = std::sin(rd.theta[k]);
        const double v = (1.0 - x * x) * rd.r_x[k] - x * z * rd.r_z[k] + z * rd.r_tilde[k];
        worst = std::max(worst, std::abs(v));
    }
    return worst;
}

/// A third party integrates the published readouts from its own initial guess.
[[nodiscard]] inline TrajectoryRecord third_party_reconstruct(const EmulatedReadouts &rd, const BlochState &initial,
                                                              Scheme scheme = Scheme::stratonovich) {
    return integrate_readouts(scheme, initial, rd.readout_record());
}

/// Sup over the run of the Bloch distance between a reconstruction and the spin.
[[nodiscard]] inline double reconstruction_error(const EmulatedReadouts &rd, const TrajectoryRecord &rec) {
    if (rec.stride != 1 || rec.states.size() != rd.theta.size()) {
        throw std::invalid_argument("reconstruction_error: record does not match the emulator run");
    }
    double worst = 0.0;
    for (std::size_t k = 0; k < rd.theta.size(); ++k) {
        worst = std::max(worst, bloch_distance(rec.states[k], SpinState{rd.theta[k]}.bloch()));
    }
    return worst;
}

}  // namespace xzmon
