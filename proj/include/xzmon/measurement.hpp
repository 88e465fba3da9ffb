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
 * @file measurement.hpp
 * Gaussian weak-measurement kernel for sigma_x and sigma_z.
 *
 * A measurement of duration dt with characteristic time tau has Kraus
 * operator M(r) = (dt / 2 pi tau)^(1/4) exp[-(dt / 2 tau) (r - A)^2 / 2],
 * diagonal in the eigenbasis of A. For A = sigma_z and w = r dt / tau the
 * normalized update reduces to
 *
 *   z' = (z cosh w + sinh w) / (cosh w + z sinh w)
 *   x' = x / (cosh w + z sinh w),  y' = y / (cosh w + z sinh w)
 *
 * and the sigma_x channel is the same map with x and z exchanged.
 */

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "bloch.hpp"
#include "noise.hpp"

namespace xzmon {

enum class Axis { x, z };

[[nodiscard]] inline double component(const BlochState &s, Axis a) noexcept { return a == Axis::x ? s.x : s.z; }

inline constexpr double kMaxStepRatio = 0.1;
inline constexpr double kCoarseStepRatio = 0.02;

struct MeasurementChannel {
    Axis axis = Axis::z;
    double tau = 1.0;
    double dt = 0.01;

    [[nodiscard]] double step_ratio() const noexcept { return dt / tau; }
    /// Per-step readout variance around an eigenvalue, tau / dt.
    [[nodiscard]] double readout_variance() const noexcept { return tau / dt; }
    /// True when dt/tau is above the recommended 0.02.
    [[nodiscard]] bool coarse() const noexcept { return step_ratio() > kCoarseStepRatio; }

    void validate() const {
        if (!(tau > 0.0) || !std::isfinite(tau)) {
            throw std::invalid_argument("measurement channel: tau must be positive");
        }
        if (!(dt > 0.0) || !std::isfinite(dt)) {
            throw std::invalid_argument("measurement channel: dt must be positive");
        }
        if (step_ratio() > kMaxStepRatio) {
            throw std::invalid_argument("measurement channel: dt/tau = " + std::to_string(step_ratio()) +
                                        " exceeds the weak-measurement limit 0.1");
        }
    }
};

/// The two streams a channel draws from: the Gaussian spread and the
/// mixture-component choice.
struct ChannelStreams {
    NoiseStream spread;
    NoiseStream branch;

    static ChannelStreams make(std::uint64_t seed, std::uint64_t trajectory, Axis axis) {
        const bool is_x = axis == Axis::x;
        return {NoiseStream(seed, stream_id(trajectory, is_x ? NoiseChannel::readout_x : NoiseChannel::readout_z)),
                NoiseStream(seed, stream_id(trajectory, is_x ? NoiseChannel::branch_x : NoiseChannel::branch_z))};
    }
    static ChannelStreams muted() { return {NoiseStream::muted(), NoiseStream::muted()}; }
};

/**
 * Draws r from P(r | rho) = Tr[rho E(r)]: eigenvalue +1 with probability
 * (1 + a)/2, else -1, plus a N(0, tau/dt) spread.
 */
[[nodiscard]] inline double sample_readout(const BlochState &s, const MeasurementChannel &ch, ChannelStreams &streams) {
    if (!s.finite() || !bloch_ball_check(s)) {
        throw std::invalid_argument("sample_readout: invalid state");
    }
    const double a = component(s, ch.axis);
    const double eigenvalue = streams.branch.uniform() < 0.5 * (1.0 + a) ? 1.0 : -1.0;
    const double spread = std::sqrt(ch.readout_variance()) * streams.spread.standard_normal();
    if (streams.branch.is_muted()) {
        // The noiseless limit reports the mean, not a branch.
        return a + spread;
    }
    return eigenvalue + spread;
}

/// M(r) rho M(r)^dagger / Tr[rho E(r)] in closed form.
[[nodiscard]] inline BlochState kraus_update(const BlochState &s, double r, const MeasurementChannel &ch) {
    if (!std::isfinite(r)) {
        throw std::invalid_argument("kraus_update: non-finite readout");
    }
    const double w = r * ch.dt / ch.tau;
    const double t = std::tanh(w);
    const double sech = 1.0 / std::cosh(w);
    if (ch.axis == Axis::z) {
        const double norm = 1.0 + s.z * t;
        return {s.x * sech / norm, s.y * sech / norm, (s.z + t) / norm};
    }
    const double norm = 1.0 + s.x * t;
    return {(s.x + t) / norm, s.y * sech / norm, s.z * sech / norm};
}

enum class UpdateOrder { x_then_z, z_then_x };

/// Applies both readouts to a state, in the given order.
[[nodiscard]] inline BlochState apply_readouts(const BlochState &s, double r_x, double r_z, const MeasurementChannel &chx,
                                               const MeasurementChannel &chz,
                                               UpdateOrder order = UpdateOrder::x_then_z) {
    if (order == UpdateOrder::x_then_z) {
        return kraus_update(kraus_update(s, r_x, chx), r_z, chz);
    }
    return kraus_update(kraus_update(s, r_z, chz), r_x, chx);
}

/// Distance between the (x, z) and (z, x) update orders for fixed readouts.
[[nodiscard]] inline double sequencing_error(const BlochState &s, double r_x, double r_z, const MeasurementChannel &chx,
                                             const MeasurementChannel &chz) {
    return bloch_distance(apply_readouts(s, r_x, r_z, chx, chz, UpdateOrder::x_then_z),
                          apply_readouts(s, r_x, r_z, chx, chz, UpdateOrder::z_then_x));
}

struct JointOutcome {
    BlochState state;
    double r_x = 0.0;
    double r_z = 0.0;
    /// Effective white noise (r - component) / sqrt(tau) of each readout,
    /// taken against the state the readout was sampled from.
    double xi_x = 0.0;
    double xi_z = 0.0;
};

/**
 * One time step of simultaneous monitoring: r_x is sampled from the
 * pre-step state and applied, then r_z is sampled from the intermediate
 * state and applied (rho -> M_z M_x rho M_x^dag M_z^dag / N).
 */
[[nodiscard]] inline JointOutcome joint_step(const BlochState &s, const MeasurementChannel &chx,
                                             const MeasurementChannel &chz, ChannelStreams &x_streams,
                                             ChannelStreams &z_streams) {
    if (chx.dt != chz.dt) {
        throw std::invalid_argument("joint_step: channels use different dt");
    }
    JointOutcome out;
    out.r_x = sample_readout(s, chx, x_streams);
    out.xi_x = (out.r_x - s.x) / std::sqrt(chx.tau);
    const BlochState mid = kraus_update(s, out.r_x, chx);
    out.r_z = sample_readout(mid, chz, z_streams);
    out.xi_z = (out.r_z - mid.z) / std::sqrt(chz.tau);
    out.state = kraus_update(mid, out.r_z, chz);
    return out;
}

/// Readout grid for the POVM normalization check, centred on each eigenvalue.
struct QuadratureGrid {
    double half_width_sigmas = 8.0;
    std::size_t intervals = 4000;
};

/// P(r | a) = <a| M(r)^dag M(r) |a>.
[[nodiscard]] inline double readout_likelihood(double r, double eigenvalue, const MeasurementChannel &ch) noexcept {
    const double k = ch.dt / ch.tau;
    return std::sqrt(k / (2.0 * std::numbers::pi)) * std::exp(-0.5 * k * (r - eigenvalue) * (r - eigenvalue));
}

/// Max over a = +-1 of |1 - integral of P(r|a) over the grid| by Simpson's
/// rule. No width check; see povm_normalization_check.
[[nodiscard]] inline double povm_mass_deviation(const MeasurementChannel &ch, const QuadratureGrid &grid) {
    if (grid.intervals < 2 || grid.intervals % 2 != 0) {
        throw std::invalid_argument("quadrature grid needs an even number of intervals");
    }
    const double sigma = std::sqrt(ch.readout_variance());
    double worst = 0.0;
    for (const double a : {1.0, -1.0}) {
        const double lo = a - grid.half_width_sigmas * sigma;
        const double h = 2.0 * grid.half_width_sigmas * sigma / static_cast<double>(grid.intervals);
        double sum = readout_likelihood(lo, a, ch) + readout_likelihood(lo + h * grid.intervals, a, ch);
        for (std::size_t i = 1; i < grid.intervals; ++i) {
            sum += (i % 2 == 1 ? 4.0 : 2.0) * readout_likelihood(lo + h * static_cast<double>(i), a, ch);
        }
        worst = std::max(worst, std::abs(1.0 - sum * h / 3.0));
    }
    return worst;
}

/// The POVM elements integrate to the identity; the grid must span at least
/// 12 standard deviations.
[[nodiscard]] inline double povm_normalization_check(const MeasurementChannel &ch, const QuadratureGrid &grid = {}) {
    ch.validate();
    if (2.0 * grid.half_width_sigmas < 12.0) {
        throw std::invalid_argument("povm_normalization_check: grid spans fewer than 12 standard deviations");
    }
    return povm_mass_deviation(ch, grid);
}

}  // namespace xzmon
