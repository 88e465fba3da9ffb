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
 * @file leggett_garg.hpp
 * Macrorealism tests built from the two readouts.
 *
 * Rotated readout r_phi = cos(phi) r_x + sin(phi) r_z. A classical spin read
 * out noninvasively would satisfy
 *
 *   <r_x(0) r_phi(t)> + <r_phi(t) r_z(2t)> - <r_x(0) r_z(2t)> <= 1,
 *
 * while the monitored qubit gives (cos phi + sin phi) exp(-t/2tau), which
 * approaches sqrt(2) at phi = pi/4 for t << tau. The projective three-time
 * test under a Rabi drive is provided for contrast.
 */

#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "bloch.hpp"
#include "noise.hpp"
#include "statistics.hpp"

namespace xzmon {

struct RotatedReadout {
    double phi = 0.0;
    std::vector<double> samples;
    const ReadoutRecord *source = nullptr;
};

[[nodiscard]] inline RotatedReadout rotate_readout(const ReadoutRecord &rec, double phi) {
    if (rec.r_x.size() != rec.r_z.size()) throw std::invalid_argument("rotate_readout: channels not aligned");
    RotatedReadout out{phi, std::vector<double>(rec.size()), &rec};
    const double c = std::cos(phi), s = std::sin(phi);
    for (std::size_t k = 0; k < rec.size(); ++k) out.samples[k] = c * rec.r_x[k] + s * rec.r_z[k];
    return out;
}

namespace detail {

/// <(a1 r_x + a2 r_z)(0) (b1 r_x + b2 r_z)(t)> as readout-pair terms.
inline std::vector<LagCorrelator::Term> bilinear(double a1, double a2, double b1, double b2) {
    using R = ReadoutPair;
    return {{MonitorCorrelator::readout_index(R::xx), 0, a1 * b1},
            {MonitorCorrelator::readout_index(R::xz), 0, a1 * b2},
            {MonitorCorrelator::readout_index(R::zx), 0, a2 * b1},
            {MonitorCorrelator::readout_index(R::zz), 0, a2 * b2}};
}

inline MonitorCorrelator readout_correlator(const ReadoutRecord &rec, const CorrelationOptions &opt) {
    const double dtr = rec.dt / rec.tau;
    const std::size_t burn = burn_in_steps(opt, dtr);
    const LagOptions lo = lag_options(opt, dtr, rec.size() - std::min(rec.size(), burn));
    check_length(rec.size() - std::min(rec.size(), burn), lo);
    MonitorCorrelator mc(dtr, lo, false);
    for (std::size_t k = burn; k < rec.size(); ++k) mc.push(rec.r_x[k], rec.r_z[k], 0.0, 0.0, 0.0, 0.0);
    mc.end_segment();
    return mc;
}

}  // namespace detail

/// <r_phi(0) r_phi(t)>; theory exp(-t/2tau) for every phi.
[[nodiscard]] inline CorrelationEstimate phi_autocorrelator(const MonitorCorrelator &mc, double phi) {
    const double c = std::cos(phi), s = std::sin(phi);
    const auto terms = detail::bilinear(c, s, c, s);
    return mc.combined("<r_phi(0) r_phi(t)>", terms, 1.0, true);
}

[[nodiscard]] inline CorrelationEstimate phi_autocorrelator(const ReadoutRecord &rec, double phi,
                                                            const CorrelationOptions &opt = {}) {
    return phi_autocorrelator(detail::readout_correlator(rec, opt), phi);
}

/// <r_phi(0) r_{phi + pi/2}(t)>; theory 0 for every phi.
[[nodiscard]] inline CorrelationEstimate phi_orthogonal_correlator(const MonitorCorrelator &mc, double phi) {
    const double c = std::cos(phi), s = std::sin(phi);
    const auto terms = detail::bilinear(c, s, -s, c);
    return mc.combined("<r_phi(0) r_phi+pi/2(t)>", terms, 0.0, false);
}

[[nodiscard]] inline CorrelationEstimate phi_orthogonal_correlator(const ReadoutRecord &rec, double phi,
                                                                   const CorrelationOptions &opt = {}) {
    return phi_orthogonal_correlator(detail::readout_correlator(rec, opt), phi);
}

struct LGResult {
    double lhs = 0.0;
    double std_error = 0.0;
    double theory = 0.0;
    double bound = 1.0;
    double t = 0.0;   ///< units of tau (projective: the spacing Delta t)
    double phi = 0.0; ///< radians (projective: 0)

    [[nodiscard]] bool violated() const noexcept { return lhs - 3.0 * std_error > bound; }
};

/**
 * LHS = <r_x(0) r_phi(t)> + <r_phi(t) r_z(2t)> - <r_x(0) r_z(2t)> from
 * stationary lag estimates. t must be a whole number of bins with 2t within
 * the correlator's lag range. Terms are treated as independent for the error.
 */
[[nodiscard]] inline LGResult lg_combination(const MonitorCorrelator &mc, double phi, double t) {
    const double w = mc.bin_width();
    const auto lag = static_cast<std::size_t>(std::llround(t / w));
    if (lag == 0 || std::abs(static_cast<double>(lag) * w - t) > 1e-9 * std::max(1.0, t)) {
        throw std::invalid_argument("lg_combination: t must be a positive multiple of the bin width");
    }
    if (2 * lag > mc.max_lag_bins()) throw std::invalid_argument("lg_combination: record lags do not reach 2t");
    const double c = std::cos(phi), s = std::sin(phi);
    const auto &acc = mc.accumulator();
    const auto xx = MonitorCorrelator::readout_index(ReadoutPair::xx);
    const auto xz = MonitorCorrelator::readout_index(ReadoutPair::xz);
    const auto zz = MonitorCorrelator::readout_index(ReadoutPair::zz);
    const LagCorrelator::Term first[2] = {{xx, lag, c}, {xz, lag, s}};
    const LagCorrelator::Term second[2] = {{xz, lag, c}, {zz, lag, s}};
    const LagCorrelator::Term third[1] = {{xz, 2 * lag, 1.0}};
    const auto [v1, e1] = acc.combination(first);
    const auto [v2, e2] = acc.combination(second);
    const auto [v3, e3] = acc.combination(third);
    LGResult r;
    r.lhs = v1 + v2 - v3;
    r.std_error = std::sqrt(e1 * e1 + e2 * e2 + e3 * e3);
    r.theory = (c + s) * binned_decay(t, mc.accumulator().options().bin_steps, mc.dt_over_tau());
    r.t = t;
    r.phi = phi;
    return r;
}

[[nodiscard]] inline LGResult lg_combination(const ReadoutRecord &rec, double phi, double t,
                                             const CorrelationOptions &opt) {
    CorrelationOptions o = opt;
    o.max_lag = std::max(o.max_lag, 2.0 * t);
    return lg_combination(detail::readout_correlator(rec, o), phi, t);
}

/// LHS at every bin lag t with 2t inside the correlator's range.
[[nodiscard]] inline std::vector<LGResult> lg_scan(const MonitorCorrelator &mc, double phi) {
    std::vector<LGResult> out;
    for (std::size_t lag = 1; 2 * lag <= mc.max_lag_bins(); ++lag) {
        out.push_back(lg_combination(mc, phi, static_cast<double>(lag) * mc.bin_width()));
    }
    return out;
}

/// First t at which a scan's LHS falls to the bound, by linear interpolation.
[[nodiscard]] inline std::optional<double> violation_boundary(std::span<const LGResult> scan) {
    for (std::size_t i = 1; i < scan.size(); ++i) {
        const double a = scan[i - 1].lhs - scan[i - 1].bound;
        const double b = scan[i].lhs - scan[i].bound;
        if (a > 0.0 && b <= 0.0) {
            return scan[i - 1].t + (scan[i].t - scan[i - 1].t) * a / (a - b);
        }
    }
    return std::nullopt;
}

/// 2 tau ln(cos phi + sin phi); where the continuous LHS theory crosses 1.
[[nodiscard]] inline double violation_boundary_theory(double phi) {
    return 2.0 * std::log(std::cos(phi) + std::sin(phi));
}

/// Rotation generated by H = (Omega/2) sigma_x over a time t.
[[nodiscard]] inline BlochState rabi_rotate(const BlochState &s, double omega, double t) noexcept {
    const double a = omega * t;
    const double c = std::cos(a), sn = std::sin(a);
    return {s.x, c * s.y - sn * s.z, sn * s.y + c * s.z};
}

struct ProjectiveLGConfig {
    double omega = 1.0;
    double delta_t = std::numbers::pi / 3.0; ///< spacing t2 - t1 = t3 - t2
    std::size_t n_shots = 100000;            ///< per two-time correlator
    std::uint64_t seed = 1;
    BlochState initial{0.0, 0.0, 1.0};
    /// Correlators use the shots streams of trajectories base, base+1, base+2.
    std::uint64_t stream_base = 0;
};

/// Two-time correlator <z(t_a) z(t_b)> from n independent shots of two
/// projective sigma_z measurements.
[[nodiscard]] inline std::pair<double, double> projective_correlator(const ProjectiveLGConfig &cfg, double t_a,
                                                                     double t_b, NoiseStream &shots) {
    double sum = 0.0, sum2 = 0.0;
    for (std::size_t i = 0; i < cfg.n_shots; ++i) {
        BlochState s = rabi_rotate(cfg.initial, cfg.omega, t_a);
        const double first = shots.uniform() < 0.5 * (1.0 + s.z) ? 1.0 : -1.0;
        s = rabi_rotate(BlochState{0.0, 0.0, first}, cfg.omega, t_b - t_a);
        const double second = shots.uniform() < 0.5 * (1.0 + s.z) ? 1.0 : -1.0;
        const double p = first * second;
        sum += p;
        sum2 += p * p;
    }
    const double n = static_cast<double>(cfg.n_shots);
    const double mean = sum / n;
    const double var = cfg.n_shots > 1 ? std::max(0.0, (sum2 - n * mean * mean) / (n - 1.0)) : 0.0;
    return {mean, std::sqrt(var / n)};
}

/**
 * <z(t1)z(t2)> + <z(t2)z(t3)> - <z(t1)z(t3)> with t1 = 0, equal spacing,
 * each correlator from its own sub-ensemble of shots.
 */
[[nodiscard]] inline LGResult projective_lg(const ProjectiveLGConfig &cfg) {
    if (cfg.n_shots == 0) throw std::invalid_argument("projective_lg: n_shots must be at least 1");
    if (!bloch_ball_check(cfg.initial)) throw std::invalid_argument("projective_lg: invalid initial state");
    const double t1 = 0.0, t2 = cfg.delta_t, t3 = 2.0 * cfg.delta_t;
    NoiseStream s12(cfg.seed, stream_id(cfg.stream_base, NoiseChannel::shots));
    NoiseStream s23(cfg.seed, stream_id(cfg.stream_base + 1, NoiseChannel::shots));
    NoiseStream s13(cfg.seed, stream_id(cfg.stream_base + 2, NoiseChannel::shots));
    const auto [c12, e12] = projective_correlator(cfg, t1, t2, s12);
    const auto [c23, e23] = projective_correlator(cfg, t2, t3, s23);
    const auto [c13, e13] = projective_correlator(cfg, t1, t3, s13);
    LGResult r;
    r.lhs = c12 + c23 - c13;
    r.std_error = std::sqrt(e12 * e12 + e23 * e23 + e13 * e13);
    const double a = cfg.omega * cfg.delta_t;
    r.theory = 2.0 * std::cos(a) - std::cos(2.0 * a);
    r.t = cfg.delta_t;
    r.phi = 0.0;
    return r;
}

}  // namespace xzmon
