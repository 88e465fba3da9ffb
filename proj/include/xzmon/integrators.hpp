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
 * @file integrators.hpp
 * Trajectory propagators for simultaneous sigma_x / sigma_z monitoring.
 *
 *  - kraus:        sequential Kraus updates M_z M_x per step (reference).
 *  - stratonovich: Heun steps of
 *                    dx/dt = (1 - x^2) r_x/tau_x - x z r_z/tau_z
 *                    dy/dt = -y x r_x/tau_x - y z r_z/tau_z
 *                    dz/dt = (1 - z^2) r_z/tau_z - x z r_x/tau_x
 *                  with the readouts held constant over the step.
 *  - ito:          Euler-Maruyama steps of the Ito master equation written in
 *                  Bloch form, with dW_a = xi_a dt:
 *                    dx = -x dt/(2 tau_z) + (1 - x^2) dW_x/sqrt(tau_x) - x z dW_z/sqrt(tau_z)
 *                    dy = -y dt (1/(2 tau_x) + 1/(2 tau_z)) - y (x dW_x/sqrt(tau_x) + z dW_z/sqrt(tau_z))
 *                    dz = -z dt/(2 tau_x) + (1 - z^2) dW_z/sqrt(tau_z) - x z dW_x/sqrt(tau_x)
 *
 * Both SDE schemes split each step by channel in the same order as the
 * Kraus product (x, then z), so all three share the same first-order
 * cross term. Without the split, the cross-channel commutator makes the
 * scheme-to-scheme gap shrink only like sqrt(dt).
 *
 * Each scheme can run generatively (drawing its own readouts from its own
 * state) or replay a given readout record. In replay the Ito innovation is
 * formed against the scheme's own state, xi_a = (r_a - a) / sqrt(tau_a).
 */

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <mutex>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "bloch.hpp"
#include "measurement.hpp"
#include "noise.hpp"

namespace xzmon {

enum class Scheme { kraus, stratonovich, ito };

[[nodiscard]] inline const char *scheme_name(Scheme s) noexcept {
    switch (s) {
    case Scheme::kraus: return "kraus";
    case Scheme::stratonovich: return "stratonovich";
    case Scheme::ito: return "ito";
    }
    return "unknown";
}

[[nodiscard]] inline Scheme parse_scheme(std::string_view name) {
    if (name == "kraus") return Scheme::kraus;
    if (name == "stratonovich") return Scheme::stratonovich;
    if (name == "ito") return Scheme::ito;
    throw std::invalid_argument("unknown scheme '" + std::string(name) + "'");
}

struct RunConfig {
    double tau = 1.0;
    double tau_x = 0.0; ///< 0 means "same as tau"
    double tau_z = 0.0;
    double dt_over_tau = 0.01;
    double duration = 10.0; ///< units of tau
    std::uint64_t seed = 1;
    std::uint64_t trajectory = 0;
    std::size_t stride = 1; ///< state decimation; readouts are always kept in full
    bool renormalize = true;
    bool keep_noise = false;
    bool zero_noise = false;

    [[nodiscard]] double dt() const noexcept { return dt_over_tau * tau; }
    [[nodiscard]] double tau_x_or_default() const noexcept { return tau_x > 0.0 ? tau_x : tau; }
    [[nodiscard]] double tau_z_or_default() const noexcept { return tau_z > 0.0 ? tau_z : tau; }
    [[nodiscard]] bool equal_tau() const noexcept { return tau_x_or_default() == tau_z_or_default(); }
    [[nodiscard]] std::size_t steps() const noexcept {
        return static_cast<std::size_t>(std::llround(duration / dt_over_tau));
    }
    [[nodiscard]] MeasurementChannel channel_x() const { return {Axis::x, tau_x_or_default(), dt()}; }
    [[nodiscard]] MeasurementChannel channel_z() const { return {Axis::z, tau_z_or_default(), dt()}; }

    void validate() const {
        if (!(tau > 0.0)) throw std::invalid_argument("config: tau must be positive");
        if (!(dt_over_tau > 0.0)) throw std::invalid_argument("config: dt_over_tau must be positive");
        if (!(duration > 0.0)) throw std::invalid_argument("config: duration must be positive");
        if (stride == 0) throw std::invalid_argument("config: stride must be at least 1");
        channel_x().validate();
        channel_z().validate();
    }
};

/// Raw readouts on the uniform grid t_k = k dt, k = 0 .. size()-1. Readout k
/// is collected over [t_k, t_k + dt].
struct ReadoutRecord {
    double dt = 0.0;
    double tau = 1.0;
    double tau_x = 1.0;
    double tau_z = 1.0;
    std::vector<double> r_x;
    std::vector<double> r_z;

    [[nodiscard]] std::size_t size() const noexcept { return r_x.size(); }
    [[nodiscard]] double time(std::size_t k) const noexcept { return static_cast<double>(k) * dt; }
};

struct TrajectoryRecord {
    Scheme scheme = Scheme::kraus;
    std::uint64_t seed = 0;
    std::uint64_t trajectory = 0;
    double dt = 0.0;
    std::size_t stride = 1;
    /// states[j] is the state at t = j * stride * dt.
    std::vector<BlochState> states;
    ReadoutRecord readouts;
    /// Per-step effective noises; empty unless keep_noise was set.
    std::vector<double> xi_x;
    std::vector<double> xi_z;
    /// Steps at which the SDE state was pulled back onto the sphere or ball.
    std::size_t renormalizations = 0;
    /// Largest | |s| - target | seen before a renormalization.
    double max_norm_drift = 0.0;

    [[nodiscard]] double time_of_state(std::size_t j) const noexcept {
        return static_cast<double>(j * stride) * dt;
    }
    [[nodiscard]] bool has_noise() const noexcept { return !xi_x.empty(); }
};

/// Everything known about one step of any scheme.
struct StepSample {
    std::size_t k = 0;
    BlochState before;
    BlochState after;
    double r_x = 0.0;
    double r_z = 0.0;
    double xi_x = 0.0;
    double xi_z = 0.0;
};

namespace detail {

/// Heun step of the single-channel Stratonovich flow for axis a,
///   ds/dt = (e_a - a s) r / tau,
/// with r held constant over the step.
[[nodiscard]] inline BlochState heun_channel(const BlochState &s, double r, Axis axis, double dt, double tau) noexcept {
    const double k = r / tau;
    auto rhs = [&](const BlochState &p) -> BlochState {
        return axis == Axis::x ? BlochState{(1.0 - p.x * p.x) * k, -p.y * p.x * k, -p.z * p.x * k}
                               : BlochState{-p.x * p.z * k, -p.y * p.z * k, (1.0 - p.z * p.z) * k};
    };
    const BlochState f0 = rhs(s);
    const BlochState p{s.x + dt * f0.x, s.y + dt * f0.y, s.z + dt * f0.z};
    const BlochState f1 = rhs(p);
    return {s.x + 0.5 * dt * (f0.x + f1.x), s.y + 0.5 * dt * (f0.y + f1.y), s.z + 0.5 * dt * (f0.z + f1.z)};
}

/// Euler-Maruyama step of the single-channel Ito flow for axis a with
/// dW = xi dt: Lindblad decay of the two transverse components at rate
/// 1/(2 tau) plus the innovation (e_a - a s) dW / sqrt(tau).
[[nodiscard]] inline BlochState ito_channel(const BlochState &s, double dw, Axis axis, double dt, double tau) noexcept {
    const double g = dw / std::sqrt(tau);
    const double decay = dt / (2.0 * tau);
    if (axis == Axis::x) {
        return {s.x + (1.0 - s.x * s.x) * g, s.y - s.y * decay - s.y * s.x * g, s.z - s.z * decay - s.z * s.x * g};
    }
    return {s.x - s.x * decay - s.x * s.z * g, s.y - s.y * decay - s.y * s.z * g, s.z + (1.0 - s.z * s.z) * g};
}

/// Pure trajectories go back onto the sphere; mixed ones are only clamped
/// into the ball.
inline void renormalize(BlochState &s, bool pure_track, TrajectoryRecord *rec) noexcept {
    const double n = s.norm();
    if (n == 0.0) return;
    if (pure_track || n > 1.0) {
        const double drift = std::abs(n - 1.0);
        if (drift == 0.0) return;
        s = {s.x / n, s.y / n, s.z / n};
        if (rec != nullptr) {
            ++rec->renormalizations;
            rec->max_norm_drift = std::max(rec->max_norm_drift, drift);
        }
    }
}

inline void check_initial(const BlochState &s) {
    if (!s.finite() || !bloch_ball_check(s)) {
        throw std::invalid_argument("initial state is not a valid Bloch vector");
    }
}

}  // namespace detail

namespace detail {

struct ChannelUpdate {
    BlochState state;
    double xi; ///< (r - component) / sqrt(tau) against the input state
};

[[nodiscard]] inline ChannelUpdate apply_channel(Scheme scheme, const BlochState &s, double r,
                                                 const MeasurementChannel &ch) {
    const double xi = (r - component(s, ch.axis)) / std::sqrt(ch.tau);
    switch (scheme) {
    case Scheme::kraus: return {kraus_update(s, r, ch), xi};
    case Scheme::stratonovich: return {heun_channel(s, r, ch.axis, ch.dt, ch.tau), xi};
    case Scheme::ito: return {ito_channel(s, xi * ch.dt, ch.axis, ch.dt, ch.tau), xi};
    }
    return {s, xi};
}

/// r = component + sqrt(tau) xi with xi ~ N(0, 1/dt).
[[nodiscard]] inline double continuum_readout(const BlochState &s, const MeasurementChannel &ch,
                                              ChannelStreams &streams) {
    return component(s, ch.axis) + std::sqrt(ch.readout_variance()) * streams.spread.standard_normal();
}

}  // namespace detail

/**
 * Generative run; calls sink(const StepSample&) once per step.
 *
 * Every scheme processes the x channel first and then the z channel, each
 * readout being drawn from the state it is applied to. The Kraus scheme
 * draws from the exact two-Gaussian mixture, the SDE schemes from the
 * continuum form r = component + sqrt(tau) xi. The optional record
 * receives renormalization bookkeeping.
 */
template <class Sink>
void simulate(Scheme scheme, const BlochState &initial, const RunConfig &cfg, Sink &&sink,
              TrajectoryRecord *bookkeeping = nullptr) {
    cfg.validate();
    detail::check_initial(initial);
    const MeasurementChannel chx = cfg.channel_x();
    const MeasurementChannel chz = cfg.channel_z();
    const std::size_t n = cfg.steps();
    const bool pure_track = is_pure(initial, 1e-9);

    ChannelStreams xs = cfg.zero_noise ? ChannelStreams::muted() : ChannelStreams::make(cfg.seed, cfg.trajectory, Axis::x);
    ChannelStreams zs = cfg.zero_noise ? ChannelStreams::muted() : ChannelStreams::make(cfg.seed, cfg.trajectory, Axis::z);

    BlochState s = initial;
    StepSample step;
    for (std::size_t k = 0; k < n; ++k) {
        step.k = k;
        step.before = s;
        if (scheme == Scheme::kraus) {
            const JointOutcome o = joint_step(s, chx, chz, xs, zs);
            s = o.state;
            step.r_x = o.r_x;
            step.r_z = o.r_z;
            step.xi_x = o.xi_x;
            step.xi_z = o.xi_z;
        } else {
            step.r_x = detail::continuum_readout(s, chx, xs);
            const auto ux = detail::apply_channel(scheme, s, step.r_x, chx);
            step.r_z = detail::continuum_readout(ux.state, chz, zs);
            const auto uz = detail::apply_channel(scheme, ux.state, step.r_z, chz);
            s = uz.state;
            step.xi_x = ux.xi;
            step.xi_z = uz.xi;
            if (cfg.renormalize) detail::renormalize(s, pure_track, bookkeeping);
        }
        step.after = s;
        sink(static_cast<const StepSample &>(step));
    }
}

/**
 * Drives a scheme with a given readout record instead of drawing readouts.
 * The record's dt and per-axis tau take precedence over cfg's; cfg only
 * supplies the renormalization switch.
 */
template <class Sink>
void replay(Scheme scheme, const BlochState &initial, const ReadoutRecord &readouts, const RunConfig &cfg, Sink &&sink,
            TrajectoryRecord *bookkeeping = nullptr) {
    detail::check_initial(initial);
    if (readouts.r_z.size() != readouts.r_x.size()) {
        throw std::invalid_argument("replay: readout channels differ in length");
    }
    const MeasurementChannel chx{Axis::x, readouts.tau_x, readouts.dt};
    const MeasurementChannel chz{Axis::z, readouts.tau_z, readouts.dt};
    chx.validate();
    chz.validate();
    const bool pure_track = is_pure(initial, 1e-9);

    BlochState s = initial;
    StepSample step;
    for (std::size_t k = 0; k < readouts.size(); ++k) {
        step.k = k;
        step.before = s;
        step.r_x = readouts.r_x[k];
        step.r_z = readouts.r_z[k];
        const auto ux = detail::apply_channel(scheme, s, step.r_x, chx);
        const auto uz = detail::apply_channel(scheme, ux.state, step.r_z, chz);
        s = uz.state;
        step.xi_x = ux.xi;
        step.xi_z = uz.xi;
        if (scheme != Scheme::kraus && cfg.renormalize) detail::renormalize(s, pure_track, bookkeeping);
        step.after = s;
        sink(static_cast<const StepSample &>(step));
    }
}

namespace detail {

/// Sink that fills a TrajectoryRecord.
struct Recorder {
    TrajectoryRecord *rec;
    bool keep_noise;

    void operator()(const StepSample &st) const {
        rec->readouts.r_x.push_back(st.r_x);
        rec->readouts.r_z.push_back(st.r_z);
        if (keep_noise) {
            rec->xi_x.push_back(st.xi_x);
            rec->xi_z.push_back(st.xi_z);
        }
        if ((st.k + 1) % rec->stride == 0) rec->states.push_back(st.after);
    }
};

inline TrajectoryRecord make_record(Scheme scheme, const BlochState &initial, const RunConfig &cfg, double dt,
                                    std::size_t n) {
    TrajectoryRecord rec;
    rec.scheme = scheme;
    rec.seed = cfg.seed;
    rec.trajectory = cfg.trajectory;
    rec.dt = dt;
    rec.stride = cfg.stride;
    rec.states.reserve(n / cfg.stride + 1);
    rec.states.push_back(initial);
    rec.readouts.dt = dt;
    rec.readouts.tau = cfg.tau;
    rec.readouts.tau_x = cfg.tau_x_or_default();
    rec.readouts.tau_z = cfg.tau_z_or_default();
    rec.readouts.r_x.reserve(n);
    rec.readouts.r_z.reserve(n);
    if (cfg.keep_noise) {
        rec.xi_x.reserve(n);
        rec.xi_z.reserve(n);
    }
    return rec;
}

}  // namespace detail

[[nodiscard]] inline TrajectoryRecord run_scheme(Scheme scheme, const BlochState &initial, const RunConfig &cfg) {
    cfg.validate();
    TrajectoryRecord rec = detail::make_record(scheme, initial, cfg, cfg.dt(), cfg.steps());
    simulate(scheme, initial, cfg, detail::Recorder{&rec, cfg.keep_noise}, &rec);
    return rec;
}

[[nodiscard]] inline TrajectoryRecord run_kraus(const BlochState &initial, const RunConfig &cfg) {
    return run_scheme(Scheme::kraus, initial, cfg);
}
[[nodiscard]] inline TrajectoryRecord run_stratonovich(const BlochState &initial, const RunConfig &cfg) {
    return run_scheme(Scheme::stratonovich, initial, cfg);
}
[[nodiscard]] inline TrajectoryRecord run_ito(const BlochState &initial, const RunConfig &cfg) {
    return run_scheme(Scheme::ito, initial, cfg);
}

/// Integrates a readout record with the given scheme (the "third party" view).
[[nodiscard]] inline TrajectoryRecord integrate_readouts(Scheme scheme, const BlochState &initial,
                                                         const ReadoutRecord &readouts, RunConfig cfg = {}) {
    cfg.dt_over_tau = readouts.dt / readouts.tau;
    cfg.tau = readouts.tau;
    TrajectoryRecord rec = detail::make_record(scheme, initial, cfg, readouts.dt, readouts.size());
    rec.readouts.tau_x = readouts.tau_x;
    rec.readouts.tau_z = readouts.tau_z;
    replay(scheme, initial, readouts, cfg, detail::Recorder{&rec, cfg.keep_noise}, &rec);
    return rec;
}

/**
 * Runs fn(i) for i in [0, n) on up to `threads` workers (0 = hardware
 * concurrency). fn must only touch state owned by index i. The first
 * exception thrown by any task is rethrown.
 */
template <class Fn>
void parallel_for(std::size_t n, unsigned threads, Fn &&fn) {
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(n, 1)));
    if (threads <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (unsigned t = 0; t < threads; ++t) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < n; i = next++) {
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard lock(error_mutex);
                    if (!error) error = std::current_exception();
                }
            }
        });
    }
    for (auto &th : pool) th.join();
    if (error) std::rethrow_exception(error);
}

/// Trajectory i of the ensemble uses stream ids of trajectory cfg.trajectory + i.
[[nodiscard]] inline std::vector<TrajectoryRecord> run_ensemble(Scheme scheme, const BlochState &initial,
                                                                std::size_t n_traj, const RunConfig &cfg,
                                                                unsigned threads = 1) {
    if (n_traj == 0) throw std::invalid_argument("run_ensemble: n_traj must be at least 1");
    cfg.validate();
    std::vector<TrajectoryRecord> out(n_traj);
    parallel_for(n_traj, threads, [&](std::size_t i) {
        RunConfig local = cfg;
        local.trajectory = cfg.trajectory + i;
        out[i] = run_scheme(scheme, initial, local);
    });
    return out;
}

}  // namespace xzmon
