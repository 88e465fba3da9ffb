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
 * @file experiments.hpp
 * Named experiments: each one runs simulations, writes CSV and SVG
 * artifacts into an output directory and evaluates its pass/fail checks.
 * The analysis pieces are exposed separately so the acceptance suite can
 * share one long run between several checks.
 *
 * Trajectory index ranges (stream ids are (trajectory << 8) | channel):
 *   [0, n_traj)                    main runs
 *   kReconstructionBase + i        emulator reconstruction runs
 *   kVarianceBase + i              emulator angle-variance runs
 *   3 (i + 1) .. 3 (i + 1) + 2     projective sweep point i (point 0 uses 0..2)
 */

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <numbers>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "config.hpp"
#include "emulator.hpp"
#include "filtering.hpp"
#include "integrators.hpp"
#include "io.hpp"
#include "leggett_garg.hpp"
#include "statistics.hpp"
#include "version.hpp"

namespace xzmon {

inline constexpr std::uint64_t kReconstructionBase = std::uint64_t{1} << 32;
inline constexpr std::uint64_t kVarianceBase = std::uint64_t{2} << 32;

// Default record lengths, units of tau. A 4e5 tau record gives a per-lag
// standard error of about 0.005 with 0.25 tau bins.
inline constexpr double kLongRecord = 4e5;
inline constexpr double kEnsembleDuration = 10.0;
inline constexpr double kTrackingDuration = 1e3;
inline constexpr double kCompareDuration = 10.0;
inline constexpr std::uint64_t kCompareTrajectories = 100;

// Tolerances.
inline constexpr double kAutoTolerance = 0.03;
inline constexpr double kCrossTolerance = 0.02;
inline constexpr double kLGTolerance = 0.05;
inline constexpr double kBoundaryTolerance = 0.1;
inline constexpr double kProjectiveTolerance = 0.02;
inline constexpr double kConstraintLag = 4.0;
inline constexpr double kAgreement = 0.05;
inline constexpr double kIdentityTolerance = 1e-12;
inline constexpr double kVarianceTolerance = 0.05;
inline constexpr double kTrackingThreshold = 0.6;
inline constexpr double kTrackingAgreement = 0.05;

struct Check {
    std::string name;
    double value = 0.0;
    std::string requirement;
    bool pass = false;
};

[[nodiscard]] inline Check check_le(std::string name, double value, double limit) {
    return {std::move(name), value, "<= " + format_number(limit), value <= limit};
}
[[nodiscard]] inline Check check_ge(std::string name, double value, double limit) {
    return {std::move(name), value, ">= " + format_number(limit), value >= limit};
}
[[nodiscard]] inline Check check_in(std::string name, double value, double lo, double hi) {
    return {std::move(name), value, "in [" + format_number(lo) + ", " + format_number(hi) + "]",
            value >= lo && value <= hi};
}
[[nodiscard]] inline Check check_true(std::string name, bool ok) {
    return {std::move(name), ok ? 1.0 : 0.0, "== 1", ok};
}

[[nodiscard]] inline bool all_pass(const std::vector<Check> &checks) {
    return std::all_of(checks.begin(), checks.end(), [](const Check &c) { return c.pass; });
}

struct ExperimentResult {
    std::string name;
    std::vector<Check> checks;
    std::vector<std::filesystem::path> files;

    [[nodiscard]] bool passed() const { return all_pass(checks); }
};

[[nodiscard]] inline const std::vector<std::string> &experiment_names() {
    static const std::vector<std::string> names = {"correlators", "tracking",    "lg-continuous",      "lg-projective",
                                                   "constraints", "emulator",    "compare-integrators"};
    return names;
}

[[nodiscard]] inline FileHeader make_header(const std::string &experiment, const ExperimentConfig &c,
                                            const std::string &what = {}) {
    std::string overrides;
    for (const auto &k : c.overrides) overrides += (overrides.empty() ? "" : ",") + k;
    FileHeader h;
    h.push_back(std::string("xzmon ") + kVersion + " experiment=" + experiment);
    if (!what.empty()) h.push_back("content=" + what);
    h.push_back("config=" + config_to_json(c).dump());
    h.push_back("overrides=" + (overrides.empty() ? std::string("none") : overrides));
    h.push_back(std::string("seed_layout=") + kStreamLayout);
    h.push_back("seed=" + std::to_string(c.seed) + ", dt=" + format_number(c.dt_over_tau * c.tau) +
                ", tau=" + format_number(c.tau) + ", scheme=" + c.scheme);
    return h;
}

// ---------------------------------------------------------------------------
// Long-run correlation bundles

/// Coarse bins carry readout and state/noise pairs; fine bins carry the
/// readout pairs used by the Leggett-Garg combination.
struct MonitorBundle {
    MonitorCorrelator coarse;
    MonitorCorrelator fine;
    double duration = 0.0;
    std::uint64_t n_traj = 1;
    double identity_residual = 0.0; ///< emulator runs only
};

namespace detail {

struct BundleLayout {
    LagOptions coarse;
    LagOptions fine;
    std::size_t groups = 1;
    std::size_t burn = 0;
};

inline BundleLayout bundle_layout(const ExperimentConfig &c, double duration, std::uint64_t n_traj) {
    const double dtr = c.dt_over_tau;
    const auto steps = static_cast<std::size_t>(std::llround(duration / dtr));
    CorrelationOptions co{std::max(c.max_lag, kConstraintLag), c.bin_width, c.batches, c.burn_in};
    CorrelationOptions fo{2.0 * std::max(c.lg_max_t, c.lg_t), c.lg_bin_width, c.batches, c.burn_in};
    BundleLayout b;
    b.burn = burn_in_steps(co, dtr);
    if (b.burn >= steps) throw std::invalid_argument("burn-in is longer than the run");
    const std::size_t usable = steps - b.burn;
    b.coarse = lag_options(co, dtr, usable);
    b.fine = lag_options(fo, dtr, usable);
    if (n_traj == 1) {
        check_length(usable, b.coarse);
        check_length(usable, b.fine);
        return b;
    }
    for (const auto *lo : {&b.coarse, &b.fine}) {
        if (usable <= lo->bin_steps * (lo->max_lag_bins + 1)) {
            throw std::invalid_argument("trajectories are shorter than the largest lag");
        }
    }
    // One batch per group of trajectories; groups differ in size by at most one.
    b.groups = static_cast<std::size_t>(std::min<std::uint64_t>(n_traj, c.batches));
    const std::size_t per_group = static_cast<std::size_t>((n_traj + b.groups - 1) / b.groups);
    b.coarse.batch_bins = per_group * (usable / b.coarse.bin_steps);
    b.fine.batch_bins = per_group * (usable / b.fine.bin_steps);
    return b;
}

/// Runs fill(bundle, trajectory) for every trajectory, grouped into batches,
/// and merges the groups in order.
template <class Fill>
MonitorBundle collect(const ExperimentConfig &c, double duration, std::uint64_t n_traj, unsigned threads,
                      Fill &&fill) {
    const BundleLayout layout = bundle_layout(c, duration, n_traj);
    const double dtr = c.dt_over_tau;
    std::vector<std::optional<MonitorBundle>> groups(layout.groups);
    parallel_for(layout.groups, threads, [&](std::size_t g) {
        MonitorBundle b{MonitorCorrelator(dtr, layout.coarse, true), MonitorCorrelator(dtr, layout.fine, false),
                        duration, n_traj, 0.0};
        const double tx = c.tau_x > 0.0 ? c.tau_x : c.tau;
        const double tz = c.tau_z > 0.0 ? c.tau_z : c.tau;
        b.coarse.set_tau(tx, tz);
        b.fine.set_tau(tx, tz);
        const std::uint64_t lo = g * n_traj / layout.groups, hi = (g + 1) * n_traj / layout.groups;
        for (std::uint64_t i = lo; i < hi; ++i) {
            fill(b, i, layout.burn);
            b.coarse.end_segment();
            b.fine.end_segment();
        }
        groups[g] = std::move(b);
    });
    MonitorBundle out = std::move(*groups.front());
    for (std::size_t g = 1; g < groups.size(); ++g) {
        out.coarse.merge(groups[g]->coarse);
        out.fine.merge(groups[g]->fine);
        out.identity_residual = std::max(out.identity_residual, groups[g]->identity_residual);
    }
    return out;
}

}  // namespace detail

/// Monitored-qubit bundle; default length 4e5 tau for one trajectory,
/// 10 tau per trajectory for an ensemble.
[[nodiscard]] inline MonitorBundle measure_qubit(const ExperimentConfig &c, unsigned threads = 1) {
    c.validate();
    const std::uint64_t n = c.resolved_n_traj(1);
    const double duration = c.resolved_duration(n == 1 ? kLongRecord : kEnsembleDuration);
    const Scheme scheme = parse_scheme(c.scheme);
    return detail::collect(c, duration, n, threads, [&](MonitorBundle &b, std::uint64_t i, std::size_t burn) {
        RunConfig rc = c.run_config(duration);
        rc.trajectory = i;
        simulate(scheme, c.initial, rc, [&](const StepSample &s) {
            if (s.k < burn) return;
            b.coarse(s);
            b.fine(s);
        });
    });
}

/// Classical-emulator bundle with the same layout; also tracks the
/// reconstruction-identity residual of every step.
[[nodiscard]] inline MonitorBundle measure_emulator(const ExperimentConfig &c, unsigned threads = 1) {
    c.validate();
    const std::uint64_t n = c.resolved_n_traj(1);
    const double duration = c.resolved_duration(n == 1 ? kLongRecord : kEnsembleDuration);
    EmulatorConfig ec;
    ec.tau = c.tau;
    ec.tau_x = c.tau_x;
    ec.tau_z = c.tau_z;
    ec.dt_over_tau = c.dt_over_tau;
    ec.duration = duration;
    ec.seed = c.seed;
    ec.theta0 = c.theta0;
    ec.validate();
    return detail::collect(c, duration, n, threads, [&](MonitorBundle &b, std::uint64_t i, std::size_t burn) {
        EmulatorConfig local = ec;
        local.trajectory = i;
        simulate_emulator(local, [&](const EmulatorStep &st) {
            const double x = std::cos(st.theta_before), z = std::sin(st.theta_before);
            const double res = (1.0 - x * x) * st.rx_eff - x * z * st.rz_eff + z * st.r_tilde;
            b.identity_residual = std::max(b.identity_residual, std::abs(res));
            if (st.k < burn) return;
            const StepSample s = st.as_step_sample(c.tau);
            b.coarse(s);
            b.fine(s);
        });
    });
}

// ---------------------------------------------------------------------------
// Analyses shared by experiments and the acceptance suite

/// Readout autocorrelators against exp(-t/2tau), cross-correlators against 0.
[[nodiscard]] inline std::vector<Check> readout_correlator_checks(const MonitorCorrelator &mc, double max_lag,
                                                                  const std::string &prefix = {}) {
    std::vector<Check> out;
    for (const auto p : {ReadoutPair::xx, ReadoutPair::zz, ReadoutPair::xz, ReadoutPair::zx}) {
        const bool is_auto = p == ReadoutPair::xx || p == ReadoutPair::zz;
        out.push_back(check_le(prefix + "max |" + pair_label(p) + " - theory|, t in (0," + format_number(max_lag) +
                                   "]",
                               mc.readout(p).max_deviation(max_lag), is_auto ? kAutoTolerance : kCrossTolerance));
    }
    return out;
}

[[nodiscard]] inline std::vector<Check> phi_checks(const MonitorCorrelator &mc, const std::vector<double> &phis,
                                                   double max_lag, const std::string &prefix = {}) {
    std::vector<Check> out;
    for (const double phi : phis) {
        const std::string tag = "phi=" + format_number(phi);
        out.push_back(check_le(prefix + "max |<r_phi r_phi> - theory| " + tag,
                               phi_autocorrelator(mc, phi).max_deviation(max_lag), kAutoTolerance));
        out.push_back(check_le(prefix + "max |<r_phi r_phi+pi/2>| " + tag,
                               phi_orthogonal_correlator(mc, phi).max_deviation(max_lag), kCrossTolerance));
    }
    return out;
}

[[nodiscard]] inline std::vector<Check> constraint_checks(const MonitorCorrelator &mc, const std::string &prefix = {}) {
    std::vector<Check> out;
    for (const auto w : {Constraint::xx, Constraint::zz, Constraint::xz, Constraint::zx}) {
        const auto rep = constraint_report(mc, w);
        out.push_back(check_le(prefix + "max |" + std::string(constraint_label(w)) + " - theory|, t in (0,4]",
                               rep.combined.max_deviation(kConstraintLag),
                               constraint_decays(w) ? kAutoTolerance : kCrossTolerance));
    }
    return out;
}

struct LGContinuousOutcome {
    std::vector<LGResult> rows; ///< scans over every phi of interest
    LGResult point;             ///< at (phi, lg_t)
    LGResult mirror;            ///< at (-pi/4, lg_t)
    std::optional<double> boundary;
    double boundary_theory = 0.0;
    std::vector<Check> checks;
};

[[nodiscard]] inline LGContinuousOutcome lg_continuous_analysis(const MonitorCorrelator &fine,
                                                                const ExperimentConfig &c,
                                                                const std::string &prefix = {}) {
    LGContinuousOutcome o;
    std::vector<double> phis = {c.phi, std::numbers::pi / 4, -std::numbers::pi / 4};
    for (const double p : c.phi_grid) phis.push_back(p);
    std::vector<double> seen;
    for (const double p : phis) {
        if (std::find(seen.begin(), seen.end(), p) != seen.end()) continue;
        seen.push_back(p);
        for (const auto &r : lg_scan(fine, p)) o.rows.push_back(r);
    }
    o.point = lg_combination(fine, c.phi, c.lg_t);
    o.mirror = lg_combination(fine, -std::numbers::pi / 4, c.lg_t);
    const std::string at = "(phi=" + format_number(c.phi) + ", t=" + format_number(c.lg_t) + ")";
    o.checks.push_back(check_le(prefix + "|LG lhs - theory| " + at, std::abs(o.point.lhs - o.point.theory), kLGTolerance));
    if (o.point.theory >= 1.2) {
        o.checks.push_back(check_ge(prefix + "(LG lhs - 1)/stderr " + at, (o.point.lhs - 1.0) / o.point.std_error, 3.0));
    }
    o.checks.push_back(check_le(prefix + "(LG lhs - 1)/stderr (phi=-pi/4, t=" + format_number(c.lg_t) + ")",
                                (o.mirror.lhs - 1.0) / o.mirror.std_error, 3.0));
    const double amp = std::cos(c.phi) + std::sin(c.phi);
    if (amp > 1.0) {
        std::vector<LGResult> scan = lg_scan(fine, c.phi);
        o.boundary = violation_boundary(scan);
        o.boundary_theory = violation_boundary_theory(c.phi);
        o.checks.push_back(check_le(prefix + "|t* - 2 tau ln(cos phi + sin phi)|",
                                    o.boundary ? std::abs(*o.boundary - o.boundary_theory)
                                               : std::numeric_limits<double>::quiet_NaN(),
                                    kBoundaryTolerance));
    }
    return o;
}

struct ProjectiveOutcome {
    LGResult point;
    std::vector<LGResult> sweep; ///< t holds Omega * Delta t
    std::vector<Check> checks;
};

[[nodiscard]] inline ProjectiveOutcome projective_analysis(const ExperimentConfig &c, std::size_t sweep_points = 25) {
    ProjectiveOutcome o;
    ProjectiveLGConfig pc;
    pc.omega = c.omega;
    pc.delta_t = c.resolved_delta_t();
    pc.n_shots = c.n_shots;
    pc.seed = c.seed;
    pc.initial = c.initial;
    o.point = projective_lg(pc);
    const std::string at = "(Omega=" + format_number(c.omega) + ", dt=" + format_number(pc.delta_t) + ")";
    o.checks.push_back(check_le("|projective lhs - (2cos(W dt) - cos(2 W dt))| " + at,
                                std::abs(o.point.lhs - o.point.theory), kProjectiveTolerance));
    if (o.point.theory <= 1.0) o.checks.push_back(check_true("no projective violation " + at, !o.point.violated()));
    if (o.point.theory >= 1.1) o.checks.push_back(check_true("projective violation " + at, o.point.violated()));
    for (std::size_t i = 0; i < sweep_points; ++i) {
        ProjectiveLGConfig sc = pc;
        sc.omega = 1.0;
        sc.delta_t = std::numbers::pi * static_cast<double>(i + 1) / static_cast<double>(sweep_points);
        sc.n_shots = std::min<std::size_t>(c.n_shots, 20000);
        sc.stream_base = 3 * (i + 1);
        LGResult r = projective_lg(sc);
        o.sweep.push_back(r);
    }
    return o;
}

struct SchemeGap {
    double dt_over_tau = 0.0;
    Scheme scheme = Scheme::stratonovich;
    std::vector<double> sup; ///< per trajectory, sup over time of the Bloch distance to Kraus

    [[nodiscard]] double mean() const {
        double s = 0.0;
        for (double v : sup) s += v;
        return sup.empty() ? 0.0 : s / static_cast<double>(sup.size());
    }
    [[nodiscard]] double max() const { return sup.empty() ? 0.0 : *std::max_element(sup.begin(), sup.end()); }
};

struct IntegratorComparison {
    std::vector<SchemeGap> gaps; ///< stratonovich, ito at dt; stratonovich, ito at dt/2
    std::vector<std::pair<double, double>> sequencing; ///< (dt/tau, error)
    double sequencing_slope = 0.0;
    double purity_drift = 0.0;
    std::size_t purity_steps = 0;
    std::size_t states_checked = 0;
    std::size_t states_outside = 0;
    TrajectoryRecord kraus, stratonovich, ito; ///< trajectory 0 at dt
    std::vector<Check> checks;
};

/// Least-squares slope of log(y) against log(x).
[[nodiscard]] inline double loglog_slope(const std::vector<std::pair<double, double>> &pts) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(pts.size());
    for (const auto &[x, y] : pts) {
        const double lx = std::log(x), ly = std::log(y);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

/// Update-order error for fixed readouts at a ladder of step sizes.
[[nodiscard]] inline std::vector<std::pair<double, double>> sequencing_ladder(const std::vector<double> &ratios) {
    const BlochState states[] = {{0.6, 0.0, 0.8}, {0.0, 0.6, 0.8}, {0.48, 0.6, 0.64}, {-0.8, 0.0, 0.6}};
    const double r_x = 1.5, r_z = -0.7;
    std::vector<std::pair<double, double>> out;
    for (const double e : ratios) {
        const MeasurementChannel chx{Axis::x, 1.0, e}, chz{Axis::z, 1.0, e};
        double err = 0.0;
        for (const auto &s : states) err += sequencing_error(s, r_x, r_z, chx, chz);
        out.emplace_back(e, err / static_cast<double>(std::size(states)));
    }
    return out;
}

[[nodiscard]] inline IntegratorComparison compare_integrators(const ExperimentConfig &c, unsigned threads = 1) {
    c.validate();
    IntegratorComparison o;
    const std::uint64_t n = c.resolved_n_traj(kCompareTrajectories);
    const double duration = c.resolved_duration(kCompareDuration);
    for (const double dtr : {c.dt_over_tau, 0.5 * c.dt_over_tau}) {
        SchemeGap gs{dtr, Scheme::stratonovich, std::vector<double>(n)};
        SchemeGap gi{dtr, Scheme::ito, std::vector<double>(n)};
        std::vector<std::size_t> outside(n, 0), checked(n, 0);
        parallel_for(n, threads, [&](std::size_t i) {
            ExperimentConfig local = c;
            local.dt_over_tau = dtr;
            RunConfig rc = local.run_config(duration);
            rc.trajectory = i;
            TrajectoryRecord k = run_kraus(c.initial, rc);
            TrajectoryRecord s = integrate_readouts(Scheme::stratonovich, c.initial, k.readouts, rc);
            TrajectoryRecord t = integrate_readouts(Scheme::ito, c.initial, k.readouts, rc);
            double ds = 0.0, di = 0.0;
            for (std::size_t j = 0; j < k.states.size(); ++j) {
                ds = std::max(ds, bloch_distance(k.states[j], s.states[j]));
                di = std::max(di, bloch_distance(k.states[j], t.states[j]));
                for (const auto *st : {&k.states[j], &s.states[j], &t.states[j]}) {
                    ++checked[i];
                    if (!bloch_ball_check(*st)) ++outside[i];
                }
            }
            gs.sup[i] = ds;
            gi.sup[i] = di;
            if (i == 0 && dtr == c.dt_over_tau) {
                o.kraus = std::move(k);
                o.stratonovich = std::move(s);
                o.ito = std::move(t);
            }
        });
        for (std::size_t i = 0; i < n; ++i) {
            o.states_checked += checked[i];
            o.states_outside += outside[i];
        }
        o.gaps.push_back(std::move(gs));
        o.gaps.push_back(std::move(gi));
    }

    o.sequencing = sequencing_ladder({0.02, 0.01, 0.005, 0.0025});
    o.sequencing_slope = loglog_slope(o.sequencing);

    // Purity of the Kraus chain over 10^4 steps from a pure state.
    RunConfig pr = c.run_config(1e4 * c.dt_over_tau);
    pr.duration = 1e4 * c.dt_over_tau;
    const BlochState pure = is_pure(c.initial, kPurityTolerance) ? c.initial : BlochState{0.0, 0.0, 1.0};
    simulate(Scheme::kraus, pure, pr, [&](const StepSample &s) {
        o.purity_drift = std::max(o.purity_drift, std::abs(s.after.norm2() - 1.0));
        ++o.purity_steps;
    });

    // The per-trajectory sup has a heavy upper tail, so agreement and halving
    // use the ensemble mean; the per-trajectory values go to the CSV.
    const std::string at = " at dt/tau=" + format_number(c.dt_over_tau) + ", " + std::to_string(n) +
                           " trajectories x " + format_number(duration) + " tau";
    o.checks.push_back(check_le("mean sup |kraus - stratonovich|" + at, o.gaps[0].mean(), kAgreement));
    o.checks.push_back(check_le("mean sup |kraus - ito|" + at, o.gaps[1].mean(), kAgreement));
    o.checks.push_back(
        check_in("stratonovich gap ratio (dt/2 vs dt, ensemble mean)", o.gaps[2].mean() / o.gaps[0].mean(), 0.35, 0.65));
    o.checks.push_back(check_in("ito gap ratio (dt/2 vs dt, ensemble mean)", o.gaps[3].mean() / o.gaps[1].mean(), 0.35, 0.65));
    o.checks.push_back(check_in("sequencing-order error log-log slope", o.sequencing_slope, 1.8, 2.2));
    o.checks.push_back(check_le("kraus chain max ||s|^2 - 1| over 10^4 steps", o.purity_drift, kPurityTolerance));
    o.checks.push_back(check_true("every state of every scheme inside the Bloch ball", o.states_outside == 0));
    return o;
}

struct EmulatorExtras {
    std::vector<double> reconstruction_sup; ///< per run, sup over time of the Bloch distance
    EmulatedReadouts example;               ///< reconstruction run 0
    TrajectoryRecord example_reconstruction;
    double variance_rate = 0.0; ///< Var[theta(tau) - theta(0)] / tau, in 1/tau
    bool toggle_identical = false;
    std::vector<Check> checks;
};

[[nodiscard]] inline EmulatorConfig emulator_config(const ExperimentConfig &c, double duration) {
    EmulatorConfig ec;
    ec.tau = c.tau;
    ec.tau_x = c.tau_x;
    ec.tau_z = c.tau_z;
    ec.dt_over_tau = c.dt_over_tau;
    ec.duration = duration;
    ec.seed = c.seed;
    ec.theta0 = c.theta0;
    ec.validate();
    return ec;
}

[[nodiscard]] inline EmulatorExtras emulator_extras(const ExperimentConfig &c, unsigned threads = 1) {
    EmulatorExtras o;
    const EmulatorConfig base = emulator_config(c, c.recon_duration);
    o.reconstruction_sup.assign(c.recon_traj, 0.0);
    parallel_for(c.recon_traj, threads, [&](std::size_t i) {
        EmulatorConfig ec = base;
        ec.trajectory = kReconstructionBase + i;
        EmulatedReadouts rd = run_emulator(ec);
        TrajectoryRecord rec = third_party_reconstruct(rd, SpinState{ec.theta0}.bloch());
        o.reconstruction_sup[i] = reconstruction_error(rd, rec);
        if (i == 0) {
            o.example = std::move(rd);
            o.example_reconstruction = std::move(rec);
        }
    });

    // Angle diffusion over one tau, readouts off.
    EmulatorConfig vc = emulator_config(c, 1.0);
    vc.make_readouts = false;
    double mean = 0.0, m2 = 0.0;
    for (std::uint64_t i = 0; i < c.variance_runs; ++i) {
        vc.trajectory = kVarianceBase + i;
        double last = vc.theta0;
        simulate_emulator(vc, [&](const EmulatorStep &st) { last = st.theta_after; });
        const double d = last - vc.theta0;
        const double delta = d - mean;
        mean += delta / static_cast<double>(i + 1);
        m2 += delta * (d - mean);
    }
    o.variance_rate = m2 / static_cast<double>(c.variance_runs - 1) / vc.duration;

    EmulatorConfig on = base, off = base;
    on.trajectory = off.trajectory = kReconstructionBase;
    off.make_readouts = false;
    o.toggle_identical = run_emulator(on).theta == run_emulator(off).theta;

    double mean_sup = 0.0;
    for (const double v : o.reconstruction_sup) mean_sup += v / static_cast<double>(o.reconstruction_sup.size());
    o.checks.push_back(check_le("emulator: mean sup |reconstruction - spin| over " + std::to_string(c.recon_traj) +
                                    " runs x " + format_number(c.recon_duration) + " tau",
                                mean_sup, kAgreement));
    o.checks.push_back(check_in("emulator: theta variance growth rate x tau", o.variance_rate, 1.0 - kVarianceTolerance,
                                1.0 + kVarianceTolerance));
    o.checks.push_back(check_true("emulator: theta(t) bit-identical with s~ on and off", o.toggle_identical));
    return o;
}

struct TrackingOutcome {
    TrajectoryRecord qubit;
    std::vector<double> truth_x, truth_z;
    FilteredSignal fx, fz;
    TrackingReport qx, qz;
    EmulatedReadouts emu;
    std::vector<double> emu_truth_x, emu_truth_z;
    FilteredSignal ex, ez;
    TrackingReport emx, emz;
    std::vector<Check> checks;
};

[[nodiscard]] inline TrackingOutcome tracking_analysis(const ExperimentConfig &c) {
    c.validate();
    TrackingOutcome o;
    const double duration = c.resolved_duration(kTrackingDuration);
    RunConfig rc = c.run_config(duration);
    o.qubit = run_scheme(parse_scheme(c.scheme), c.initial, rc);
    const std::size_t n = o.qubit.readouts.size();
    for (std::size_t k = 0; k < n; ++k) {
        o.truth_x.push_back(o.qubit.states[k].x);
        o.truth_z.push_back(o.qubit.states[k].z);
    }
    const double dt = rc.dt(), tau_f = c.tau_f * c.tau;
    o.fx = ewma(o.qubit.readouts.r_x, dt, tau_f);
    o.fz = ewma(o.qubit.readouts.r_z, dt, tau_f);
    o.qx = tracking_report(o.fx, o.truth_x);
    o.qz = tracking_report(o.fz, o.truth_z);

    o.emu = run_emulator(emulator_config(c, duration));
    for (std::size_t k = 0; k < o.emu.size(); ++k) {
        o.emu_truth_x.push_back(std::cos(o.emu.theta[k]));
        o.emu_truth_z.push_back(std::sin(o.emu.theta[k]));
    }
    o.ex = ewma(o.emu.r_x, dt, tau_f);
    o.ez = ewma(o.emu.r_z, dt, tau_f);
    o.emx = tracking_report(o.ex, o.emu_truth_x);
    o.emz = tracking_report(o.ez, o.emu_truth_z);

    o.checks.push_back(check_ge("corr(filtered r_x, x) qubit", o.qx.correlation, kTrackingThreshold));
    o.checks.push_back(
        check_le("|corr emulator - corr qubit| (x channel)", std::abs(o.emx.correlation - o.qx.correlation),
                 kTrackingAgreement));
    return o;
}

// ---------------------------------------------------------------------------
// Experiment drivers

namespace detail {

inline std::string phi_tag(std::size_t i) { return "phi" + std::to_string(i); }

inline void write_readout_correlators(const std::filesystem::path &dir, const std::string &prefix,
                                      const std::string &experiment, const ExperimentConfig &c,
                                      const MonitorCorrelator &mc, ExperimentResult &res) {
    static const std::pair<ReadoutPair, const char *> kPairs[] = {
        {ReadoutPair::xx, "rx_rx"}, {ReadoutPair::xz, "rx_rz"}, {ReadoutPair::zx, "rz_rx"}, {ReadoutPair::zz, "rz_rz"}};
    Plot plot{prefix + "readout correlators", "t / tau", "correlation", {}, {0.0}};
    for (const auto &[p, name] : kPairs) {
        const auto est = mc.readout(p);
        const auto path = dir / (prefix + "corr_" + name + ".csv");
        write_correlation_csv(path, make_header(experiment, c, pair_label(p)), est);
        res.files.push_back(path);
        plot.series.push_back({pair_label(p), est.lags, est.values, false});
    }
    const auto th = mc.readout(ReadoutPair::xx);
    plot.series.push_back({"exp(-t/2tau)", th.lags, th.theory, true});
    const auto svg = dir / (prefix + "correlators.svg");
    write_svg(svg, make_header(experiment, c, "readout correlators"), plot);
    res.files.push_back(svg);

    Plot phi_plot{prefix + "rotated readouts", "t / tau", "correlation", {}, {0.0}};
    for (std::size_t i = 0; i < c.phi_grid.size(); ++i) {
        const double phi = c.phi_grid[i];
        const auto a = phi_autocorrelator(mc, phi);
        const auto o = phi_orthogonal_correlator(mc, phi);
        const std::string what = "phi=" + format_number(phi);
        const auto pa = dir / (prefix + "corr_" + phi_tag(i) + ".csv");
        const auto po = dir / (prefix + "corr_" + phi_tag(i) + "_orth.csv");
        write_correlation_csv(pa, make_header(experiment, c, "<r_phi(0) r_phi(t)> " + what), a);
        write_correlation_csv(po, make_header(experiment, c, "<r_phi(0) r_phi+pi/2(t)> " + what), o);
        res.files.push_back(pa);
        res.files.push_back(po);
        phi_plot.series.push_back({"auto " + what, a.lags, a.values, false});
        phi_plot.series.push_back({"orth " + what, o.lags, o.values, false});
    }
    const auto psvg = dir / (prefix + "phi.svg");
    write_svg(psvg, make_header(experiment, c, "rotated readout correlators"), phi_plot);
    res.files.push_back(psvg);
}

inline void write_constraints(const std::filesystem::path &dir, const std::string &prefix,
                              const std::string &experiment, const ExperimentConfig &c, const MonitorCorrelator &mc,
                              ExperimentResult &res) {
    static const std::pair<Constraint, const char *> kWhich[] = {
        {Constraint::xx, "xx"}, {Constraint::zz, "zz"}, {Constraint::xz, "xz"}, {Constraint::zx, "zx"}};
    Plot plot{prefix + "noise-invasiveness constraints", "t / tau", "correlation", {}, {0.0}};
    for (const auto &[w, name] : kWhich) {
        const auto rep = constraint_report(mc, w);
        const auto path = dir / (prefix + "constraint_" + name + ".csv");
        write_constraint_csv(path, make_header(experiment, c, constraint_label(w)), rep);
        res.files.push_back(path);
        plot.series.push_back({std::string("combined ") + name, rep.combined.lags, rep.combined.values, false});
        plot.series.push_back({std::string("state part ") + name, rep.state_part.lags, rep.state_part.values, true});
    }
    const auto svg = dir / (prefix + "constraints.svg");
    write_svg(svg, make_header(experiment, c, "constraints"), plot);
    res.files.push_back(svg);
}

inline void write_lg_continuous(const std::filesystem::path &dir, const std::string &prefix,
                                const std::string &experiment, const ExperimentConfig &c,
                                const LGContinuousOutcome &o, ExperimentResult &res) {
    const auto csv = dir / (prefix + "lg_continuous.csv");
    write_lg_csv(csv, make_header(experiment, c, "continuous Leggett-Garg scans"), o.rows);
    res.files.push_back(csv);
    Plot plot{prefix + "continuous Leggett-Garg", "t / tau", "lhs", {}, {1.0}};
    for (const double phi : {c.phi, -std::numbers::pi / 4}) {
        PlotSeries est{"lhs phi=" + format_number(phi), {}, {}, false};
        PlotSeries th{"theory phi=" + format_number(phi), {}, {}, true};
        for (const auto &r : o.rows) {
            if (r.phi != phi) continue;
            est.x.push_back(r.t);
            est.y.push_back(r.lhs);
            th.x.push_back(r.t);
            th.y.push_back(r.theory);
        }
        plot.series.push_back(std::move(est));
        plot.series.push_back(std::move(th));
    }
    const auto svg = dir / (prefix + "lg_continuous.svg");
    write_svg(svg, make_header(experiment, c, "continuous Leggett-Garg"), plot);
    res.files.push_back(svg);
}

inline void write_summary(const std::filesystem::path &dir, const std::string &experiment, const ExperimentConfig &c,
                          ExperimentResult &res) {
    const auto path = dir / "summary.csv";
    CsvWriter w(path, make_header(experiment, c, "checks"), {"check", "value", "requirement", "pass"});
    for (const auto &ch : res.checks) {
        std::string name = ch.name;
        std::replace(name.begin(), name.end(), ',', ';');
        w.row(name, ch.value, ch.requirement, ch.pass);
    }
    w.close();
    res.files.push_back(path);
}

}  // namespace detail

[[nodiscard]] inline ExperimentResult run_correlators(const ExperimentConfig &c, const std::filesystem::path &dir,
                                                      unsigned threads = 1) {
    const std::string name = "correlators";
    ExperimentResult res{name, {}, {}};
    const MonitorBundle b = measure_qubit(c, threads);
    res.checks = readout_correlator_checks(b.coarse, c.max_lag);
    for (auto &ch : phi_checks(b.coarse, c.phi_grid, c.max_lag)) res.checks.push_back(std::move(ch));
    detail::write_readout_correlators(dir, "", name, c, b.coarse, res);
    return res;
}

[[nodiscard]] inline ExperimentResult run_constraints(const ExperimentConfig &c, const std::filesystem::path &dir,
                                                      unsigned threads = 1) {
    const std::string name = "constraints";
    ExperimentResult res{name, {}, {}};
    const MonitorBundle b = measure_qubit(c, threads);
    res.checks = constraint_checks(b.coarse);
    detail::write_constraints(dir, "", name, c, b.coarse, res);
    return res;
}

[[nodiscard]] inline ExperimentResult run_lg_continuous(const ExperimentConfig &c, const std::filesystem::path &dir,
                                                        unsigned threads = 1) {
    const std::string name = "lg-continuous";
    ExperimentResult res{name, {}, {}};
    const MonitorBundle b = measure_qubit(c, threads);
    const auto o = lg_continuous_analysis(b.fine, c);
    res.checks = o.checks;
    detail::write_lg_continuous(dir, "", name, c, o, res);
    return res;
}

[[nodiscard]] inline ExperimentResult run_lg_projective(const ExperimentConfig &c, const std::filesystem::path &dir) {
    const std::string name = "lg-projective";
    ExperimentResult res{name, {}, {}};
    c.validate();
    const auto o = projective_analysis(c);
    res.checks = o.checks;
    const auto csv = dir / "lg_projective.csv";
    write_lg_csv(csv, make_header(name, c, "projective three-time correlator; t = Delta t"), {o.point});
    const auto sweep = dir / "lg_projective_sweep.csv";
    write_lg_csv(sweep, make_header(name, c, "sweep at Omega = 1; t = Omega Delta t"), o.sweep);
    Plot plot{"projective Leggett-Garg", "Omega Delta t", "lhs", {}, {1.0}};
    PlotSeries est{"lhs", {}, {}, false}, th{"2cos(a) - cos(2a)", {}, {}, true};
    for (const auto &r : o.sweep) {
        est.x.push_back(r.t);
        est.y.push_back(r.lhs);
        th.x.push_back(r.t);
        th.y.push_back(r.theory);
    }
    plot.series = {est, th};
    const auto svg = dir / "lg_projective.svg";
    write_svg(svg, make_header(name, c, "projective Leggett-Garg sweep"), plot);
    res.files = {csv, sweep, svg};
    return res;
}

[[nodiscard]] inline ExperimentResult run_tracking(const ExperimentConfig &c, const std::filesystem::path &dir) {
    const std::string name = "tracking";
    ExperimentResult res{name, {}, {}};
    const auto o = tracking_analysis(c);
    res.checks = o.checks;
    const auto stride = static_cast<std::size_t>(c.csv_stride);
    const struct {
        const char *file;
        const std::vector<double> &raw;
        const FilteredSignal &f;
        const std::vector<double> &truth;
    } outputs[] = {{"tracking_x.csv", o.qubit.readouts.r_x, o.fx, o.truth_x},
                   {"tracking_z.csv", o.qubit.readouts.r_z, o.fz, o.truth_z},
                   {"tracking_emulator_x.csv", o.emu.r_x, o.ex, o.emu_truth_x},
                   {"tracking_emulator_z.csv", o.emu.r_z, o.ez, o.emu_truth_z}};
    for (const auto &out : outputs) {
        const auto path = dir / out.file;
        write_filter_csv(path, make_header(name, c, out.file), out.raw, out.f, out.truth, c.tau, stride);
        res.files.push_back(path);
    }
    const auto sum = dir / "tracking_metrics.csv";
    CsvWriter w(sum, make_header(name, c, "tracking metrics after a 5 tau_f burn-in"),
                {"source", "channel", "rms_error", "correlation", "best_lag"});
    w.row(std::string("qubit"), std::string("x"), o.qx.rms_error, o.qx.correlation, o.qx.best_lag / c.tau);
    w.row(std::string("qubit"), std::string("z"), o.qz.rms_error, o.qz.correlation, o.qz.best_lag / c.tau);
    w.row(std::string("emulator"), std::string("x"), o.emx.rms_error, o.emx.correlation, o.emx.best_lag / c.tau);
    w.row(std::string("emulator"), std::string("z"), o.emz.rms_error, o.emz.correlation, o.emz.best_lag / c.tau);
    w.close();
    res.files.push_back(sum);

    Plot plot{"filtered readouts (first 20 tau)", "t / tau", "value", {}, {}};
    PlotSeries fx{"filtered r_x", {}, {}, false}, tx{"x(t)", {}, {}, false}, fz{"filtered r_z", {}, {}, false},
        tz{"z(t)", {}, {}, false};
    const double dtr = c.dt_over_tau;
    for (std::size_t k = 0; k < o.truth_x.size() && static_cast<double>(k) * dtr <= 20.0; k += 5) {
        const double t = static_cast<double>(k) * dtr;
        fx.x.push_back(t), fx.y.push_back(o.fx.values[k]);
        tx.x.push_back(t), tx.y.push_back(o.truth_x[k]);
        fz.x.push_back(t), fz.y.push_back(o.fz.values[k]);
        tz.x.push_back(t), tz.y.push_back(o.truth_z[k]);
    }
    plot.series = {fx, tx, fz, tz};
    const auto svg = dir / "tracking.svg";
    write_svg(svg, make_header(name, c, "tracking"), plot);
    res.files.push_back(svg);
    return res;
}

[[nodiscard]] inline ExperimentResult run_emulator_experiment(const ExperimentConfig &c,
                                                              const std::filesystem::path &dir, unsigned threads = 1) {
    const std::string name = "emulator";
    ExperimentResult res{name, {}, {}};
    (void)emulator_config(c, 1.0); // equal-tau gate before any work
    const MonitorBundle b = measure_emulator(c, threads);
    const std::string p = "emulator: ";
    res.checks = readout_correlator_checks(b.coarse, c.max_lag, p);
    for (auto &ch : phi_checks(b.coarse, c.phi_grid, c.max_lag, p)) res.checks.push_back(std::move(ch));
    const auto lg = lg_continuous_analysis(b.fine, c, p);
    for (const auto &ch : lg.checks) res.checks.push_back(ch);
    for (auto &ch : constraint_checks(b.coarse, p)) res.checks.push_back(std::move(ch));
    res.checks.push_back(check_le(p + "max reconstruction-identity residual", b.identity_residual, kIdentityTolerance));
    const auto ex = emulator_extras(c, threads);
    for (const auto &ch : ex.checks) res.checks.push_back(ch);

    detail::write_readout_correlators(dir, "emulator_", name, c, b.coarse, res);
    detail::write_constraints(dir, "emulator_", name, c, b.coarse, res);
    detail::write_lg_continuous(dir, "emulator_", name, c, lg, res);
    const auto traj = dir / "emulator_trajectory.csv";
    write_emulator_csv(traj, make_header(name, c, "reconstruction run 0"), ex.example);
    res.files.push_back(traj);
    const auto recon = dir / "emulator_reconstruction.csv";
    {
        CsvWriter w(recon, make_header(name, c, "third-party reconstruction of run 0"),
                    {"t", "x_true", "z_true", "x_rec", "y_rec", "z_rec"});
        for (std::size_t k = 0; k < ex.example.theta.size(); ++k) {
            const auto &s = ex.example_reconstruction.states[k];
            w.row(static_cast<double>(k) * c.dt_over_tau, std::cos(ex.example.theta[k]), std::sin(ex.example.theta[k]),
                  s.x, s.y, s.z);
        }
        w.close();
    }
    res.files.push_back(recon);
    const auto runs = dir / "emulator_reconstruction_runs.csv";
    {
        CsvWriter w(runs, make_header(name, c, "per-run sup Bloch distance of the reconstruction"),
                    {"trajectory", "sup_distance"});
        for (std::size_t i = 0; i < ex.reconstruction_sup.size(); ++i) {
            w.row(kReconstructionBase + i, ex.reconstruction_sup[i]);
        }
        w.close();
    }
    res.files.push_back(runs);
    Plot plot{"third-party reconstruction", "t / tau", "component", {}, {}};
    PlotSeries xt{"x = cos theta", {}, {}, false}, xr{"x reconstructed", {}, {}, true};
    for (std::size_t k = 0; k < ex.example.theta.size(); k += 5) {
        const double t = static_cast<double>(k) * c.dt_over_tau;
        xt.x.push_back(t), xt.y.push_back(std::cos(ex.example.theta[k]));
        xr.x.push_back(t), xr.y.push_back(ex.example_reconstruction.states[k].x);
    }
    plot.series = {xt, xr};
    const auto svg = dir / "emulator.svg";
    write_svg(svg, make_header(name, c, "reconstruction"), plot);
    res.files.push_back(svg);
    return res;
}

[[nodiscard]] inline ExperimentResult run_compare_integrators(const ExperimentConfig &c,
                                                              const std::filesystem::path &dir, unsigned threads = 1) {
    const std::string name = "compare-integrators";
    ExperimentResult res{name, {}, {}};
    const auto o = compare_integrators(c, threads);
    res.checks = o.checks;
    const auto gaps = dir / "compare_integrators.csv";
    {
        CsvWriter w(gaps, make_header(name, c, "per-trajectory sup Bloch distance to the Kraus chain"),
                    {"dt_over_tau", "scheme", "trajectory", "sup_distance"});
        for (const auto &g : o.gaps) {
            for (std::size_t i = 0; i < g.sup.size(); ++i) {
                w.row(g.dt_over_tau, std::string(scheme_name(g.scheme)), static_cast<std::uint64_t>(i), g.sup[i]);
            }
        }
        w.close();
    }
    const auto seq = dir / "sequencing.csv";
    {
        CsvWriter w(seq, make_header(name, c, "update-order error for fixed readouts r_x=1.5, r_z=-0.7"),
                    {"dt_over_tau", "error"});
        for (const auto &[e, err] : o.sequencing) w.row(e, err);
        w.close();
    }
    res.files = {gaps, seq};
    const auto stride_cfg = static_cast<std::size_t>(c.csv_stride);
    for (const auto *rec : {&o.kraus, &o.stratonovich, &o.ito}) {
        const auto path = dir / (std::string("trajectory_") + scheme_name(rec->scheme) + ".csv");
        TrajectoryRecord view = *rec;
        view.states.clear();
        for (std::size_t j = 0; j < rec->states.size(); j += stride_cfg) view.states.push_back(rec->states[j]);
        view.stride = stride_cfg;
        write_trajectory_csv(path, make_header(name, c, std::string("trajectory 0, scheme ") + scheme_name(rec->scheme)),
                             view);
        res.files.push_back(path);
    }
    Plot plot{"same-noise trajectories (z)", "t / tau", "z", {}, {}};
    for (const auto *rec : {&o.kraus, &o.stratonovich, &o.ito}) {
        PlotSeries s{scheme_name(rec->scheme), {}, {}, rec->scheme != Scheme::kraus};
        for (std::size_t j = 0; j < rec->states.size(); j += 5) {
            s.x.push_back(rec->time_of_state(j) / c.tau);
            s.y.push_back(rec->states[j].z);
        }
        plot.series.push_back(std::move(s));
    }
    const auto svg = dir / "compare_integrators.svg";
    write_svg(svg, make_header(name, c, "trajectories"), plot);
    res.files.push_back(svg);
    return res;
}

/// Runs a named experiment into `dir` (created if needed) and writes
/// summary.csv. Throws std::invalid_argument for an unknown name or an
/// invalid config and std::runtime_error for an unwritable directory.
[[nodiscard]] inline ExperimentResult run_experiment(const std::string &name, const ExperimentConfig &c,
                                                     const std::filesystem::path &dir, unsigned threads = 1) {
    if (std::find(experiment_names().begin(), experiment_names().end(), name) == experiment_names().end()) {
        throw std::invalid_argument("unknown experiment '" + name + "'");
    }
    c.validate();
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec || !std::filesystem::is_directory(dir)) {
        throw std::runtime_error("cannot create output directory '" + dir.string() + "'");
    }
    ExperimentResult res;
    if (name == "correlators") res = run_correlators(c, dir, threads);
    else if (name == "tracking") res = run_tracking(c, dir);
    else if (name == "lg-continuous") res = run_lg_continuous(c, dir, threads);
    else if (name == "lg-projective") res = run_lg_projective(c, dir);
    else if (name == "constraints") res = run_constraints(c, dir, threads);
    else if (name == "emulator") res = run_emulator_experiment(c, dir, threads);
    else res = run_compare_integrators(c, dir, threads);
    detail::write_summary(dir, name, c, res);
    return res;
}

}  // namespace xzmon
