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
 * @file statistics.hpp
 * Two-time correlation estimators for readout and state records.
 *
 * Raw readouts carry white noise of per-step variance tau/dt, so a single
 * lag of the raw product r(0) r(t) has a standard error of about
 * (tau/dt)/sqrt(N). The estimators therefore work on bins: consecutive
 * samples are averaged over bins of `bin_steps` steps and correlations are
 * formed between bin means at lags that are whole numbers of bins. For
 * bin lags >= 1 the noise-noise delta spike drops out, and the bin average
 * of exp(-t/2tau) differs from the point value only by the factor
 * (sinh(b c/2) / (b sinh(c/2)))^2 with c = dt/2tau (see binned_decay).
 *
 * Standard errors are batch means: every product is assigned to the batch
 * of its later bin, and the spread of per-batch means gives the error.
 */

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "integrators.hpp"

namespace xzmon {

/// Neumaier compensated sum.
class CompensatedSum {
  public:
    void add(double v) noexcept {
        const double t = sum_ + v;
        if (std::abs(sum_) >= std::abs(v)) {
            comp_ += (sum_ - t) + v;
        } else {
            comp_ += (v - t) + sum_;
        }
        sum_ = t;
    }
    void add(const CompensatedSum &o) noexcept {
        add(o.sum_);
        add(o.comp_);
    }
    [[nodiscard]] double value() const noexcept { return sum_ + comp_; }

  private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

struct CorrelationEstimate {
    std::string label;
    std::vector<double> lags;       ///< units of tau, strictly increasing, > 0
    std::vector<double> values;
    std::vector<double> std_errors;
    std::vector<double> theory;     ///< empty when no prediction applies
    /// Lag-0 value and its error; dominated by the white-noise variance for
    /// readout channels and never compared with theory.
    double lag0 = std::numeric_limits<double>::quiet_NaN();
    double lag0_std_error = std::numeric_limits<double>::quiet_NaN();
    std::size_t batches = 0;

    [[nodiscard]] std::size_t size() const noexcept { return lags.size(); }
    /// Index of the lag closest to t (units of tau).
    [[nodiscard]] std::size_t index_of(double t) const {
        if (lags.empty()) throw std::out_of_range("empty correlation estimate");
        std::size_t best = 0;
        for (std::size_t i = 1; i < lags.size(); ++i) {
            if (std::abs(lags[i] - t) < std::abs(lags[best] - t)) best = i;
        }
        return best;
    }
    /// Largest |value - theory| over lags in (0, t_max].
    [[nodiscard]] double max_deviation(double t_max = std::numeric_limits<double>::infinity()) const {
        double worst = 0.0;
        for (std::size_t i = 0; i < lags.size() && i < theory.size(); ++i) {
            if (lags[i] > 0.0 && lags[i] <= t_max + 1e-12) worst = std::max(worst, std::abs(values[i] - theory[i]));
        }
        return worst;
    }
};

/// Bin-averaged exp(-t / 2 tau) for bins of b steps at bin lag L >= 1.
[[nodiscard]] inline double binned_decay(double t_over_tau, std::size_t bin_steps, double dt_over_tau) {
    const double c = 0.5 * dt_over_tau;
    const double b = static_cast<double>(bin_steps);
    const double smear = bin_steps <= 1 ? 1.0 : std::pow(std::sinh(0.5 * b * c) / (b * std::sinh(0.5 * c)), 2);
    return std::exp(-0.5 * t_over_tau) * smear;
}

struct ChannelPair {
    std::size_t first;  ///< sampled at the earlier time
    std::size_t second; ///< sampled at the later time
};

struct LagOptions {
    std::size_t bin_steps = 10;
    std::size_t max_lag_bins = 60;
    /// Bins per batch; 0 means derive from expected_steps and batches.
    std::size_t batch_bins = 0;
    std::size_t batches = 20;
    std::size_t expected_steps = 0;
};

/**
 * Streaming accumulator of <a(t) b(t + L w)> for a fixed set of channel
 * pairs and bin lags L = 0 .. max_lag_bins, w = bin_steps * dt.
 *
 * push() takes one step's channel values. end_segment() closes a
 * trajectory: the partial bin is dropped and no lag crosses the boundary.
 * merge() appends another accumulator's batches in order.
 */
class LagCorrelator {
  public:
    LagCorrelator(std::size_t n_channels, std::vector<ChannelPair> pairs, LagOptions opt)
        : n_channels_(n_channels), pairs_(std::move(pairs)), opt_(opt) {
        if (n_channels_ == 0 || pairs_.empty()) throw std::invalid_argument("LagCorrelator: no channels or pairs");
        for (const auto &p : pairs_) {
            if (p.first >= n_channels_ || p.second >= n_channels_) {
                throw std::invalid_argument("LagCorrelator: pair refers to a missing channel");
            }
        }
        if (opt_.bin_steps == 0) throw std::invalid_argument("LagCorrelator: bin_steps must be >= 1");
        if (opt_.batch_bins == 0) {
            if (opt_.batches == 0) throw std::invalid_argument("LagCorrelator: need at least one batch");
            const std::size_t total_bins = opt_.expected_steps / opt_.bin_steps;
            opt_.batch_bins = std::max<std::size_t>(1, total_bins / opt_.batches);
        }
        lags_ = opt_.max_lag_bins + 1;
        history_.assign(lags_ * n_channels_, 0.0);
        bin_acc_.assign(n_channels_, 0.0);
        block_.assign(pairs_.size() * lags_, 0.0);
        block_counts_.assign(lags_, 0);
    }

    [[nodiscard]] const LagOptions &options() const noexcept { return opt_; }
    [[nodiscard]] std::size_t pair_count() const noexcept { return pairs_.size(); }
    [[nodiscard]] std::size_t lag_count() const noexcept { return lags_; }

    void push(std::span<const double> values) {
        if (values.size() != n_channels_) throw std::invalid_argument("LagCorrelator::push: wrong channel count");
        for (std::size_t c = 0; c < n_channels_; ++c) bin_acc_[c] += values[c];
        if (++in_bin_ == opt_.bin_steps) close_bin();
    }

    void end_segment() {
        flush_block();
        in_bin_ = 0;
        std::fill(bin_acc_.begin(), bin_acc_.end(), 0.0);
        segment_bins_ = 0;
    }

    void merge(const LagCorrelator &other) {
        if (other.pairs_.size() != pairs_.size() || other.lags_ != lags_ || other.opt_.bin_steps != opt_.bin_steps) {
            throw std::invalid_argument("LagCorrelator::merge: incompatible accumulators");
        }
        flush_block();
        LagCorrelator tmp = other;
        tmp.flush_block();
        for (auto &b : tmp.batches_) batches_.push_back(std::move(b));
    }

    /// Per-batch means of one pair at one bin lag (after folding a short
    /// trailing batch into its predecessor).
    [[nodiscard]] std::vector<double> batch_means(std::size_t pair, std::size_t lag) const {
        const auto bs = folded_batches();
        std::vector<double> out;
        out.reserve(bs.size());
        for (const auto &b : bs) {
            if (b.counts[lag] > 0) out.push_back(b.sums[pair * lags_ + lag].value() / static_cast<double>(b.counts[lag]));
        }
        return out;
    }

    /// Estimate of sum_i coeff_i <pair_i at lag_i>, with batch-means error.
    struct Term {
        std::size_t pair;
        std::size_t lag;
        double coeff;
    };
    [[nodiscard]] std::pair<double, double> combination(std::span<const Term> terms) const {
        const auto bs = folded_batches();
        CompensatedSum total;
        std::vector<double> per_batch(bs.size(), 0.0);
        for (const auto &t : terms) {
            if (t.pair >= pairs_.size() || t.lag >= lags_) throw std::out_of_range("LagCorrelator: term out of range");
            CompensatedSum s;
            std::size_t n = 0;
            for (std::size_t b = 0; b < bs.size(); ++b) {
                s.add(bs[b].sums[t.pair * lags_ + t.lag]);
                n += bs[b].counts[t.lag];
                per_batch[b] += bs[b].counts[t.lag] > 0
                                    ? t.coeff * bs[b].sums[t.pair * lags_ + t.lag].value() /
                                          static_cast<double>(bs[b].counts[t.lag])
                                    : 0.0;
            }
            if (n == 0) throw std::runtime_error("LagCorrelator: no samples at requested lag");
            total.add(t.coeff * s.value() / static_cast<double>(n));
        }
        return {total.value(), batch_error(per_batch)};
    }

    [[nodiscard]] std::pair<double, double> mean_and_error(std::size_t pair, std::size_t lag) const {
        const Term t{pair, lag, 1.0};
        return combination(std::span<const Term>(&t, 1));
    }

    [[nodiscard]] std::size_t batch_count() const { return folded_batches().size(); }

    /// Standard error of the mean from batch means.
    [[nodiscard]] static double batch_error(std::span<const double> means) {
        const std::size_t n = means.size();
        if (n < 2) return std::numeric_limits<double>::quiet_NaN();
        double m = 0.0;
        for (double v : means) m += v;
        m /= static_cast<double>(n);
        double ss = 0.0;
        for (double v : means) ss += (v - m) * (v - m);
        return std::sqrt(ss / static_cast<double>(n - 1) / static_cast<double>(n));
    }

  private:
    struct Batch {
        std::vector<CompensatedSum> sums; // pair-major, lags_ per pair
        std::vector<std::size_t> counts;  // per lag
        std::size_t bins = 0;
    };

    // Products are summed in plain doubles over a block of bins and then
    // folded into the compensated batch sums.
    static constexpr std::size_t kBlockBins = 256;

    void close_bin() {
        const double inv = 1.0 / static_cast<double>(opt_.bin_steps);
        const std::size_t slot = ring_pos_;
        for (std::size_t c = 0; c < n_channels_; ++c) {
            history_[slot * n_channels_ + c] = bin_acc_[c] * inv;
            bin_acc_[c] = 0.0;
        }
        in_bin_ = 0;
        ++segment_bins_;
        const std::size_t usable = std::min(segment_bins_, lags_);
        const double *now = &history_[slot * n_channels_];
        for (std::size_t lag = 0; lag < usable; ++lag) {
            const std::size_t past = (slot + lags_ - lag) % lags_;
            const double *then = &history_[past * n_channels_];
            for (std::size_t p = 0; p < pairs_.size(); ++p) {
                block_[p * lags_ + lag] += then[pairs_[p].first] * now[pairs_[p].second];
            }
            ++block_counts_[lag];
        }
        ring_pos_ = (ring_pos_ + 1) % lags_;
        if (++block_bins_ == kBlockBins) flush_block();
        if (++current_batch_bins_ == opt_.batch_bins) {
            flush_block();
            current_batch_bins_ = 0;
            open_ = false;
        }
    }

    void flush_block() {
        if (block_bins_ == 0) return;
        if (!open_) {
            batches_.push_back(Batch{std::vector<CompensatedSum>(pairs_.size() * lags_),
                                     std::vector<std::size_t>(lags_, 0), 0});
            open_ = true;
        }
        Batch &b = batches_.back();
        for (std::size_t i = 0; i < block_.size(); ++i) b.sums[i].add(block_[i]);
        for (std::size_t l = 0; l < lags_; ++l) b.counts[l] += block_counts_[l];
        b.bins += block_bins_;
        std::fill(block_.begin(), block_.end(), 0.0);
        std::fill(block_counts_.begin(), block_counts_.end(), 0);
        block_bins_ = 0;
    }

    [[nodiscard]] std::vector<Batch> folded_batches() const {
        LagCorrelator copy = *this;
        copy.flush_block();
        std::vector<Batch> bs = std::move(copy.batches_);
        if (bs.size() >= 2 && 2 * bs.back().bins < opt_.batch_bins) {
            Batch last = std::move(bs.back());
            bs.pop_back();
            for (std::size_t i = 0; i < last.sums.size(); ++i) bs.back().sums[i].add(last.sums[i]);
            for (std::size_t l = 0; l < lags_; ++l) bs.back().counts[l] += last.counts[l];
            bs.back().bins += last.bins;
        }
        return bs;
    }

    std::size_t n_channels_;
    std::vector<ChannelPair> pairs_;
    LagOptions opt_;
    std::size_t lags_ = 0;

    std::vector<double> history_;
    std::vector<double> bin_acc_;
    std::size_t in_bin_ = 0;
    std::size_t ring_pos_ = 0;
    std::size_t segment_bins_ = 0;

    std::vector<double> block_;
    std::vector<std::size_t> block_counts_;
    std::size_t block_bins_ = 0;
    std::size_t current_batch_bins_ = 0;
    bool open_ = false;
    std::vector<Batch> batches_;
};

/**
 * The channels every monitoring record exposes to the estimators: the two
 * readouts, the state at the start of the step, and the readout noise in
 * readout units (sqrt(tau) xi), so that r = state + noise exactly for the
 * x channel.
 */
namespace monitor {
enum Channel : std::size_t { r_x = 0, r_z, x, z, n_x, n_z, kChannels };
}

enum class ReadoutPair { xx, xz, zx, zz };

[[nodiscard]] inline const char *pair_label(ReadoutPair p) noexcept {
    switch (p) {
    case ReadoutPair::xx: return "<r_x(0) r_x(t)>";
    case ReadoutPair::xz: return "<r_x(0) r_z(t)>";
    case ReadoutPair::zx: return "<r_z(0) r_x(t)>";
    case ReadoutPair::zz: return "<r_z(0) r_z(t)>";
    }
    return "?";
}

/// Noise-invasiveness constraints: <a(0) b(t) + sqrt(tau) xi_a(0) b(t)>.
enum class Constraint { xx, zz, xz, zx };

[[nodiscard]] inline const char *constraint_label(Constraint c) noexcept {
    switch (c) {
    case Constraint::xx: return "<x(0)x(t) + sqrt(tau) xi_x(0) x(t)>";
    case Constraint::zz: return "<z(0)z(t) + sqrt(tau) xi_z(0) z(t)>";
    case Constraint::xz: return "<x(0)z(t) + sqrt(tau) xi_x(0) z(t)>";
    case Constraint::zx: return "<z(0)x(t) + sqrt(tau) xi_z(0) x(t)>";
    }
    return "?";
}

[[nodiscard]] inline bool constraint_decays(Constraint c) noexcept { return c == Constraint::xx || c == Constraint::zz; }

/**
 * Correlation bundle for one monitored system. Feed it with operator()
 * (a StepSample sink) or push(); with_state = false restricts it to the
 * readout pairs.
 */
class MonitorCorrelator {
  public:
    MonitorCorrelator(double dt_over_tau, LagOptions opt, bool with_state = true)
        : dt_over_tau_(dt_over_tau), with_state_(with_state), acc_(monitor::kChannels, make_pairs(with_state), opt) {}

    [[nodiscard]] double bin_width() const noexcept {
        return static_cast<double>(acc_.options().bin_steps) * dt_over_tau_;
    }
    [[nodiscard]] double dt_over_tau() const noexcept { return dt_over_tau_; }
    [[nodiscard]] bool has_state() const noexcept { return with_state_; }
    [[nodiscard]] std::size_t max_lag_bins() const noexcept { return acc_.options().max_lag_bins; }
    [[nodiscard]] const LagCorrelator &accumulator() const noexcept { return acc_; }

    void push(double r_x, double r_z, double x, double z, double n_x, double n_z) {
        const double v[monitor::kChannels] = {r_x, r_z, x, z, n_x, n_z};
        acc_.push(std::span<const double>(v, monitor::kChannels));
    }

    /// StepSample sink; sqrt_tau scales xi into readout units.
    void operator()(const StepSample &s) {
        push(s.r_x, s.r_z, s.before.x, s.before.z, sqrt_tau_x_ * s.xi_x, sqrt_tau_z_ * s.xi_z);
    }
    void set_tau(double tau_x, double tau_z) {
        sqrt_tau_x_ = std::sqrt(tau_x);
        sqrt_tau_z_ = std::sqrt(tau_z);
    }

    void end_segment() { acc_.end_segment(); }
    void merge(const MonitorCorrelator &o) { acc_.merge(o.acc_); }

    [[nodiscard]] static std::size_t readout_index(ReadoutPair p) noexcept { return static_cast<std::size_t>(p); }

    /// Estimate of sum coeff * <pair at lag> for each bin lag 1..max_lag.
    [[nodiscard]] CorrelationEstimate combined(const std::string &label,
                                               std::span<const LagCorrelator::Term> per_lag_terms,
                                               double theory_amplitude, bool decays) const {
        CorrelationEstimate est;
        est.label = label;
        est.batches = acc_.batch_count();
        std::vector<LagCorrelator::Term> terms(per_lag_terms.begin(), per_lag_terms.end());
        for (std::size_t lag = 0; lag <= max_lag_bins(); ++lag) {
            for (auto &t : terms) t.lag = lag;
            const auto [v, e] = acc_.combination(terms);
            if (lag == 0) {
                est.lag0 = v;
                est.lag0_std_error = e;
                continue;
            }
            const double t = static_cast<double>(lag) * bin_width();
            est.lags.push_back(t);
            est.values.push_back(v);
            est.std_errors.push_back(e);
            est.theory.push_back(
                decays ? theory_amplitude * binned_decay(t, acc_.options().bin_steps, dt_over_tau_) : 0.0);
        }
        return est;
    }

    [[nodiscard]] CorrelationEstimate readout(ReadoutPair p) const {
        const LagCorrelator::Term t{readout_index(p), 0, 1.0};
        const bool auto_pair = p == ReadoutPair::xx || p == ReadoutPair::zz;
        return combined(pair_label(p), std::span<const LagCorrelator::Term>(&t, 1), 1.0, auto_pair);
    }

    /// Index of the (first, second) state/noise pair; requires with_state.
    [[nodiscard]] std::size_t pair_index(std::size_t first, std::size_t second) const {
        const auto pairs = make_pairs(with_state_);
        for (std::size_t i = 0; i < pairs.size(); ++i) {
            if (pairs[i].first == first && pairs[i].second == second) return i;
        }
        throw std::invalid_argument("MonitorCorrelator: pair not tracked (state channels disabled?)");
    }

  private:
    static std::vector<ChannelPair> make_pairs(bool with_state) {
        using namespace monitor;
        std::vector<ChannelPair> p = {{r_x, r_x}, {r_x, r_z}, {r_z, r_x}, {r_z, r_z}};
        if (with_state) {
            for (const std::size_t later : {x, z}) {
                for (const std::size_t earlier : {x, z, n_x, n_z}) p.push_back({earlier, later});
            }
        }
        return p;
    }

    double dt_over_tau_;
    bool with_state_;
    LagCorrelator acc_;
    double sqrt_tau_x_ = 1.0;
    double sqrt_tau_z_ = 1.0;
};

/// Options for the record-level estimators; lags and widths in units of tau.
struct CorrelationOptions {
    double max_lag = 6.0;
    double bin_width = 0.1;
    std::size_t batches = 20;
    double burn_in = 0.0;
};

namespace detail {

inline LagOptions lag_options(const CorrelationOptions &o, double dt_over_tau, std::size_t expected_steps) {
    if (!(o.bin_width > 0.0) || !(o.max_lag > 0.0)) {
        throw std::invalid_argument("correlation options: bin width and max lag must be positive");
    }
    const double bins_exact = o.bin_width / dt_over_tau;
    const auto bin_steps = static_cast<std::size_t>(std::llround(bins_exact));
    if (bin_steps == 0 || std::abs(bins_exact - static_cast<double>(bin_steps)) > 1e-6 * bins_exact) {
        throw std::invalid_argument("correlation options: bin width must be a whole number of steps");
    }
    const auto max_lag_bins = static_cast<std::size_t>(std::llround(o.max_lag / o.bin_width));
    LagOptions lo;
    lo.bin_steps = bin_steps;
    lo.max_lag_bins = std::max<std::size_t>(1, max_lag_bins);
    lo.batches = o.batches;
    lo.expected_steps = expected_steps;
    return lo;
}

inline std::size_t burn_in_steps(const CorrelationOptions &o, double dt_over_tau) {
    return static_cast<std::size_t>(std::llround(o.burn_in / dt_over_tau));
}

inline void check_length(std::size_t usable_steps, const LagOptions &lo) {
    // The record must be long compared with the largest lag.
    if (usable_steps < 10 * lo.bin_steps * (lo.max_lag_bins + 1)) {
        throw std::invalid_argument("record too short for the requested maximum lag");
    }
}

}  // namespace detail

/**
 * Readout correlator <r_a(0) r_b(t)> over an ensemble of records (a single
 * record is an ensemble of one). Temporal and ensemble averaging are both
 * applied: every time origin after burn-in in every record contributes.
 */
[[nodiscard]] inline CorrelationEstimate autocorrelate(std::span<const ReadoutRecord> records, ReadoutPair pair,
                                                       const CorrelationOptions &opt = {}) {
    if (records.empty()) throw std::invalid_argument("autocorrelate: no records");
    const double dt = records.front().dt;
    const double tau = records.front().tau;
    std::size_t total = 0;
    for (const auto &r : records) {
        if (r.dt != dt || r.tau != tau) throw std::invalid_argument("autocorrelate: records differ in dt or tau");
        if (r.r_x.size() != r.r_z.size()) throw std::invalid_argument("autocorrelate: channel length mismatch");
        total += r.size();
    }
    const double dtr = dt / tau;
    const std::size_t burn = detail::burn_in_steps(opt, dtr);
    const LagOptions lo = detail::lag_options(opt, dtr, total - std::min(total, burn * records.size()));
    detail::check_length(records.size() == 1 ? records.front().size() - std::min(records.front().size(), burn)
                                             : total - std::min(total, burn * records.size()),
                         lo);
    MonitorCorrelator mc(dtr, lo, false);
    for (const auto &r : records) {
        for (std::size_t k = burn; k < r.size(); ++k) mc.push(r.r_x[k], r.r_z[k], 0.0, 0.0, 0.0, 0.0);
        mc.end_segment();
    }
    return mc.readout(pair);
}

[[nodiscard]] inline CorrelationEstimate autocorrelate(const ReadoutRecord &record, ReadoutPair pair,
                                                       const CorrelationOptions &opt = {}) {
    return autocorrelate(std::span<const ReadoutRecord>(&record, 1), pair, opt);
}

/// Combined constraint estimate with its state-state and noise-state parts.
struct ConstraintReport {
    Constraint which = Constraint::xx;
    CorrelationEstimate combined;
    CorrelationEstimate state_part; ///< <a(0) b(t)>
    CorrelationEstimate noise_part; ///< sqrt(tau) <xi_a(0) b(t)>
};

namespace detail {

inline std::pair<std::size_t, std::size_t> constraint_channels(Constraint c) {
    using namespace monitor;
    switch (c) {
    case Constraint::xx: return {x, x};
    case Constraint::zz: return {z, z};
    case Constraint::xz: return {x, z};
    case Constraint::zx: return {z, x};
    }
    return {x, x};
}

}  // namespace detail

/// Constraint report from an already-filled correlator.
[[nodiscard]] inline ConstraintReport constraint_report(const MonitorCorrelator &mc, Constraint which) {
    if (!mc.has_state()) throw std::invalid_argument("constraint_check: correlator has no state channels");
    const auto [a, b] = detail::constraint_channels(which);
    const std::size_t noise = a == monitor::x ? monitor::n_x : monitor::n_z;
    const std::size_t state_pair = mc.pair_index(a, b);
    const std::size_t noise_pair = mc.pair_index(noise, b);
    const bool decays = constraint_decays(which);
    ConstraintReport rep;
    rep.which = which;
    const LagCorrelator::Term both[2] = {{state_pair, 0, 1.0}, {noise_pair, 0, 1.0}};
    rep.combined = mc.combined(constraint_label(which), both, 1.0, decays);
    rep.state_part = mc.combined("state part", std::span<const LagCorrelator::Term>(&both[0], 1), 1.0, false);
    rep.noise_part = mc.combined("noise part", std::span<const LagCorrelator::Term>(&both[1], 1), 1.0, false);
    rep.state_part.theory.clear();
    rep.noise_part.theory.clear();
    return rep;
}

/**
 * Noise-invasiveness constraint over trajectories that kept their noise
 * provenance and full-resolution states.
 */
[[nodiscard]] inline ConstraintReport constraint_check(std::span<const TrajectoryRecord> trajectories, Constraint which,
                                                       const CorrelationOptions &opt = {}) {
    if (trajectories.empty()) throw std::invalid_argument("constraint_check: no trajectories");
    std::size_t total = 0;
    for (const auto &tr : trajectories) {
        if (!tr.has_noise()) throw std::invalid_argument("constraint_check: trajectory lacks noise provenance");
        if (tr.stride != 1) throw std::invalid_argument("constraint_check: needs full-resolution states (stride 1)");
        total += tr.readouts.size();
    }
    const auto &first = trajectories.front();
    const double dtr = first.dt / first.readouts.tau;
    const std::size_t burn = detail::burn_in_steps(opt, dtr);
    const LagOptions lo = detail::lag_options(opt, dtr, total - std::min(total, burn * trajectories.size()));
    MonitorCorrelator mc(dtr, lo, true);
    mc.set_tau(first.readouts.tau_x, first.readouts.tau_z);
    for (const auto &tr : trajectories) {
        if (tr.dt != first.dt) throw std::invalid_argument("constraint_check: trajectories differ in dt");
        const double sx = std::sqrt(tr.readouts.tau_x), sz = std::sqrt(tr.readouts.tau_z);
        for (std::size_t k = burn; k < tr.readouts.size(); ++k) {
            mc.push(tr.readouts.r_x[k], tr.readouts.r_z[k], tr.states[k].x, tr.states[k].z, sx * tr.xi_x[k],
                    sz * tr.xi_z[k]);
        }
        mc.end_segment();
    }
    return constraint_report(mc, which);
}

struct SteadyStateReport {
    double max_abs_difference = 0.0;
    /// Largest |difference| / joint standard error over all lags.
    double max_sigma = 0.0;
    bool agree = false;
};

/**
 * Compares the same correlator estimated from two ensembles (e.g. two
 * initial states). Agreement means every lag is within `sigmas` joint
 * standard errors.
 */
[[nodiscard]] inline SteadyStateReport steady_state_check(const CorrelationEstimate &a, const CorrelationEstimate &b,
                                                          double sigmas = 3.0) {
    if (a.size() != b.size()) throw std::invalid_argument("steady_state_check: estimates differ in lags");
    SteadyStateReport rep;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = std::abs(a.values[i] - b.values[i]);
        const double joint = std::hypot(a.std_errors[i], b.std_errors[i]);
        rep.max_abs_difference = std::max(rep.max_abs_difference, d);
        rep.max_sigma = std::max(rep.max_sigma, joint > 0.0 ? d / joint : (d > 0.0 ? INFINITY : 0.0));
    }
    rep.agree = rep.max_sigma <= sigmas;
    return rep;
}

[[nodiscard]] inline SteadyStateReport steady_state_check(std::span<const ReadoutRecord> first,
                                                          std::span<const ReadoutRecord> second, ReadoutPair pair,
                                                          const CorrelationOptions &opt, double sigmas = 3.0) {
    return steady_state_check(autocorrelate(first, pair, opt), autocorrelate(second, pair, opt), sigmas);
}

}  // namespace xzmon
