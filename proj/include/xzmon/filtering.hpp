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
 * @file filtering.hpp
 * Exponentially weighted moving average of raw readouts and tracking
 * metrics against the true Bloch component.
 */

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

namespace xzmon {

struct FilteredSignal {
    double dt = 0.0;
    double tau_f = 1.0;
    std::vector<double> values; ///< values[k] at t = k dt; not clipped to [-1, 1]

    [[nodiscard]] std::size_t size() const noexcept { return values.size(); }
    /// Samples with |value| > 1, left in place.
    [[nodiscard]] std::size_t excursions() const noexcept {
        std::size_t n = 0;
        for (double v : values) n += std::abs(v) > 1.0 ? 1 : 0;
        return n;
    }
};

/// y[0] = r[0], y[k+1] = y[k] + (dt / tau_f)(r[k] - y[k]).
[[nodiscard]] inline FilteredSignal ewma(std::span<const double> r, double dt, double tau_f) {
    if (!(dt > 0.0)) throw std::invalid_argument("ewma: dt must be positive");
    if (!(tau_f > dt)) throw std::invalid_argument("ewma: filter time must exceed the step");
    FilteredSignal out{dt, tau_f, {}};
    out.values.reserve(r.size());
    if (r.empty()) return out;
    const double a = dt / tau_f;
    double y = r[0];
    out.values.push_back(y);
    for (std::size_t k = 0; k + 1 < r.size(); ++k) {
        y += a * (r[k] - y);
        out.values.push_back(y);
    }
    return out;
}

struct TrackingReport {
    double rms_error = 0.0;
    double correlation = 0.0;
    /// Lag (units of time, positive = filter behind truth) at the maximum of
    /// the filtered/truth cross-correlation.
    double best_lag = 0.0;
    std::size_t samples = 0;
};

namespace detail {

inline double pearson(std::span<const double> a, std::span<const double> b) {
    const std::size_t n = a.size();
    double ma = 0.0, mb = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        ma += a[i];
        mb += b[i];
    }
    ma /= static_cast<double>(n);
    mb /= static_cast<double>(n);
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sab += (a[i] - ma) * (b[i] - mb);
        saa += (a[i] - ma) * (a[i] - ma);
        sbb += (b[i] - mb) * (b[i] - mb);
    }
    if (saa == 0.0 || sbb == 0.0) return std::numeric_limits<double>::quiet_NaN();
    return sab / std::sqrt(saa * sbb);
}

}  // namespace detail

/**
 * Metrics after discarding a burn-in of 5 tau_f. The lag search covers
 * -max_lag .. max_lag (default 3 tau_f) in steps of one sample.
 */
[[nodiscard]] inline TrackingReport tracking_report(const FilteredSignal &filtered, std::span<const double> truth,
                                                    double max_lag = -1.0) {
    if (filtered.size() != truth.size()) throw std::invalid_argument("tracking_report: length mismatch");
    const auto burn = static_cast<std::size_t>(std::ceil(5.0 * filtered.tau_f / filtered.dt));
    if (filtered.size() <= burn + 2) throw std::invalid_argument("tracking_report: record shorter than the burn-in");
    const std::span<const double> f(filtered.values.data() + burn, filtered.size() - burn);
    const std::span<const double> t(truth.data() + burn, truth.size() - burn);
    TrackingReport rep;
    rep.samples = f.size();
    double ss = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) ss += (f[i] - t[i]) * (f[i] - t[i]);
    rep.rms_error = std::sqrt(ss / static_cast<double>(f.size()));
    rep.correlation = detail::pearson(f, t);

    if (max_lag < 0.0) max_lag = 3.0 * filtered.tau_f;
    const auto lags = static_cast<std::ptrdiff_t>(
        std::min<std::size_t>(static_cast<std::size_t>(max_lag / filtered.dt), f.size() / 2));
    double best = -std::numeric_limits<double>::infinity();
    for (std::ptrdiff_t L = -lags; L <= lags; ++L) {
        // filtered at i + L against truth at i
        const auto a = static_cast<std::size_t>(std::abs(L));
        const double c = L >= 0 ? detail::pearson(f.subspan(a), t.first(t.size() - a))
                                : detail::pearson(f.first(f.size() - a), t.subspan(a));
        if (c > best) {
            best = c;
            rep.best_lag = static_cast<double>(L) * filtered.dt;
        }
    }
    return rep;
}

}  // namespace xzmon
