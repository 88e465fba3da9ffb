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
 * @file io.hpp
 * CSV tables and SVG line charts.
 *
 * Numbers are written in the shortest form that round-trips (std::to_chars),
 * so identical data always gives identical bytes. Every file starts with
 * '#'-prefixed header lines (XML comments in SVG).
 */

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <type_traits>
#include <vector>

#include "emulator.hpp"
#include "filtering.hpp"
#include "integrators.hpp"
#include "leggett_garg.hpp"
#include "statistics.hpp"

namespace xzmon {

[[nodiscard]] inline std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    if (res.ec != std::errc{}) throw std::runtime_error("format_number: conversion failed");
    return std::string(buf, res.ptr);
}

/// Header lines shared by every artifact of one experiment run.
using FileHeader = std::vector<std::string>;

/// Streaming CSV writer; throws on an unwritable path.
class CsvWriter {
  public:
    CsvWriter(const std::filesystem::path &path, const FileHeader &header, const std::vector<std::string> &columns)
        : path_(path), out_(path, std::ios::binary | std::ios::trunc), width_(columns.size()) {
        if (!out_) throw std::runtime_error("cannot write '" + path.string() + "'");
        for (const auto &h : header) out_ << "# " << h << '\n';
        for (std::size_t i = 0; i < columns.size(); ++i) out_ << (i ? "," : "") << columns[i];
        out_ << '\n';
    }

    template <class... Cells>
    void row(const Cells &...cells) {
        if (sizeof...(cells) != width_) throw std::invalid_argument("CsvWriter: wrong number of cells");
        std::size_t i = 0;
        ((out_ << (i++ ? "," : "") << cell(cells)), ...);
        out_ << '\n';
    }

    void close() {
        out_.close();
        if (!out_) throw std::runtime_error("error while writing '" + path_.string() + "'");
    }
    ~CsvWriter() = default;

  private:
    template <class T>
    static std::string cell(const T &v) {
        if constexpr (std::is_same_v<T, bool>) {
            return v ? "1" : "0";
        } else if constexpr (std::is_integral_v<T>) {
            return std::to_string(v);
        } else if constexpr (std::is_floating_point_v<T>) {
            return format_number(static_cast<double>(v));
        } else {
            return std::string(v);
        }
    }

    std::filesystem::path path_;
    std::ofstream out_;
    std::size_t width_;
};

inline void write_correlation_csv(const std::filesystem::path &path, const FileHeader &header,
                                  const CorrelationEstimate &est) {
    CsvWriter w(path, header, {"lag", "estimate", "stderr", "theory"});
    for (std::size_t i = 0; i < est.size(); ++i) {
        const double th = i < est.theory.size() ? est.theory[i] : std::numeric_limits<double>::quiet_NaN();
        w.row(est.lags[i], est.values[i], est.std_errors[i], th);
    }
    w.close();
}

inline void write_constraint_csv(const std::filesystem::path &path, const FileHeader &header,
                                 const ConstraintReport &rep) {
    CsvWriter w(path, header, {"lag", "estimate", "stderr", "theory", "state_part", "noise_part"});
    const auto &c = rep.combined;
    for (std::size_t i = 0; i < c.size(); ++i) {
        w.row(c.lags[i], c.values[i], c.std_errors[i], c.theory[i], rep.state_part.values[i],
              rep.noise_part.values[i]);
    }
    w.close();
}

inline void write_lg_csv(const std::filesystem::path &path, const FileHeader &header,
                         const std::vector<LGResult> &rows) {
    CsvWriter w(path, header, {"phi", "t", "lhs", "stderr", "theory", "bound", "violated"});
    for (const auto &r : rows) w.row(r.phi, r.t, r.lhs, r.std_error, r.theory, r.bound, r.violated());
    w.close();
}

/// Rows t, x, y, z, r_x, r_z (plus xi_x, xi_z when the record kept its
/// noise) at every state sample that has a readout after it.
inline void write_trajectory_csv(const std::filesystem::path &path, const FileHeader &header,
                                 const TrajectoryRecord &rec) {
    std::vector<std::string> cols = {"t", "x", "y", "z", "r_x", "r_z"};
    if (rec.has_noise()) {
        cols.emplace_back("xi_x");
        cols.emplace_back("xi_z");
    }
    CsvWriter w(path, header, cols);
    for (std::size_t j = 0; j < rec.states.size(); ++j) {
        const std::size_t k = j * rec.stride;
        if (k >= rec.readouts.size()) break;
        const auto &s = rec.states[j];
        if (rec.has_noise()) {
            w.row(rec.time_of_state(j), s.x, s.y, s.z, rec.readouts.r_x[k], rec.readouts.r_z[k], rec.xi_x[k],
                  rec.xi_z[k]);
        } else {
            w.row(rec.time_of_state(j), s.x, s.y, s.z, rec.readouts.r_x[k], rec.readouts.r_z[k]);
        }
    }
    w.close();
}

inline void write_emulator_csv(const std::filesystem::path &path, const FileHeader &header,
                               const EmulatedReadouts &rd, std::size_t stride = 1) {
    CsvWriter w(path, header, {"t", "theta", "x", "z", "r_tilde", "s_tilde", "rx_eff", "rz_eff"});
    for (std::size_t k = 0; k < rd.size(); k += std::max<std::size_t>(stride, 1)) {
        const double th = rd.theta[k];
        const bool has = rd.has_readouts();
        const double nan = std::numeric_limits<double>::quiet_NaN();
        w.row(static_cast<double>(k) * rd.dt / rd.tau, th, std::cos(th), std::sin(th), rd.r_tilde[k],
              has ? rd.s_tilde[k] : nan, has ? rd.r_x[k] : nan, has ? rd.r_z[k] : nan);
    }
    w.close();
}

inline void write_filter_csv(const std::filesystem::path &path, const FileHeader &header, std::span<const double> raw,
                             const FilteredSignal &filtered, std::span<const double> truth, double tau,
                             std::size_t stride = 1) {
    if (raw.size() != filtered.size() || truth.size() != filtered.size()) {
        throw std::invalid_argument("write_filter_csv: length mismatch");
    }
    CsvWriter w(path, header, {"t", "raw", "filtered", "truth"});
    for (std::size_t k = 0; k < raw.size(); k += std::max<std::size_t>(stride, 1)) {
        w.row(static_cast<double>(k) * filtered.dt / tau, raw[k], filtered.values[k], truth[k]);
    }
    w.close();
}

// ---------------------------------------------------------------------------
// SVG line charts

struct PlotSeries {
    std::string name;
    std::vector<double> x;
    std::vector<double> y;
    bool dashed = false;
};

struct Plot {
    std::string title;
    std::string x_label;
    std::string y_label;
    std::vector<PlotSeries> series;
    std::vector<double> reference_lines; ///< horizontal, dotted
};

namespace detail {

inline std::string xml_escape(std::string_view s) {
    std::string out;
    for (const char c : s) {
        switch (c) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '"': out += "&quot;"; break;
        default: out += c;
        }
    }
    return out;
}

/// Tick positions at a 1-2-5 spacing covering [lo, hi].
inline std::vector<double> nice_ticks(double lo, double hi, int target = 6) {
    const double span = hi - lo;
    const double raw = span / target;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    double step = mag;
    for (const double m : {1.0, 2.0, 5.0, 10.0}) {
        step = m * mag;
        if (span / step <= target) break;
    }
    std::vector<double> ticks;
    for (double t = std::ceil(lo / step) * step; t <= hi + 1e-9 * step; t += step) {
        ticks.push_back(std::abs(t) < 1e-12 * step ? 0.0 : t);
    }
    return ticks;
}

inline std::string short_number(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

}  // namespace detail

inline void write_svg(const std::filesystem::path &path, const FileHeader &header, const Plot &plot) {
    constexpr double W = 720, H = 440, L = 70, R = 170, T = 40, B = 55;
    double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
    for (const auto &s : plot.series) {
        for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
            if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
            x0 = std::min(x0, s.x[i]);
            x1 = std::max(x1, s.x[i]);
            y0 = std::min(y0, s.y[i]);
            y1 = std::max(y1, s.y[i]);
        }
    }
    for (const double r : plot.reference_lines) {
        y0 = std::min(y0, r);
        y1 = std::max(y1, r);
    }
    if (!std::isfinite(x0)) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
    if (x1 <= x0) x1 = x0 + 1;
    if (y1 <= y0) y1 = y0 + 1;
    const double pad = 0.05 * (y1 - y0);
    y0 -= pad;
    y1 += pad;
    auto px = [&](double x) { return L + (x - x0) / (x1 - x0) * (W - L - R); };
    auto py = [&](double y) { return H - B - (y - y0) / (y1 - y0) * (H - T - B); };
    auto num = [](double v) { return detail::short_number(v); };

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
    out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    for (const auto &h : header) out << "<!-- " << detail::xml_escape(h) << " -->\n";
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" viewBox=\"0 0 "
        << W << ' ' << H << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<text x=\"" << W / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">"
        << detail::xml_escape(plot.title) << "</text>\n";
    out << "<rect x=\"" << L << "\" y=\"" << T << "\" width=\"" << W - L - R << "\" height=\"" << H - T - B
        << "\" fill=\"none\" stroke=\"black\"/>\n";
    for (const double t : detail::nice_ticks(x0, x1)) {
        out << "<line x1=\"" << num(px(t)) << "\" y1=\"" << H - B << "\" x2=\"" << num(px(t)) << "\" y2=\""
            << H - B + 5 << "\" stroke=\"black\"/><text x=\"" << num(px(t)) << "\" y=\"" << H - B + 18
            << "\" text-anchor=\"middle\">" << num(t) << "</text>\n";
    }
    for (const double t : detail::nice_ticks(y0, y1)) {
        out << "<line x1=\"" << L - 5 << "\" y1=\"" << num(py(t)) << "\" x2=\"" << L << "\" y2=\"" << num(py(t))
            << "\" stroke=\"black\"/><text x=\"" << L - 8 << "\" y=\"" << num(py(t) + 4)
            << "\" text-anchor=\"end\">" << num(t) << "</text>\n";
    }
    out << "<text x=\"" << (L + W - R) / 2 << "\" y=\"" << H - 12 << "\" text-anchor=\"middle\">"
        << detail::xml_escape(plot.x_label) << "</text>\n";
    out << "<text transform=\"translate(16," << (T + H - B) / 2 << ") rotate(-90)\" text-anchor=\"middle\">"
        << detail::xml_escape(plot.y_label) << "</text>\n";
    for (const double r : plot.reference_lines) {
        out << "<line x1=\"" << L << "\" y1=\"" << num(py(r)) << "\" x2=\"" << W - R << "\" y2=\"" << num(py(r))
            << "\" stroke=\"gray\" stroke-dasharray=\"2,3\"/>\n";
    }
    static constexpr const char *kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                              "#ff7f0e", "#8c564b", "#e377c2", "#17becf"};
    for (std::size_t si = 0; si < plot.series.size(); ++si) {
        const auto &s = plot.series[si];
        const char *color = kColors[si % std::size(kColors)];
        out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\""
            << (s.dashed ? " stroke-dasharray=\"6,4\"" : "") << " points=\"";
        bool first = true;
        for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
            if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
            out << (first ? "" : " ") << num(px(s.x[i])) << ',' << num(py(s.y[i]));
            first = false;
        }
        out << "\"/>\n";
        const double ly = T + 14 + 18 * static_cast<double>(si);
        out << "<line x1=\"" << W - R + 10 << "\" y1=\"" << ly << "\" x2=\"" << W - R + 34 << "\" y2=\"" << ly
            << "\" stroke=\"" << color << "\" stroke-width=\"2\"" << (s.dashed ? " stroke-dasharray=\"6,4\"" : "")
            << "/><text x=\"" << W - R + 40 << "\" y=\"" << ly + 4 << "\">" << detail::xml_escape(s.name)
            << "</text>\n";
    }
    out << "</svg>\n";
    out.close();
    if (!out) throw std::runtime_error("error while writing '" + path.string() + "'");
}

}  // namespace xzmon
