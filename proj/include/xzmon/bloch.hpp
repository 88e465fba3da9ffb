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
 * @file bloch.hpp
 * Single-qubit states. The Bloch vector is the working representation;
 * the 2x2 density matrix view only exists for matrix-level checks.
 */

#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>

namespace xzmon {

/// Slack allowed on |s|^2 <= 1 and on |s|^2 == 1 for pure states.
inline constexpr double kBallTolerance = 1e-9;
inline constexpr double kPurityTolerance = 1e-9;

struct BlochState {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    [[nodiscard]] constexpr double norm2() const noexcept { return x * x + y * y + z * z; }
    [[nodiscard]] double norm() const noexcept { return std::sqrt(norm2()); }
    [[nodiscard]] bool finite() const noexcept {
        return std::isfinite(x) && std::isfinite(y) && std::isfinite(z);
    }

    friend constexpr bool operator==(const BlochState &, const BlochState &) = default;
};

/// Euclidean distance between two Bloch vectors.
[[nodiscard]] inline double bloch_distance(const BlochState &a, const BlochState &b) noexcept {
    const double dx = a.x - b.x, dy = a.y - b.y, dz = a.z - b.z;
    return std::sqrt(dx * dx + dy * dy + dz * dz);
}

[[nodiscard]] inline bool bloch_ball_check(const BlochState &s, double tol = kBallTolerance) noexcept {
    return s.norm2() <= 1.0 + tol;
}

[[nodiscard]] inline bool is_pure(const BlochState &s, double tol = kPurityTolerance) noexcept {
    return std::abs(s.norm2() - 1.0) <= tol;
}

/// Component along the direction at angle phi in the x-z plane,
/// cos(phi) x + sin(phi) z.
[[nodiscard]] inline double project_direction(const BlochState &s, double phi) noexcept {
    return std::cos(phi) * s.x + std::sin(phi) * s.z;
}

/**
 * Density matrix in the sigma_z eigenbasis, ordered (|+z>, |-z>).
 */
struct DensityMatrixView {
    using complex = std::complex<double>;
    complex rho00{0.5, 0.0};
    complex rho01{0.0, 0.0};
    complex rho10{0.0, 0.0};
    complex rho11{0.5, 0.0};

    [[nodiscard]] complex trace() const noexcept { return rho00 + rho11; }
    [[nodiscard]] double hermiticity_error() const noexcept {
        return std::max({std::abs(rho00.imag()), std::abs(rho11.imag()),
                         std::abs(rho01 - std::conj(rho10))});
    }
    [[nodiscard]] double determinant() const noexcept { return (rho00 * rho11 - rho01 * rho10).real(); }
};

/// rho = (I + x sx + y sy + z sz) / 2.
[[nodiscard]] inline DensityMatrixView bloch_to_density(const BlochState &s) {
    if (!s.finite()) {
        throw std::invalid_argument("bloch_to_density: non-finite Bloch coordinates");
    }
    if (!bloch_ball_check(s)) {
        throw std::invalid_argument("bloch_to_density: state outside the Bloch ball (|s|^2 = " +
                                    std::to_string(s.norm2()) + ")");
    }
    using complex = DensityMatrixView::complex;
    return DensityMatrixView{complex{0.5 * (1.0 + s.z), 0.0}, complex{0.5 * s.x, -0.5 * s.y},
                             complex{0.5 * s.x, 0.5 * s.y}, complex{0.5 * (1.0 - s.z), 0.0}};
}

/// Tr[rho sigma_i] for i = x, y, z.
[[nodiscard]] inline BlochState density_to_bloch(const DensityMatrixView &m, double tol = 1e-12) {
    if (m.hermiticity_error() > tol) {
        throw std::invalid_argument("density_to_bloch: matrix is not Hermitian");
    }
    if (std::abs(m.trace() - 1.0) > tol) {
        throw std::invalid_argument("density_to_bloch: trace differs from one");
    }
    // Tr[rho sx] = rho01 + rho10, Tr[rho sy] = i(rho01 - rho10), Tr[rho sz] = rho00 - rho11
    const auto sx = m.rho01 + m.rho10;
    const auto sy = DensityMatrixView::complex{0.0, 1.0} * (m.rho01 - m.rho10);
    const auto sz = m.rho00 - m.rho11;
    return BlochState{sx.real(), sy.real(), sz.real()};
}

}  // namespace xzmon
