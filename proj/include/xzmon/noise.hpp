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
 * @file noise.hpp
 * Seeded Gaussian noise streams.
 *
 * Every stream is identified by (seed, stream id). The stream id packs a
 * trajectory index and a channel tag, and the generator state is derived
 * from both through a splitmix64 mix, so an ensemble can hand each
 * trajectory its own streams without any coordination between workers.
 *
 * A discretized white noise xi(t) with <xi(t1) xi(t2)> = delta(t1 - t2)
 * is sampled per step as N(0, 1/dt).
 */

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

namespace xzmon {

/// What a stream is used for. The numeric value is part of the stream id.
enum class NoiseChannel : std::uint32_t {
    readout_x = 0,
    readout_z = 1,
    branch_x = 2,   ///< mixture-component choice for the x readout
    branch_z = 3,   ///< mixture-component choice for the z readout
    physical = 4,   ///< emulator drive r~
    subjective = 5, ///< emulator mixing noise s~
    shots = 6,      ///< projective-measurement sampling
};

[[nodiscard]] inline const char *channel_name(NoiseChannel c) noexcept {
    switch (c) {
    case NoiseChannel::readout_x: return "readout_x";
    case NoiseChannel::readout_z: return "readout_z";
    case NoiseChannel::branch_x: return "branch_x";
    case NoiseChannel::branch_z: return "branch_z";
    case NoiseChannel::physical: return "physical";
    case NoiseChannel::subjective: return "subjective";
    case NoiseChannel::shots: return "shots";
    }
    return "unknown";
}

[[nodiscard]] constexpr std::uint64_t splitmix64(std::uint64_t v) noexcept {
    v += 0x9e3779b97f4a7c15ULL;
    v = (v ^ (v >> 30)) * 0xbf58476d1ce4e5b9ULL;
    v = (v ^ (v >> 27)) * 0x94d049bb133111ebULL;
    return v ^ (v >> 31);
}

/// Stream id layout: trajectory index in the high bits, channel tag in the low 8.
[[nodiscard]] constexpr std::uint64_t stream_id(std::uint64_t trajectory, NoiseChannel channel) noexcept {
    return (trajectory << 8) | static_cast<std::uint64_t>(channel);
}

inline constexpr const char *kStreamLayout = "stream_id=(trajectory<<8)|channel;"
                                             "engine=mt19937_64(splitmix64(seed^splitmix64(id)))";

/// One white-noise sample together with the step it was drawn for.
struct WhiteNoiseIncrement {
    double value = 0.0; ///< units time^(-1/2)
    double dt = 0.0;
};

/**
 * A single-owner source of standard normal and uniform variates.
 *
 * A muted stream returns exactly zero from every normal draw and 1/2 from
 * every uniform draw; it is used for the noiseless limits of the dynamics.
 */
class NoiseStream {
  public:
    NoiseStream(std::uint64_t seed, std::uint64_t id)
        : seed_(seed), id_(id), engine_(splitmix64(seed ^ splitmix64(id))) {}

    static NoiseStream muted() {
        NoiseStream s(0, 0);
        s.muted_ = true;
        return s;
    }

    [[nodiscard]] std::uint64_t seed() const noexcept { return seed_; }
    [[nodiscard]] std::uint64_t id() const noexcept { return id_; }
    [[nodiscard]] bool is_muted() const noexcept { return muted_; }

    double standard_normal() { return muted_ ? 0.0 : normal_(engine_); }

    double uniform() { return muted_ ? 0.5 : uniform_(engine_); }

    WhiteNoiseIncrement next_increment(double dt) {
        if (!(dt > 0.0)) {
            throw std::invalid_argument("next_increment: dt must be positive, got " + std::to_string(dt));
        }
        return {standard_normal() / std::sqrt(dt), dt};
    }

  private:
    std::uint64_t seed_;
    std::uint64_t id_;
    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_{0.0, 1.0};
    std::uniform_real_distribution<double> uniform_{0.0, 1.0};
    bool muted_ = false;
};

/// xi_phi = cos(phi) xi_x + sin(phi) xi_z.
[[nodiscard]] inline WhiteNoiseIncrement rotate_noise(const WhiteNoiseIncrement &xi_x, const WhiteNoiseIncrement &xi_z,
                                                      double phi) {
    if (xi_x.dt != xi_z.dt) {
        throw std::invalid_argument("rotate_noise: increments drawn for different dt");
    }
    return {std::cos(phi) * xi_x.value + std::sin(phi) * xi_z.value, xi_x.dt};
}

}  // namespace xzmon
