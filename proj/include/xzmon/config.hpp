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
 * @file config.hpp
 * Experiment configuration: a flat JSON object whose keys are listed by
 * config_keys(). Unknown keys and type mismatches are errors. Values given
 * on the command line are applied after the file and are listed in the
 * resolved config's "overrides" entry. The worker-thread count is an
 * execution setting, not a config key, so it never changes an output file.
 */

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "bloch.hpp"
#include "integrators.hpp"
#include "measurement.hpp"

namespace xzmon {

struct ExperimentConfig {
    std::uint64_t seed = 1;
    double dt_over_tau = 0.01;
    double tau = 1.0;
    double tau_x = 0.0; ///< 0 means tau
    double tau_z = 0.0;
    double duration = 0.0; ///< units of tau; 0 means the experiment default
    std::uint64_t n_traj = 0; ///< 0 means the experiment default
    BlochState initial{0.0, 0.0, 1.0};
    std::string scheme = "kraus";
    bool noise_provenance = false;

    // correlator estimators
    double max_lag = 6.0;
    double bin_width = 0.25;
    std::uint64_t batches = 20;
    double burn_in = 0.0;
    std::vector<double> phi_grid{0.0, std::numbers::pi / 6, std::numbers::pi / 4, std::numbers::pi / 3,
                                 std::numbers::pi / 2};

    // Leggett-Garg
    double phi = std::numbers::pi / 4;
    double lg_t = 0.1;
    double lg_bin_width = 0.1;
    double lg_max_t = 1.5;
    double omega = 1.0;
    double delta_t = 0.0; ///< 0 means pi / (3 omega), or pi/3 when omega = 0
    std::uint64_t n_shots = 100000;

    // filtering
    double tau_f = 1.0;
    std::uint64_t csv_stride = 10;

    // emulator
    double theta0 = 0.0;
    std::uint64_t recon_traj = 20;
    double recon_duration = 10.0;
    std::uint64_t variance_runs = 10000;

    /// Keys set from the command line, in the order applied.
    std::vector<std::string> overrides;

    [[nodiscard]] double resolved_delta_t() const {
        if (delta_t > 0.0) return delta_t;
        return omega != 0.0 ? std::numbers::pi / (3.0 * std::abs(omega)) : std::numbers::pi / 3.0;
    }

    [[nodiscard]] std::uint64_t resolved_n_traj(std::uint64_t default_n) const { return n_traj > 0 ? n_traj : default_n; }
    [[nodiscard]] double resolved_duration(double default_duration) const {
        return duration > 0.0 ? duration : default_duration;
    }

    [[nodiscard]] RunConfig run_config(double default_duration) const {
        RunConfig rc;
        rc.tau = tau;
        rc.tau_x = tau_x;
        rc.tau_z = tau_z;
        rc.dt_over_tau = dt_over_tau;
        rc.duration = duration > 0.0 ? duration : default_duration;
        rc.seed = seed;
        rc.keep_noise = noise_provenance;
        return rc;
    }

    void validate() const {
        if (!(tau > 0.0)) throw std::invalid_argument("config key 'tau': must be positive");
        if (!(dt_over_tau > 0.0)) throw std::invalid_argument("config key 'dt_over_tau': must be positive");
        if (dt_over_tau > kMaxStepRatio) {
            throw std::invalid_argument("config key 'dt_over_tau': " + std::to_string(dt_over_tau) +
                                        " exceeds the weak-measurement limit 0.1");
        }
        if (tau_x < 0.0 || tau_z < 0.0) throw std::invalid_argument("config keys 'tau_x'/'tau_z': must be >= 0");
        if (duration < 0.0) throw std::invalid_argument("config key 'duration': must be >= 0");
        if (!bloch_ball_check(initial)) throw std::invalid_argument("config key 'initial': not inside the Bloch ball");
        (void)parse_scheme(scheme);
        if (!(bin_width > 0.0) || !(max_lag > 0.0)) {
            throw std::invalid_argument("config keys 'bin_width'/'max_lag': must be positive");
        }
        if (batches < 2) throw std::invalid_argument("config key 'batches': must be >= 2");
        if (!(lg_t > 0.0) || !(lg_bin_width > 0.0) || !(lg_max_t > 0.0)) {
            throw std::invalid_argument("config keys 'lg_t'/'lg_bin_width'/'lg_max_t': must be positive");
        }
        if (n_shots == 0) throw std::invalid_argument("config key 'n_shots': must be >= 1");
        if (delta_t < 0.0) throw std::invalid_argument("config key 'delta_t': must be >= 0");
        if (!(tau_f > 0.0)) throw std::invalid_argument("config key 'tau_f': must be positive");
        if (csv_stride == 0) throw std::invalid_argument("config key 'csv_stride': must be >= 1");
        if (recon_traj == 0 || variance_runs < 2) {
            throw std::invalid_argument("config keys 'recon_traj'/'variance_runs': too small");
        }
    }
};

inline const std::vector<std::string> &config_keys() {
    static const std::vector<std::string> keys = {
        "seed",      "dt_over_tau",  "tau",      "tau_x",      "tau_z",      "duration",       "n_traj",
        "initial",   "scheme",       "noise_provenance",       "max_lag",    "bin_width",      "batches",
        "burn_in",   "phi_grid",     "phi",      "lg_t",       "lg_bin_width", "lg_max_t",     "omega",
        "delta_t",   "n_shots",      "tau_f",    "csv_stride", "theta0",     "recon_traj",     "recon_duration",
        "variance_runs"};
    return keys;
}

namespace detail {

using json = nlohmann::json;

inline std::string type_name(const json &v) { return v.type_name(); }

inline double get_real(const json &v, const std::string &key) {
    if (!v.is_number()) throw std::invalid_argument("config key '" + key + "': expected a number, got " + type_name(v));
    const double d = v.get<double>();
    if (!std::isfinite(d)) throw std::invalid_argument("config key '" + key + "': must be finite");
    return d;
}

inline std::uint64_t get_count(const json &v, const std::string &key) {
    if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() && v.get<std::int64_t>() < 0)) {
        throw std::invalid_argument("config key '" + key + "': expected a non-negative integer, got " +
                                    (v.is_number() ? std::string("non-integer or negative number") : type_name(v)));
    }
    return v.get<std::uint64_t>();
}

inline bool get_bool(const json &v, const std::string &key) {
    if (!v.is_boolean()) throw std::invalid_argument("config key '" + key + "': expected a boolean, got " + type_name(v));
    return v.get<bool>();
}

inline std::vector<double> get_reals(const json &v, const std::string &key) {
    if (!v.is_array()) throw std::invalid_argument("config key '" + key + "': expected an array, got " + type_name(v));
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); ++i) out.push_back(get_real(v[i], key + "[" + std::to_string(i) + "]"));
    return out;
}

}  // namespace detail

/// Applies one key; throws on unknown keys or wrong types.
inline void apply_config_value(ExperimentConfig &c, const std::string &key, const nlohmann::json &v) {
    using namespace detail;
    if (key == "seed") c.seed = get_count(v, key);
    else if (key == "dt_over_tau") c.dt_over_tau = get_real(v, key);
    else if (key == "tau") c.tau = get_real(v, key);
    else if (key == "tau_x") c.tau_x = get_real(v, key);
    else if (key == "tau_z") c.tau_z = get_real(v, key);
    else if (key == "duration") c.duration = get_real(v, key);
    else if (key == "n_traj") c.n_traj = get_count(v, key);
    else if (key == "initial") {
        const auto a = get_reals(v, key);
        if (a.size() != 3) throw std::invalid_argument("config key 'initial': expected [x, y, z]");
        c.initial = {a[0], a[1], a[2]};
    } else if (key == "scheme") {
        if (!v.is_string()) throw std::invalid_argument("config key 'scheme': expected a string, got " + type_name(v));
        c.scheme = v.get<std::string>();
    } else if (key == "noise_provenance") c.noise_provenance = get_bool(v, key);
    else if (key == "max_lag") c.max_lag = get_real(v, key);
    else if (key == "bin_width") c.bin_width = get_real(v, key);
    else if (key == "batches") c.batches = get_count(v, key);
    else if (key == "burn_in") c.burn_in = get_real(v, key);
    else if (key == "phi_grid") c.phi_grid = get_reals(v, key);
    else if (key == "phi") c.phi = get_real(v, key);
    else if (key == "lg_t") c.lg_t = get_real(v, key);
    else if (key == "lg_bin_width") c.lg_bin_width = get_real(v, key);
    else if (key == "lg_max_t") c.lg_max_t = get_real(v, key);
    else if (key == "omega") c.omega = get_real(v, key);
    else if (key == "delta_t") c.delta_t = get_real(v, key);
    else if (key == "n_shots") c.n_shots = get_count(v, key);
    else if (key == "tau_f") c.tau_f = get_real(v, key);
    else if (key == "csv_stride") c.csv_stride = get_count(v, key);
    else if (key == "theta0") c.theta0 = get_real(v, key);
    else if (key == "recon_traj") c.recon_traj = get_count(v, key);
    else if (key == "recon_duration") c.recon_duration = get_real(v, key);
    else if (key == "variance_runs") c.variance_runs = get_count(v, key);
    else throw std::invalid_argument("unknown config key '" + key + "'");
}

/// Parses config text (JSON, comments allowed). Empty text gives defaults.
[[nodiscard]] inline ExperimentConfig parse_config(const std::string &text) {
    ExperimentConfig c;
    if (text.find_first_not_of(" \t\r\n") == std::string::npos) return c;
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text, nullptr, true, true);
    } catch (const nlohmann::json::parse_error &e) {
        throw std::invalid_argument(std::string("config is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw std::invalid_argument("config must be a JSON object of flat keys");
    for (auto it = j.begin(); it != j.end(); ++it) apply_config_value(c, it.key(), it.value());
    return c;
}

[[nodiscard]] inline ExperimentConfig load_config(const std::filesystem::path &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::invalid_argument("cannot read config file '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

/// Applies a command-line override and records it.
inline void override_config(ExperimentConfig &c, const std::string &key, const nlohmann::json &v) {
    apply_config_value(c, key, v);
    c.overrides.push_back(key);
}

/// The fully resolved config as JSON (keys sorted, every key present).
[[nodiscard]] inline nlohmann::json config_to_json(const ExperimentConfig &c) {
    nlohmann::json j;
    j["seed"] = c.seed;
    j["dt_over_tau"] = c.dt_over_tau;
    j["tau"] = c.tau;
    j["tau_x"] = c.tau_x;
    j["tau_z"] = c.tau_z;
    j["duration"] = c.duration;
    j["n_traj"] = c.n_traj;
    j["initial"] = {c.initial.x, c.initial.y, c.initial.z};
    j["scheme"] = c.scheme;
    j["noise_provenance"] = c.noise_provenance;
    j["max_lag"] = c.max_lag;
    j["bin_width"] = c.bin_width;
    j["batches"] = c.batches;
    j["burn_in"] = c.burn_in;
    j["phi_grid"] = c.phi_grid;
    j["phi"] = c.phi;
    j["lg_t"] = c.lg_t;
    j["lg_bin_width"] = c.lg_bin_width;
    j["lg_max_t"] = c.lg_max_t;
    j["omega"] = c.omega;
    j["delta_t"] = c.delta_t;
    j["n_shots"] = c.n_shots;
    j["tau_f"] = c.tau_f;
    j["csv_stride"] = c.csv_stride;
    j["theta0"] = c.theta0;
    j["recon_traj"] = c.recon_traj;
    j["recon_duration"] = c.recon_duration;
    j["variance_runs"] = c.variance_runs;
    return j;
}

}  // namespace xzmon
