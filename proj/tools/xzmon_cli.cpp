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

// Command-line front end: `xzmon run <experiment> [options]`.
// Exit status: 0 all checks passed, 1 a check failed, 2 usage or config error.

#include <CLI11.hpp>

#include <cstdio>
#include <exception>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <xzmon/xzmon.hpp>

namespace {

// Typed option -> config key; applied in declaration order after the file.
struct Overrides {
    std::optional<std::uint64_t> seed, n_traj, n_shots;
    std::optional<double> dt_over_tau, phi, omega, duration, tau, tau_x, tau_z, delta_t, tau_f, theta0;
    std::optional<std::string> scheme;
    std::vector<std::string> raw; // key=json
};

void apply(xzmon::ExperimentConfig &c, const Overrides &o) {
    using nlohmann::json;
    auto set = [&](const char *key, const auto &opt) {
        if (opt) xzmon::override_config(c, key, json(*opt));
    };
    set("seed", o.seed);
    set("dt_over_tau", o.dt_over_tau);
    set("n_traj", o.n_traj);
    set("phi", o.phi);
    set("omega", o.omega);
    set("duration", o.duration);
    set("scheme", o.scheme);
    set("tau", o.tau);
    set("tau_x", o.tau_x);
    set("tau_z", o.tau_z);
    set("delta_t", o.delta_t);
    set("n_shots", o.n_shots);
    set("tau_f", o.tau_f);
    set("theta0", o.theta0);
    for (const auto &kv : o.raw) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos || eq == 0) {
            throw std::invalid_argument("--set expects key=value, got '" + kv + "'");
        }
        const std::string key = kv.substr(0, eq), text = kv.substr(eq + 1);
        json value;
        try {
            value = json::parse(text);
        } catch (const json::parse_error &) {
            value = text; // bare word, e.g. --set scheme=ito
        }
        xzmon::override_config(c, key, value);
    }
}

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"xzmon: simultaneous weak monitoring of sigma_x and sigma_z"};
    app.set_version_flag("--version", std::string(xzmon::kVersion));
    app.require_subcommand(1);

    std::string experiment, config_path, out_dir = "out";
    unsigned threads = 1;
    Overrides ov;
    bool quiet = false;

    auto *run = app.add_subcommand("run", "Run a named experiment");
    run->add_option("experiment", experiment, "Experiment name")
        ->required()
        ->check(CLI::IsMember(xzmon::experiment_names()));
    run->add_option("--config", config_path, "JSON config file")->check(CLI::ExistingFile);
    run->add_option("--out", out_dir, "Output directory")->capture_default_str();
    run->add_option("--threads", threads, "Worker threads (results do not depend on this)")
        ->check(CLI::Range(1u, 1024u))
        ->capture_default_str();
    run->add_option("--seed", ov.seed, "Master seed");
    run->add_option("--dt-over-tau", ov.dt_over_tau, "Step size in units of tau");
    run->add_option("--n-traj", ov.n_traj, "Number of trajectories");
    run->add_option("--duration", ov.duration, "Duration per trajectory, units of tau");
    run->add_option("--scheme", ov.scheme, "Integrator: kraus, stratonovich or ito");
    run->add_option("--tau", ov.tau, "Measurement time (both axes)");
    run->add_option("--tau-x", ov.tau_x, "Measurement time of the x axis");
    run->add_option("--tau-z", ov.tau_z, "Measurement time of the z axis");
    run->add_option("--phi", ov.phi, "Readout rotation angle (radians)");
    run->add_option("--omega", ov.omega, "Rabi frequency of the projective test");
    run->add_option("--delta-t", ov.delta_t, "Projective time spacing");
    run->add_option("--n-shots", ov.n_shots, "Shots per projective correlator");
    run->add_option("--tau-f", ov.tau_f, "Filter time constant, units of tau");
    run->add_option("--theta0", ov.theta0, "Initial emulator angle");
    run->add_option("--set", ov.raw, "Override any config key: key=json (repeatable)");
    run->add_flag("-q,--quiet", quiet, "Only print the verdict line");

    auto *list = app.add_subcommand("list", "List experiments and config keys");
    auto *show = app.add_subcommand("show-config", "Print the effective config as JSON");
    show->add_option("--config", config_path, "JSON config file")->check(CLI::ExistingFile);
    show->add_option("--set", ov.raw, "Override any config key: key=json (repeatable)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    if (list->parsed()) {
        std::cout << "experiments:\n";
        for (const auto &n : xzmon::experiment_names()) std::cout << "  " << n << "\n";
        std::cout << "config keys:\n";
        for (const auto &k : xzmon::config_keys()) std::cout << "  " << k << "\n";
        return 0;
    }

    xzmon::ExperimentConfig cfg;
    try {
        if (!config_path.empty()) cfg = xzmon::load_config(config_path);
        apply(cfg, ov);
        cfg.validate();
    } catch (const std::exception &e) {
        std::cerr << "xzmon: config error: " << e.what() << "\n";
        return 2;
    }
    if (show->parsed()) {
        std::cout << xzmon::config_to_json(cfg).dump(2) << "\n";
        return 0;
    }

    xzmon::ExperimentResult res;
    try {
        res = xzmon::run_experiment(experiment, cfg, out_dir, threads);
    } catch (const std::invalid_argument &e) {
        std::cerr << "xzmon: " << e.what() << "\n";
        return 2;
    } catch (const std::exception &e) {
        std::cerr << "xzmon: " << e.what() << "\n";
        return 2;
    }
    if (!quiet) {
        for (const auto &ch : res.checks) {
            std::printf("%-4s %-70s %.6g (%s)\n", ch.pass ? "ok" : "FAIL", ch.name.c_str(), ch.value,
                        ch.requirement.c_str());
        }
        std::printf("wrote %zu files to %s\n", res.files.size(), out_dir.c_str());
    }
    std::printf("%s: %s\n", experiment.c_str(), res.passed() ? "PASS" : "FAIL");
    return res.passed() ? 0 : 1;
}
