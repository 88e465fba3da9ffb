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

#include <catch_amalgamated.hpp>

#include <numbers>
#include <set>

#include <xzmon/config.hpp>

using namespace xzmon;
using Catch::Matchers::ContainsSubstring;
using Catch::Matchers::WithinAbs;

TEST_CASE("empty text gives the defaults", "[config]") {
    const auto c = parse_config("  \n");
    CHECK(c.seed == 1);
    CHECK(c.dt_over_tau == 0.01);
    CHECK(c.scheme == "kraus");
    CHECK_THAT(c.resolved_delta_t(), WithinAbs(std::numbers::pi / 3, 1e-15));
    CHECK(c.resolved_n_traj(7) == 7);
    CHECK(c.resolved_duration(3.0) == 3.0);
    CHECK_NOTHROW(c.validate());
}

TEST_CASE("keys are applied with comments allowed", "[config]") {
    const auto c = parse_config(R"({
        // shorter run
        "seed": 42, "dt_over_tau": 0.005, "n_traj": 10, "duration": 5,
        "initial": [1, 0, 0], "scheme": "ito", "phi_grid": [0.1, 0.2],
        "noise_provenance": true, "omega": 2
    })");
    CHECK(c.seed == 42);
    CHECK(c.dt_over_tau == 0.005);
    CHECK(c.resolved_n_traj(1) == 10);
    CHECK(c.initial == BlochState{1, 0, 0});
    CHECK(c.scheme == "ito");
    CHECK(c.phi_grid == std::vector<double>{0.1, 0.2});
    CHECK(c.noise_provenance);
    CHECK_THAT(c.resolved_delta_t(), WithinAbs(std::numbers::pi / 6, 1e-15));
    const auto rc = c.run_config(100.0);
    CHECK(rc.duration == 5.0);
    CHECK(rc.keep_noise);
}

TEST_CASE("errors name the offending key", "[config]") {
    CHECK_THROWS_WITH(parse_config(R"({"dt_over_taw": 0.01})"), ContainsSubstring("dt_over_taw"));
    CHECK_THROWS_WITH(parse_config(R"({"seed": "one"})"), ContainsSubstring("'seed'"));
    CHECK_THROWS_WITH(parse_config(R"({"seed": -3})"), ContainsSubstring("'seed'"));
    CHECK_THROWS_WITH(parse_config(R"({"initial": [1, 0]})"), ContainsSubstring("'initial'"));
    CHECK_THROWS_WITH(parse_config(R"({"scheme": 3})"), ContainsSubstring("'scheme'"));
    CHECK_THROWS_WITH(parse_config("{"), ContainsSubstring("JSON"));
    CHECK_THROWS_WITH(parse_config("[1, 2]"), ContainsSubstring("object"));
    CHECK_THROWS_AS(load_config("/nonexistent/xzmon.json"), std::invalid_argument);
}

TEST_CASE("validation", "[config]") {
    ExperimentConfig c;
    c.dt_over_tau = 0.2;
    CHECK_THROWS_WITH(c.validate(), ContainsSubstring("dt_over_tau"));
    c = ExperimentConfig{};
    c.scheme = "rk4";
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    c = ExperimentConfig{};
    c.initial = {1, 1, 0};
    CHECK_THROWS_WITH(c.validate(), ContainsSubstring("initial"));
    c = ExperimentConfig{};
    c.batches = 1;
    CHECK_THROWS_WITH(c.validate(), ContainsSubstring("batches"));
}

TEST_CASE("overrides are recorded in order", "[config]") {
    ExperimentConfig c;
    override_config(c, "phi", 0.5);
    override_config(c, "seed", 9);
    CHECK(c.phi == 0.5);
    CHECK(c.overrides == std::vector<std::string>{"phi", "seed"});
    CHECK_THROWS_AS(override_config(c, "nope", 1), std::invalid_argument);
}

TEST_CASE("serialized config round trips and lists every key", "[config]") {
    ExperimentConfig c;
    c.seed = 17;
    c.phi_grid = {0.25};
    c.initial = {0.6, 0.0, 0.8};
    const auto j = config_to_json(c);
    const auto back = parse_config(j.dump());
    CHECK(config_to_json(back) == j);
    std::set<std::string> keys;
    for (auto it = j.begin(); it != j.end(); ++it) keys.insert(it.key());
    CHECK(keys == std::set<std::string>(config_keys().begin(), config_keys().end()));
}
