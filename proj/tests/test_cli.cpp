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

// Drives the built xzmon binary through std::system.

#include <catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

namespace fs = std::filesystem;

namespace {

int run(const std::string &args) {
    const std::string cmd = std::string(XZMON_CLI_PATH) + " " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

fs::path scratch(const std::string &name) {
    const auto p = fs::temp_directory_path() / ("xzmon_test_cli_" + name);
    fs::remove_all(p);
    return p;
}

std::string slurp(const fs::path &p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace

TEST_CASE("help, version and listing succeed", "[cli]") {
    CHECK(run("--help") == 0);
    CHECK(run("--version") == 0);
    CHECK(run("list") == 0);
}

TEST_CASE("usage and config errors exit with status 2", "[cli]") {
    CHECK(run("") == 2);
    CHECK(run("run no-such-experiment") == 2);
    CHECK(run("run tracking --set bogus_key=1 --out " + scratch("e1").string()) == 2);
    CHECK(run("run tracking --dt-over-tau 0.5 --out " + scratch("e2").string()) == 2);
    CHECK(run("run emulator --tau-x 1 --tau-z 2 --out " + scratch("e3").string()) == 2);
    const auto cfg = scratch("cfg.json");
    std::ofstream(cfg) << R"({"seed": "x"})";
    CHECK(run("run tracking --config " + cfg.string() + " --out " + scratch("e4").string()) == 2);
}

TEST_CASE("a passing experiment exits 0 and writes its artifacts", "[cli]") {
    const auto out = scratch("proj");
    CHECK(run("run lg-projective --set n_shots=100000 --out " + out.string()) == 0);
    CHECK(fs::exists(out / "summary.csv"));
    CHECK(fs::exists(out / "lg_projective.csv"));
    CHECK(fs::exists(out / "lg_projective.svg"));
    const auto summary = slurp(out / "summary.csv");
    CHECK(summary.find("overrides=n_shots") != std::string::npos);
}

TEST_CASE("a failing check exits 1", "[cli]") {
    // Itô agreement is not reached at this step size.
    CHECK(run("run compare-integrators --n-traj 4 --duration 5 --out " + scratch("cmp").string()) == 1);
}

TEST_CASE("thread count does not change the output bytes", "[cli]") {
    const auto a = scratch("t1"), b = scratch("t4");
    const std::string common = "run correlators --n-traj 50 --duration 10 --seed 5 ";
    REQUIRE(run(common + "--threads 1 --out " + a.string()) >= 0);
    REQUIRE(run(common + "--threads 4 --out " + b.string()) >= 0);
    std::size_t compared = 0;
    for (const auto &e : fs::directory_iterator(a)) {
        CHECK(slurp(e.path()) == slurp(b / e.path().filename()));
        ++compared;
    }
    CHECK(compared > 5);
}

TEST_CASE("an undriven projective test gives lhs 1 and no violation", "[cli]") {
    const auto out = scratch("omega0");
    CHECK(run("run lg-projective --omega 0 --out " + out.string()) == 0);
    const auto csv = slurp(out / "lg_projective.csv");
    CHECK(csv.find("\n0,1.0471975511965976,1,0,1,1,0\n") != std::string::npos);
}

TEST_CASE("the emulator refuses unequal measurement times", "[cli]") {
    CHECK(run("run emulator --tau-x 1 --tau-z 2 --out " + scratch("uneq").string()) == 2);
}
