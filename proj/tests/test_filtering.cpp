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

#include <cmath>
#include <vector>

#include <xzmon/filtering.hpp>
#include <xzmon/integrators.hpp>
#include <xzmon/noise.hpp>

using namespace xzmon;
using Catch::Matchers::WithinAbs;

TEST_CASE("constant input is a fixed point", "[filtering]") {
    const std::vector<double> r(500, 0.3);
    const auto f = ewma(r, 0.01, 1.0);
    for (double v : f.values) CHECK_THAT(v, WithinAbs(0.3, 1e-15));
}

TEST_CASE("step response is geometric", "[filtering]") {
    std::vector<double> r(1000, 1.0);
    r[0] = 0.0;
    const double a = 0.01 / 0.5;
    const auto f = ewma(r, 0.01, 0.5);
    // y[k] = 1 - (1 - a)^(k - 1) for k >= 1
    for (std::size_t k : {1u, 10u, 50u, 999u}) {
        CHECK_THAT(f.values[k], WithinAbs(1.0 - std::pow(1.0 - a, static_cast<double>(k - 1)), 1e-12));
    }
}

TEST_CASE("filter time must exceed the step", "[filtering]") {
    const std::vector<double> r(10, 0.0);
    CHECK_THROWS_AS(ewma(r, 0.01, 0.01), std::invalid_argument);
    CHECK_THROWS_AS(ewma(r, 0.0, 1.0), std::invalid_argument);
    CHECK(ewma(std::vector<double>{}, 0.01, 1.0).size() == 0);
}

TEST_CASE("excursions outside [-1, 1] are kept and counted", "[filtering]") {
    const std::vector<double> r{5.0, 5.0, -5.0};
    const auto f = ewma(r, 0.1, 0.2);
    CHECK(f.values.front() == 5.0);
    CHECK(f.excursions() == 3);
}

TEST_CASE("tracking report finds a pure delay", "[filtering]") {
    const double dt = 0.01;
    std::vector<double> truth(20000);
    for (std::size_t k = 0; k < truth.size(); ++k) truth[k] = std::sin(0.37 * k * dt) + 0.5 * std::sin(1.9 * k * dt);
    FilteredSignal f{dt, 0.5, std::vector<double>(truth.size())};
    const std::size_t delay = 30;
    for (std::size_t k = 0; k < truth.size(); ++k) f.values[k] = k >= delay ? truth[k - delay] : 0.0;
    const auto rep = tracking_report(f, truth);
    CHECK_THAT(rep.best_lag, WithinAbs(0.3, 1e-9));
    FilteredSignal same{dt, 0.5, truth};
    const auto id = tracking_report(same, truth);
    CHECK_THAT(id.correlation, WithinAbs(1.0, 1e-12));
    CHECK(id.rms_error == 0.0);
    CHECK(id.best_lag == 0.0);
    CHECK_THROWS_AS(tracking_report(same, std::vector<double>(10)), std::invalid_argument);
}

TEST_CASE("filtered readouts track a monitored qubit", "[filtering]") {
    RunConfig rc;
    rc.duration = 200.0;
    const auto rec = run_kraus({0, 0, 1}, rc);
    std::vector<double> x;
    for (std::size_t k = 0; k < rec.readouts.size(); ++k) x.push_back(rec.states[k].x);
    const auto rep = tracking_report(ewma(rec.readouts.r_x, rc.dt(), 1.0), x);
    CHECK(rep.correlation > 0.6);
    CHECK(rep.samples == x.size() - 500);
}

TEST_CASE("zero input gives zero output", "[filtering]") {
    const auto f = ewma(std::vector<double>(300, 0.0), 0.01, 1.0);
    for (double v : f.values) CHECK(v == 0.0);
}

TEST_CASE("white-noise input has the geometric-sum stationary variance", "[filtering]") {
    const double dt = 0.01, tau = 1.0, tau_f = 1.0;
    NoiseStream stream(11, 0);
    std::vector<double> r(400000);
    for (double &v : r) v = std::sqrt(tau) * stream.next_increment(dt).value;
    const auto f = ewma(r, dt, tau_f);
    double m = 0.0, m2 = 0.0;
    const std::size_t burn = 2000;
    const auto n = static_cast<double>(f.size() - burn);
    for (std::size_t k = burn; k < f.size(); ++k) m += f.values[k];
    m /= n;
    for (std::size_t k = burn; k < f.size(); ++k) m2 += (f.values[k] - m) * (f.values[k] - m);
    // a^2 (tau/dt) / (1 - (1-a)^2) with a = dt/tau_f
    CHECK_THAT(m2 / n, WithinAbs(tau / (2.0 * tau_f - dt), 0.03));
}

TEST_CASE("filtering a smooth truth correlates with it", "[filtering]") {
    RunConfig rc;
    rc.duration = 200.0;
    const auto rec = run_kraus({0, 0, 1}, rc);
    std::vector<double> x;
    for (const auto &s : rec.states) x.push_back(s.x);
    x.resize(rec.readouts.size());
    // Filter time well below the state correlation time 2 tau.
    const auto rep = tracking_report(ewma(x, rc.dt(), 0.02), x);
    CHECK(rep.correlation > 0.99);
}
