#include <cmath>
#include <random>
#include <sstream>
#include <vector>

#include "bowden/errors.hpp"
#include "bowden/estimation.hpp"
#include "bowden/units.hpp"
#include "doctest.h"

using namespace bowden;
using doctest::Approx;

namespace {

const double kLoad = weight_of(2.0);

std::vector<FrictionSample> generate(double mu, const std::vector<double>& angles,
                                     double load = kLoad) {
  std::vector<FrictionSample> out;
  for (double a : angles) out.push_back({"PTFE", a, 0.05, load * std::exp(mu * a), 0.0, load});
  return out;
}

}  // namespace

TEST_CASE("load of two kilograms") { CHECK(kLoad == Approx(19.6133).epsilon(1e-15)); }

TEST_CASE("noiseless fit recovers mu") {
  const auto fit = fit_mu(generate(0.15, {0.5, 1.0, 2.0, 3.0}));
  CHECK(fit.mu == Approx(0.15).epsilon(1e-10));
  CHECK(fit.r_squared == 1.0);
  CHECK(fit.standard_error_mu < 1e-12);
  for (double r : fit.residuals) CHECK(std::abs(r) < 1e-12);

  for (double mu : {0.0, 0.01, 0.12, 0.33, 0.5}) {
    CHECK(fit_mu(generate(mu, {0.2, 0.9, 1.7})).mu == Approx(mu).epsilon(1e-9));
  }
}

TEST_CASE("frictionless data fits zero") {
  const auto fit = fit_mu(generate(0.0, {0.5, 1.0, 2.0}));
  CHECK(fit.mu == 0.0);
  CHECK_FALSE(fit.clamped);
}

TEST_CASE("fit is invariant to tension scale") {
  auto a = generate(0.2, {0.3, 1.1, 2.4, 3.1});
  auto b = a;
  for (auto& s : b) {
    s.mean_tension *= 7.5;
    s.load *= 7.5;
  }
  CHECK(fit_mu(b).mu == Approx(fit_mu(a).mu).epsilon(1e-14));
}

TEST_CASE("negative slope is clamped") {
  auto s = generate(-0.1, {0.5, 1.0, 2.0});
  const auto fit = fit_mu(s);
  CHECK(fit.mu == 0.0);
  CHECK(fit.clamped);
}

TEST_CASE("noisy fit stays within five percent") {
  std::mt19937_64 rng(2024);
  std::normal_distribution<double> noise(0.0, 0.05);
  std::vector<double> angles;
  for (int i = 1; i <= 20; ++i) angles.push_back(deg2rad(9.0 * i));
  int good = 0;
  for (int trial = 0; trial < 100; ++trial) {
    auto samples = generate(0.15, angles);
    // Noise on the friction, not on the hanging load.
    for (auto& s : samples) s.mean_tension = s.load + (s.mean_tension - s.load) * (1.0 + noise(rng));
    good += std::abs(fit_mu(samples).mu - 0.15) <= 0.05 * 0.15;
  }
  CHECK(good >= 95);
}

TEST_CASE("tension-space fit agrees on clean data") {
  const auto samples = generate(0.2, {0.5, 1.5, 2.5, 3.0});
  const auto fit = fit_mu(samples, FitSpace::Tension);
  CHECK(fit.mu == Approx(0.2).epsilon(1e-12));
  CHECK(fit.r_squared == Approx(1.0).epsilon(1e-12));
}

TEST_CASE("fit preconditions") {
  CHECK_THROWS_AS(fit_mu(generate(0.1, {1.0, 1.0, 1.0})), DegenerateData);
  CHECK_THROWS_AS(fit_mu(generate(0.1, {1.0, 2.0})), DegenerateData);
  auto s = generate(0.1, {1.0, 2.0, 3.0});
  s[1].mean_tension = 0.0;
  CHECK_THROWS_AS(fit_mu(s), NonPositiveTension);
  s = generate(0.1, {1.0, 2.0, 3.0});
  s[0].load = -1.0;
  CHECK_THROWS_AS(fit_mu(s), NonPositiveTension);
}

TEST_CASE("transmission gain") {
  // (D - d) / (2 r) with D = 4 mm, d = 1 mm, r = 10 mm
  std::vector<std::pair<double, double>> pairs;
  for (double dphi : {-0.5, 0.25, 0.5, 1.0}) pairs.emplace_back(dphi, -0.15 * dphi);
  CHECK(fit_transmission_gain(pairs) == Approx(0.15).epsilon(1e-12));
  for (auto& p : pairs) p.second = -p.second;
  CHECK(fit_transmission_gain(pairs) == Approx(0.15).epsilon(1e-12));
  for (auto& p : pairs) p.second = 0.0;
  CHECK(fit_transmission_gain(pairs) == 0.0);
  const std::vector<std::pair<double, double>> same{{0.5, 0.1}, {0.5, 0.1}};
  CHECK_THROWS_AS(fit_transmission_gain(same), DegenerateData);
}

TEST_CASE("sweep summary") {
  std::vector<FrictionSample> s{{"A", 1.0, 0.05, 10.0 + 7.0, 0.0, 10.0},
                                {"A", 1.0, 0.05, 10.0 + 9.0, 0.0, 10.0},
                                {"A", 2.0, 0.05, 12.0, 0.0, 10.0},
                                {"B", 1.0, 0.05, 15.0, 0.0, 10.0},
                                {"B", 1.0, 0.05, 15.0, 0.0, 10.0}};
  const auto cells = summarize_sweep(s);
  REQUIRE(cells.size() == 3);
  CHECK(cells[0].mean_friction == 8.0);
  CHECK(cells[0].std_friction == 1.0);
  CHECK(cells[0].count == 2);
  CHECK(cells[1].mean_friction == 2.0);
  CHECK(cells[1].std_friction == 0.0);
  CHECK(cells[2].sheath_type == "B");
  CHECK(cells[2].std_friction == 0.0);
}

TEST_CASE("trace statistics drop the ends") {
  std::vector<double> trace(100, 5.0);
  for (int i = 0; i < 10; ++i) trace[i] = trace[99 - i] = 1000.0;
  const auto st = trace_stats(trace);
  CHECK(st.mean == 5.0);
  CHECK(st.std == 0.0);
  CHECK_THROWS_AS(trace_stats({}), DegenerateData);
}

TEST_CASE("friction CSV") {
  const auto samples = generate(0.12, {deg2rad(30), deg2rad(60), deg2rad(90)});
  std::stringstream ss;
  write_friction_csv(ss, samples);
  const auto back = read_friction_csv(ss);
  REQUIRE(back.size() == 3);
  CHECK(back[1].wrap_angle == Approx(deg2rad(60)).epsilon(1e-15));
  CHECK(back[1].disk_diameter == Approx(0.05).epsilon(1e-15));
  CHECK(fit_mu(back).mu == Approx(0.12).epsilon(1e-12));

  SUBCASE("columns in any order") {
    std::stringstream in("load_N,sheath_type,disk_diameter_mm,wrap_angle_deg,std_tension_N,mean_tension_N\n"
                         "10,X,20,90,0.1,12\n");
    const auto s = read_friction_csv(in);
    CHECK(s[0].sheath_type == "X");
    CHECK(s[0].mean_tension == 12.0);
    CHECK(s[0].wrap_angle == Approx(deg2rad(90)).epsilon(1e-15));
  }
  SUBCASE("schema errors name the column and row") {
    std::stringstream empty("");
    CHECK_THROWS_AS(read_friction_csv(empty), CsvSchemaError);
    std::stringstream header_only("sheath_type,wrap_angle_deg,disk_diameter_mm,mean_tension_N,std_tension_N,load_N\n");
    CHECK_THROWS_AS(read_friction_csv(header_only), CsvSchemaError);
    std::stringstream missing("sheath_type,wrap_angle_deg\nA,1\n");
    try {
      read_friction_csv(missing);
      FAIL("expected CsvSchemaError");
    } catch (const CsvSchemaError& e) {
      CHECK(e.column() == "disk_diameter_mm");
    }
    std::stringstream bad(
        "sheath_type,wrap_angle_deg,disk_diameter_mm,mean_tension_N,std_tension_N,load_N\n"
        "A,30,10,20,0,19\nA,x,10,20,0,19\n");
    try {
      read_friction_csv(bad);
      FAIL("expected CsvSchemaError");
    } catch (const CsvSchemaError& e) {
      CHECK(e.column() == "wrap_angle_deg");
      CHECK(e.row() == 3);
    }
  }
}
