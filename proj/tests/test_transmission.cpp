#include <cmath>
#include <numbers>

#include "bowden/errors.hpp"
#include "bowden/transmission.hpp"
#include "bowden/units.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace bowden;
using doctest::Approx;

namespace {
const TendonSpec kSpec{0.001, 0.004, 0.1, std::nullopt};
}

TEST_CASE("accumulated bend over piecewise curvature") {
  CHECK(accumulated_bend(SheathPath({{1.0, 0.0}})) == 0.0);
  CHECK(accumulated_bend(SheathPath({{0.1571, 10.0}})) == Approx(1.571).epsilon(1e-12));
  CHECK(accumulated_bend(SheathPath({{0.5, 2.0}, {0.5, 0.0}})) == Approx(1.0).epsilon(1e-15));
}

TEST_CASE("sheath path rejects degenerate segments") {
  CHECK_THROWS_AS(SheathPath({}), InvalidParameter);
  CHECK_THROWS_AS(SheathPath({{0.0, 1.0}}), InvalidParameter);
  CHECK_THROWS_AS(SheathPath({{1.0, -1.0}}), InvalidParameter);
}

TEST_CASE("sampled curvature converges to the integral") {
  // kappa(s) = 3 s on [0, 1] integrates to 1.5; midpoint rule is exact for linear.
  auto path = SheathPath::sampled(1.0, [](double s) { return 3.0 * s; }, 64);
  CHECK(path.total_length() == Approx(1.0).epsilon(1e-14));
  CHECK(path.accumulated_bend() == Approx(1.5).epsilon(1e-13));
}

TEST_CASE("tendon path length") {
  SUBCASE("straight sheath keeps full length") {
    CHECK(tendon_path_length(SheathPath({{0.8, 0.0}}), kSpec) == 0.8);
  }
  SUBCASE("half-turn bend") {
    const auto path = SheathPath::uniform(1.0, std::numbers::pi);
    CHECK(tendon_path_length(path, kSpec) == Approx(0.9952876110196153).epsilon(1e-14));
  }
  SUBCASE("deficit is linear in bend") {
    const double d1 = 1.0 - tendon_path_length(1.0, 0.7, kSpec);
    const double d2 = 1.0 - tendon_path_length(1.0, 1.4, kSpec);
    CHECK(d2 == Approx(2.0 * d1).epsilon(1e-12));
  }
  SUBCASE("offset curve must exist") {
    // Radius 1 mm is tighter than the 1.5 mm offset.
    CHECK_THROWS_AS(tendon_path_length(SheathPath({{0.01, 1000.0}}), kSpec), OffsetCurveViolation);
    CHECK_THROWS_AS(tendon_path_length(SheathPath({{0.01, 1.0 / 0.0015}}), kSpec),
                    OffsetCurveViolation);
  }
  SUBCASE("extreme bend gives non-positive length") {
    CHECK_THROWS_AS(tendon_path_length(0.01, 10.0, kSpec), NonPositiveLength);
  }
}

TEST_CASE("tendon path length matches the offset-arc construction") {
  for (double ratio : {0.01, 0.1, 0.5}) {
    for (double theta : {0.3, 2.0, 4.5}) {
      const double e = kSpec.eccentricity();
      const double rho = e / ratio;
      const auto path = SheathPath({{rho * theta, 1.0 / rho}});
      const double expected = oracle::offset_arc_length(rho, theta, e);
      CHECK(std::abs(tendon_path_length(path, kSpec) - expected) / expected < 1e-12);
    }
  }
}

TEST_CASE("induced joint offset") {
  CHECK(induced_joint_offset(0.0, kSpec, 0.01) == 0.0);
  CHECK(induced_joint_offset(std::numbers::pi / 2, kSpec, 0.01) ==
        Approx(-0.23561944901923448).epsilon(1e-14));
  CHECK(rad2deg(induced_joint_offset(std::numbers::pi / 2, kSpec, 0.01)) ==
        Approx(-13.5).epsilon(1e-3));
  CHECK(induced_joint_offset(-0.37, kSpec, 0.01) == -induced_joint_offset(0.37, kSpec, 0.01));
  CHECK_THROWS_AS(induced_joint_offset(0.1, kSpec, 0.0), InvalidParameter);

  // Exactly linear: three collinear samples have zero second difference.
  const double a = induced_joint_offset(0.25, kSpec, 0.012);
  const double b = induced_joint_offset(0.50, kSpec, 0.012);
  const double c = induced_joint_offset(0.75, kSpec, 0.012);
  CHECK(std::abs(a - 2 * b + c) < 1e-16);
}

TEST_CASE("tension transfer") {
  CHECK(tension_transfer(12.0, 0.0, 0.3, DriveDirection::MotorPulling) == 12.0);
  CHECK(tension_transfer(12.0, 2.0, 0.0, DriveDirection::SpringReturning) == 12.0);
  // 2 kg load
  CHECK(tension_transfer(weight_of(2.0), 3.0, 0.1, DriveDirection::MotorPulling) ==
        Approx(14.529890007696736).epsilon(1e-13));
  const double once = tension_transfer(tension_transfer(5.0, 0.4, 0.2, DriveDirection::MotorPulling),
                                       1.1, 0.2, DriveDirection::MotorPulling);
  CHECK(once == Approx(tension_transfer(5.0, 1.5, 0.2, DriveDirection::MotorPulling)).epsilon(1e-14));
  CHECK(tension_transfer(0.0, 4.0, 0.5, DriveDirection::SpringReturning) >= 0.0);
  CHECK_THROWS_AS(tension_transfer(-1.0, 1.0, 0.1, DriveDirection::MotorPulling), InvalidParameter);
}

TEST_CASE("tension transfer follows the stepped capstan ODE") {
  const std::vector<double> angles{0.5, 1.0, 2.0, std::numbers::pi, 2 * std::numbers::pi};
  for (double mu : {0.05, 0.5}) {
    const auto stepped = oracle::integrate_capstan(10.0, -mu, angles);
    for (std::size_t i = 0; i < angles.size(); ++i) {
      const double t = tension_transfer(10.0, angles[i], mu, DriveDirection::SpringReturning);
      CHECK(std::abs(t - stepped[i]) / t < 1e-6);
    }
  }
}

TEST_CASE("friction loss") {
  CHECK(friction_loss(weight_of(2.0), 0.0, 0.2) == 0.0);
  CHECK(friction_loss(weight_of(2.0), std::numbers::pi, 0.1) ==
        Approx(7.2394214375963095).epsilon(1e-13));
  double prev = -1.0;
  for (int k = 0; k <= 12; ++k) {
    const double loss = friction_loss(19.6133, k * 0.25, 0.15);
    CHECK(loss > prev);
    prev = loss;
  }
  for (double phi : {0.3, 1.0, 3.0}) {
    const double t = 7.5;
    const double loss = friction_loss(t, phi, 0.2);
    CHECK(std::abs((t * std::exp(0.2 * phi) - t) - loss) / loss < 1e-12);
  }
}

TEST_CASE("tendon spec validation") {
  CHECK_NOTHROW(kSpec.validate());
  CHECK_THROWS_AS((TendonSpec{0.004, 0.004, 0.1, std::nullopt}.validate()), InvalidParameter);
  CHECK_THROWS_AS((TendonSpec{0.001, 0.004, -0.1, std::nullopt}.validate()), InvalidParameter);
  CHECK_THROWS_AS((TendonSpec{0.001, 0.004, 0.1, 0.0}.validate()), InvalidParameter);
  CHECK(kSpec.eccentricity() == Approx(0.0015));
}
