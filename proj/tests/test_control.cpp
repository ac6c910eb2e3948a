#include <cmath>
#include <limits>

#include "bowden/control.hpp"
#include "bowden/errors.hpp"
#include "bowden/units.hpp"
#include "doctest.h"

using namespace bowden;
using doctest::Approx;

namespace {

ControllerState tracking() {
  ControllerState s;
  s.mode = ControllerMode::Tracking;
  return s;
}

SpringReturnActuator default_actuator() {
  SpringReturnActuator a;
  a.tendon.spec = {0.001, 0.004, 0.1, 5e4};
  a.tendon.path = SheathPath::uniform(1.0, 2.0);
  return a;
}

}  // namespace

TEST_CASE("pid proportional, integral and derivative terms") {
  const double dt = 0.01;
  SUBCASE("proportional") {
    const PidGains g{8.0, 0.0, 0.0, 0.5, 4.7};
    CHECK(pid_step(g, tracking(), 0.1, 0.0, dt).command == Approx(0.8).epsilon(1e-15));
  }
  SUBCASE("integral accumulates error times dt") {
    const PidGains g{0.0, 2.0, 0.0, 0.5, 4.7};
    auto out = pid_step(g, tracking(), 0.1, 0.0, dt);
    CHECK(out.state.integral == Approx(0.001).epsilon(1e-15));
    CHECK(out.command == Approx(0.002).epsilon(1e-15));
    out = pid_step(g, out.state, 0.1, 0.0, dt);
    CHECK(out.command == Approx(0.004).epsilon(1e-15));
  }
  SUBCASE("integral clamp") {
    const PidGains g{0.0, 1.0, 0.0, 0.5, 4.7};
    auto s = tracking();
    s.integral = 0.4999;
    CHECK(pid_step(g, s, 1.0, 0.0, dt).state.integral == 0.5);
  }
  SUBCASE("derivative is low-pass filtered with tau = 10 dt") {
    const PidGains g{0.0, 0.0, 1.0, 0.5, 100.0};
    auto out = pid_step(g, tracking(), 0.0, 0.0, dt);
    out = pid_step(g, out.state, 0.1, 0.0, dt);
    // raw rate 10 rad/s, smoothing factor dt / (tau + dt) = 1/11
    CHECK(out.command == Approx(10.0 / 11.0).epsilon(1e-14));
  }
}

TEST_CASE("pid saturation and anti-windup") {
  const PidGains g{8.0, 2.0, 0.0, 0.5, 4.7};
  const auto out = pid_step(g, tracking(), 1.0, 0.0, 0.01);
  CHECK(out.command == 4.7);
  CHECK(out.state.integral == 0.0);

  auto s = tracking();
  s.release_speed_limit = 1.0;
  const auto down = pid_step(g, s, 0.0, 1.0, 0.01);
  CHECK(down.command == -1.0);
  CHECK(down.state.integral == 0.0);
}

TEST_CASE("pid is a pure function of its inputs") {
  const PidGains g;
  auto s = tracking();
  s.integral = 0.1;
  s.previous_error = 0.05;
  s.has_previous = true;
  const auto a = pid_step(g, s, 0.3, 0.2, 0.001);
  const auto b = pid_step(g, s, 0.3, 0.2, 0.001);
  CHECK(a.command == b.command);
  CHECK(a.state.integral == b.state.integral);
}

TEST_CASE("pid refuses to step outside tracking") {
  const PidGains g;
  ControllerState s;
  CHECK_THROWS_AS(pid_step(g, s, 0.0, 0.0, 0.001), ControllerNotReady);
  s.mode = ControllerMode::Faulted;
  CHECK_THROWS_AS(pid_step(g, s, 0.0, 0.0, 0.001), FaultedController);
  CHECK_THROWS_AS(pid_step(g, tracking(), 0.0, 0.0, 0.0), InvalidParameter);
  CHECK_THROWS_AS(PidGains({-1.0, 0, 0, 1, 1}).validate(), InvalidParameter);
}

TEST_CASE("anomaly detector trips after a full window") {
  AnomalyDetector d;
  const double dt = 0.001;
  for (int k = 0; k < 99; ++k) CHECK(d.update(2.0, 0.0, dt) == AnomalyVerdict::Normal);
  CHECK(d.update(2.0, 0.0, dt) == AnomalyVerdict::Stop);

  d.reset();
  for (int k = 0; k < 99; ++k) d.update(2.0, 0.0, dt);
  // Joint motion clears the window.
  CHECK(d.update(2.0, 0.5, dt) == AnomalyVerdict::Normal);
  CHECK(d.update(2.0, 0.0, dt) == AnomalyVerdict::Normal);
  // Low torque is never suspicious.
  AnomalyDetector quiet;
  for (int k = 0; k < 1000; ++k) CHECK(quiet.update(1.0, 0.0, dt) == AnomalyVerdict::Normal);
}

TEST_CASE("expected joint angle follows motor and bend") {
  const SlackGeometry g{0.01, 0.01, 0.0015, 1.0, 2.0, 0.3};
  CHECK(expected_joint_angle(g, 1.0, 2.0) == 0.3);
  CHECK(expected_joint_angle(g, 1.1, 2.0) == Approx(0.4).epsilon(1e-14));
  CHECK(expected_joint_angle(g, 1.0, 2.5) == Approx(0.3 - 0.075).epsilon(1e-14));
}

TEST_CASE("slack recovery reels in only past the threshold") {
  const SlackRecoveryConfig cfg;
  const SlackGeometry g{0.01, 0.01, 0.0015, 0.0, 0.0, 0.5};
  // Motor paid out 0.1 rad; the joint has not followed.
  CHECK(slack_recovery(cfg, g, 0.5, -0.1, 0.0).has_value());
  CHECK(*slack_recovery(cfg, g, 0.5, -0.1, 0.0) > 0.0);
  CHECK(*slack_recovery(cfg, g, 0.5, -1.0, 0.0) == cfg.max_speed);
  CHECK_FALSE(slack_recovery(cfg, g, 0.5, -0.01, 0.0).has_value());
  // Joint behind the motor (stretched tendon) is not slack.
  CHECK_FALSE(slack_recovery(cfg, g, 0.3, 0.0, 0.0).has_value());
}

TEST_CASE("joint controller stops on anomaly and recovers on reset") {
  JointController c(PidGains{}, AnomalyConfig{}, SlackRecoveryConfig{}, 4.7);
  c.engage(SlackGeometry{}, 0.1);
  ControlInputs in{0.5, 0.0, 0.0, 0.0, 2.0, 0.0};
  double u = 0.0;
  for (int k = 0; k < 100; ++k) u = c.update(in, 0.001);
  CHECK(c.state().mode == ControllerMode::Faulted);
  CHECK(u == 0.0);
  CHECK(c.update(in, 0.001) == 0.0);
  c.reset();
  CHECK(c.state().mode == ControllerMode::Tracking);
  CHECK(c.state().integral == 0.0);
  in.torque_estimate = 0.0;
  CHECK(c.update(in, 0.001) > 0.0);
}

TEST_CASE("pretension engages a healthy tendon") {
  PlantOptions opt;
  opt.transport_delay = 0.2;
  Plant plant(opt);
  plant.add(default_actuator());
  JointController c(PidGains{}, AnomalyConfig{}, SlackRecoveryConfig{}, 4.7);
  const double t = pretension_init(plant, 0, c, PretensionOptions{}, -5.0);
  CHECK(c.state().mode == ControllerMode::Tracking);
  CHECK(c.state().pretension_angle == 0.1);
  // 0.1 s of winding plus delay and settling.
  CHECK(t == Approx(-5.0 + 0.1 + 0.2 + 0.05).epsilon(1e-9));
  const auto& a = plant.spring_return()[0];
  CHECK(a.tendon.slack == 0.0);
  CHECK(a.joint.angle > 0.0);
  CHECK(c.geometry()->motor_angle == a.motor.spool_angle);
}

TEST_CASE("zero pretension angle skips winding") {
  Plant plant;
  plant.add(default_actuator());
  JointController c(PidGains{}, AnomalyConfig{}, SlackRecoveryConfig{}, 4.7);
  PretensionOptions o;
  o.pretension_angle = 0.0;
  CHECK(pretension_init(plant, 0, c, o, 1.5) == 1.5);
  CHECK(c.state().mode == ControllerMode::Tracking);
  CHECK(plant.spring_return()[0].motor.spool_angle == 0.0);
}

TEST_CASE("pretension times out on a broken tendon") {
  Plant plant;
  auto a = default_actuator();
  a.tendon.initial_slack = 1.0;  // a metre of loose tendon
  plant.add(a);
  JointController c(PidGains{}, AnomalyConfig{}, SlackRecoveryConfig{}, 4.7);
  CHECK_THROWS_AS(pretension_init(plant, 0, c, PretensionOptions{}), PretensionTimeout);
  CHECK(c.state().mode == ControllerMode::Initializing);
}
