#include "bowden/control.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include <fmt/core.h>

#include "bowden/errors.hpp"

namespace bowden {

void PidGains::validate() const {
  if (!(kp >= 0.0) || !(ki >= 0.0) || !(kd >= 0.0)) {
    throw InvalidParameter("PID gains must be >= 0");
  }
  if (!(integral_clamp > 0.0) || !(output_clamp > 0.0)) {
    throw InvalidParameter("PID clamps must be > 0");
  }
}

PidOutput pid_step(const PidGains& g, ControllerState s, double q_ref, double q_meas, double dt) {
  if (s.mode == ControllerMode::Faulted) {
    throw FaultedController("controller is faulted; reset before stepping");
  }
  if (s.mode != ControllerMode::Tracking) {
    throw ControllerNotReady("controller has not been pretensioned");
  }
  if (!(dt > 0.0)) throw InvalidParameter("dt must be > 0");

  const double error = q_ref - q_meas;
  const double raw_rate = s.has_previous ? (error - s.previous_error) / dt : 0.0;
  const double tau = 10.0 * dt;
  s.derivative += (raw_rate - s.derivative) * (dt / (tau + dt));

  const double upper = g.output_clamp;
  const double lower = -std::min(g.output_clamp, s.release_speed_limit);

  double integral = std::clamp(s.integral + error * dt, -g.integral_clamp, g.integral_clamp);
  double u = g.kp * error + g.ki * integral + g.kd * s.derivative;
  if ((u > upper && error > 0.0) || (u < lower && error < 0.0)) {
    integral = s.integral;
    u = g.kp * error + g.ki * integral + g.kd * s.derivative;
  }
  s.integral = integral;
  s.previous_error = error;
  s.has_previous = true;
  return {std::clamp(u, lower, upper), s};
}

void AnomalyConfig::validate() const {
  if (!(current_spike_threshold > 0.0) || !(encoder_motion_floor > 0.0) || !(window > 0.0)) {
    throw InvalidParameter("anomaly thresholds must be > 0");
  }
}

AnomalyDetector::AnomalyDetector(AnomalyConfig cfg) : cfg_(cfg) { cfg_.validate(); }

AnomalyVerdict AnomalyDetector::update(double torque_estimate, double encoder_velocity,
                                       double dt) {
  if (torque_estimate > cfg_.current_spike_threshold &&
      std::abs(encoder_velocity) < cfg_.encoder_motion_floor) {
    suspicious_for_ += dt;
  } else {
    suspicious_for_ = 0.0;
  }
  // Half a step of slack so a window that is a whole number of steps trips on
  // its last step despite rounding in the running sum.
  return suspicious_for_ >= cfg_.window - 0.5 * dt ? AnomalyVerdict::Stop
                                                   : AnomalyVerdict::Normal;
}

double expected_joint_angle(const SlackGeometry& geom, double motor_angle, double phi) {
  const double wound = geom.motor_spool_radius * (motor_angle - geom.motor_angle);
  const double path_change = -geom.eccentricity * (phi - geom.phi);
  return geom.joint_angle + (wound + path_change) / geom.joint_radius;
}

std::optional<double> slack_recovery(const SlackRecoveryConfig& cfg, const SlackGeometry& geom,
                                     double q_meas, double motor_angle, double phi) {
  const double lag = q_meas - expected_joint_angle(geom, motor_angle, phi);
  if (lag <= cfg.threshold) return std::nullopt;
  return std::min(cfg.max_speed, cfg.gain * (lag - cfg.threshold) + 0.1 * cfg.max_speed);
}

JointController::JointController(PidGains gains, AnomalyConfig anomaly,
                                 SlackRecoveryConfig slack, double release_speed_limit)
    : gains_(gains), anomaly_(anomaly), slack_(slack) {
  gains_.validate();
  if (!(release_speed_limit > 0.0)) throw InvalidParameter("release speed limit must be > 0");
  if (!(slack_.threshold > 0.0) || !(slack_.gain >= 0.0) || !(slack_.max_speed > 0.0)) {
    throw InvalidParameter("slack recovery parameters out of range");
  }
  state_.release_speed_limit = release_speed_limit;
}

void JointController::engage(const SlackGeometry& geom, double pretension_angle) {
  if (state_.mode == ControllerMode::Faulted) {
    throw FaultedController("cannot engage a faulted controller");
  }
  geometry_ = geom;
  state_.pretension_angle = pretension_angle;
  state_.mode = ControllerMode::Tracking;
}

void JointController::reset() {
  const double limit = state_.release_speed_limit;
  const double pretension = state_.pretension_angle;
  state_ = ControllerState{};
  state_.release_speed_limit = limit;
  state_.pretension_angle = pretension;
  state_.mode = geometry_ ? ControllerMode::Tracking : ControllerMode::Initializing;
  anomaly_.reset();
  reeling_ = false;
}

double JointController::update(const ControlInputs& in, double dt) {
  if (state_.mode == ControllerMode::Faulted) return 0.0;
  if (anomaly_.update(in.torque_estimate, in.encoder_velocity, dt) == AnomalyVerdict::Stop) {
    state_.mode = ControllerMode::Faulted;
    return 0.0;
  }
  auto out = pid_step(gains_, state_, in.q_ref, in.q_meas, dt);
  state_ = out.state;
  double command = out.command;
  reeling_ = false;
  if (geometry_) {
    if (auto reel = slack_recovery(slack_, *geometry_, in.q_meas, in.motor_angle, in.phi)) {
      command += *reel;
      reeling_ = true;
    }
  }
  return command;
}

double pretension_init(Plant& plant, std::size_t index, JointController& controller,
                       const PretensionOptions& opt, double t_start) {
  if (controller.state().mode != ControllerMode::Initializing) {
    throw InvalidParameter("pretensioning requires an initializing controller");
  }
  if (index >= plant.spring_return().size()) throw InvalidParameter("no such actuator");
  if (!(opt.pretension_angle >= 0.0) || !(opt.wind_speed > 0.0) || !(opt.dt > 0.0)) {
    throw InvalidParameter("pretension options out of range");
  }

  auto snapshot = [&]() {
    const auto& a = plant.spring_return()[index];
    return SlackGeometry{a.motor.spool_radius, a.joint.spool_radius, a.tendon.spec.eccentricity(),
                         a.motor.spool_angle, a.tendon.phi, a.joint.angle};
  };

  if (opt.pretension_angle == 0.0) {
    controller.engage(snapshot(), 0.0);
    return t_start;
  }

  std::vector<MotorCommand> commands(plant.motor_count(), MotorCommand::velocity(0.0));
  const auto& start = plant.spring_return()[index];
  const double q0 = start.joint.angle;
  const double target = start.motor.spool_angle + opt.pretension_angle;
  const double settle = plant.options().transport_delay + opt.settle_time;
  const auto max_steps = static_cast<long>(std::ceil(opt.horizon / opt.dt));

  bool engaged = false;
  std::optional<double> wound_at;
  double t = t_start;
  for (long k = 0; k < max_steps; ++k) {
    const auto& a = plant.spring_return()[index];
    const double remaining = target - a.motor.spool_angle;
    commands[index] = MotorCommand::velocity(std::min(opt.wind_speed, remaining / opt.dt));
    // Other motors hold; their index positions already hold zero velocity.
    plant.step(commands, t, opt.dt);
    t = t_start + static_cast<double>(k + 1) * opt.dt;

    const auto& now = plant.spring_return()[index];
    engaged = engaged || std::abs(now.joint.angle - q0) > opt.engage_angle ||
              now.motor.torque_estimate > opt.engage_torque;
    if (!wound_at && now.motor.spool_angle >= target - 1e-12) wound_at = t;
    if (wound_at && t - *wound_at >= settle - 1e-12) {
      if (!engaged) break;
      if (now.tendon.slack > opt.slack_tolerance) continue;
      controller.engage(snapshot(), opt.pretension_angle);
      return t;
    }
  }
  throw PretensionTimeout(fmt::format(
      "tendon did not engage after winding {:.4g} rad within {:.3g} s; check for a broken tendon",
      opt.pretension_angle, opt.horizon));
}

}  // namespace bowden
