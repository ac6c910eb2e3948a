#pragma once

#include <cstddef>
#include <limits>
#include <optional>

#include "bowden/plant.hpp"

namespace bowden {

/// PID gains. Output is a motor spool velocity (rad/s) per radian of joint error.
struct PidGains {
  double kp = 8.0;
  double ki = 2.0;
  double kd = 0.05;
  double integral_clamp = 0.5;  // rad s
  double output_clamp = 4.7;    // rad/s

  void validate() const;
};

enum class ControllerMode { Initializing, Tracking, Faulted };

struct ControllerState {
  double integral = 0.0;
  double previous_error = 0.0;
  double derivative = 0.0;  // low-pass filtered error rate
  bool has_previous = false;
  double pretension_angle = 0.0;
  double release_speed_limit = std::numeric_limits<double>::infinity();
  ControllerMode mode = ControllerMode::Initializing;
};

struct PidOutput {
  double command;  // rad/s, positive winds in
  ControllerState state;
};

/// One PID update in joint space. The integral is frozen while the output is
/// saturated in the direction of the error, the derivative is low-pass filtered
/// with time constant 10 dt, and pay-out commands are capped at the release
/// speed limit. Throws FaultedController in Faulted mode and
/// ControllerNotReady before pretensioning.
PidOutput pid_step(const PidGains& gains, ControllerState state, double q_ref, double q_meas,
                   double dt);

struct AnomalyConfig {
  double current_spike_threshold = 1.5;  // N m
  double encoder_motion_floor = 0.01;    // rad/s
  double window = 0.1;                   // s

  void validate() const;
};

enum class AnomalyVerdict { Normal, Stop };

/// Flags a motor load that rises without matching joint motion: torque above
/// the threshold while the encoder stays below the motion floor for a whole
/// window.
class AnomalyDetector {
 public:
  explicit AnomalyDetector(AnomalyConfig cfg = {});

  AnomalyVerdict update(double torque_estimate, double encoder_velocity, double dt);
  void reset() { suspicious_for_ = 0.0; }
  const AnomalyConfig& config() const { return cfg_; }

 private:
  AnomalyConfig cfg_;
  double suspicious_for_ = 0.0;
};

/// Motor and joint readings captured when the tendon was last known taut.
struct SlackGeometry {
  double motor_spool_radius = 0.01;
  double joint_radius = 0.01;
  double eccentricity = 0.0015;
  double motor_angle = 0.0;
  double phi = 0.0;
  double joint_angle = 0.0;
};

/// Joint angle implied by the motor position through the ideal transmission,
/// corrected for the bend change since engagement.
double expected_joint_angle(const SlackGeometry& geom, double motor_angle, double phi);

struct SlackRecoveryConfig {
  double threshold = 0.03490658503988659;  // 2 deg
  double gain = 5.0;                       // 1/s, motor rad/s per rad of excess lag
  double max_speed = 2.0;                  // rad/s
};

/// Reel-in velocity when the joint sits more flexed than the motor position
/// allows by more than the threshold, i.e. tendon has been paid out that the
/// spring has not taken up. Nothing when the joint is at or behind the
/// expected angle (taut, possibly stretched under load).
std::optional<double> slack_recovery(const SlackRecoveryConfig& cfg, const SlackGeometry& geom,
                                     double q_meas, double motor_angle, double phi);

struct ControlInputs {
  double q_ref = 0.0;
  double q_meas = 0.0;
  double motor_angle = 0.0;
  double phi = 0.0;
  double torque_estimate = 0.0;
  double encoder_velocity = 0.0;
};

/// Per-joint controller: PID, slack recovery and the anomaly stop, stepped in
/// lockstep with the plant.
class JointController {
 public:
  JointController(PidGains gains, AnomalyConfig anomaly, SlackRecoveryConfig slack,
                  double release_speed_limit);

  /// Motor velocity command. Returns 0 once faulted, until reset().
  double update(const ControlInputs& in, double dt);

  /// Enter Tracking with the given engagement geometry.
  void engage(const SlackGeometry& geom, double pretension_angle);
  /// Leave Faulted: clears the PID memory and the anomaly window.
  void reset();

  const ControllerState& state() const { return state_; }
  const PidGains& gains() const { return gains_; }
  const std::optional<SlackGeometry>& geometry() const { return geometry_; }
  bool reeling() const { return reeling_; }

 private:
  PidGains gains_;
  AnomalyDetector anomaly_;
  SlackRecoveryConfig slack_;
  ControllerState state_;
  std::optional<SlackGeometry> geometry_;
  bool reeling_ = false;
};

struct PretensionOptions {
  double pretension_angle = 0.1;   // rad of motor wind-in
  double wind_speed = 1.0;         // rad/s
  double dt = 1e-3;                // s
  double horizon = 2.0;            // s, total budget including settling
  double settle_time = 0.05;       // s held after winding, on top of the transport delay
  double slack_tolerance = 1e-6;   // m
  double engage_angle = 8.726646259971648e-4;  // 0.05 deg of joint motion
  double engage_torque = 1e-3;     // N m of motor load
};

/// Winds the motor of spring-return actuator `index` in by the pretension angle
/// and hands the controller over to Tracking once the tendon engages. Starts at
/// plant time t_start and returns the plant time reached. Throws
/// PretensionTimeout when neither joint motion nor motor load shows engagement
/// within the horizon.
double pretension_init(Plant& plant, std::size_t index, JointController& controller,
                       const PretensionOptions& options, double t_start = 0.0);

}  // namespace bowden
