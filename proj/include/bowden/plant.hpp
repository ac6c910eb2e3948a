#pragma once

#include <cstddef>
#include <deque>
#include <optional>
#include <span>
#include <vector>

#include "bowden/disturbance.hpp"
#include "bowden/transmission.hpp"

namespace bowden {

/// Joint flexed by one pulling tendon and extended by a passive spring.
/// Flexion is positive; the spring always pushes toward q_min.
struct SpringReturnJoint {
  double spool_radius = 0.01;        // r, m
  double spring_stiffness = 0.02;    // N m / rad
  double spring_preload = 0.01;      // N m at q = 0
  double damping = 1e-4;             // N m s / rad
  double inertia = 1e-6;             // kg m^2
  double stiction_torque = 0.0;      // N m breakaway threshold
  double q_min = 0.0;
  double q_max = 1.5707963267948966;
  double angle = 0.0;
  double velocity = 0.0;

  /// -(preload + stiffness * q).
  double spring_torque(double q) const { return -(spring_preload + spring_stiffness * q); }
};

/// Joint driven by two opposing tendons (thumb CMC1). The agonist flexes.
struct AntagonisticJoint {
  double spool_radius = 0.01;
  double damping = 1e-4;
  double inertia = 1e-6;
  double stiction_torque = 0.0;
  double q_min = 0.0;
  double q_max = 1.5707963267948966;
  double angle = 0.0;
  double velocity = 0.0;
};

struct MotorCommand {
  enum class Mode { Position, Velocity };
  Mode mode = Mode::Velocity;
  double value = 0.0;  // rad or rad/s of the spool

  static MotorCommand position(double angle) { return {Mode::Position, angle}; }
  static MotorCommand velocity(double rate) { return {Mode::Velocity, rate}; }
};

struct MotorState {
  double spool_angle = 0.0;      // rad, positive winds tendon in
  double velocity = 0.0;         // rad/s actually executed last step
  double spool_radius = 0.01;    // m
  double max_speed = 4.7;        // rad/s
  double torque_estimate = 0.0;  // N m, current proxy
  MotorCommand command{};
};

/// Tendon from the motor spool through a sheath to the joint.
///
/// Length bookkeeping (all in meters, closes every step):
///   wound + hub_free_length + (tendon_path_length - creep) + joint_segment + slack
///       = rest_length + stretch
/// where `wound` is the spool wind-in seen at the hand after the transport
/// delay, and joint_segment = joint_segment_length - sign * r * q (sign = +1
/// for a flexing tendon, -1 for the antagonist). At most one of slack and
/// stretch is non-zero.
struct TendonChannel {
  TendonSpec spec;
  SheathPath path = SheathPath::uniform(1.0, 0.0);
  /// Time-varying bend; when absent the path's own accumulated bend is used.
  std::optional<ArmDisturbance> bend_profile;
  double hub_free_length = 0.05;
  double joint_segment_length = 0.03;
  /// Initial state: either slack (m) or motor-side tension (N), not both.
  double initial_slack = 0.0;
  double initial_tension = 0.0;

  // Filled in by the plant.
  double rest_length = 0.0;
  double wound = 0.0;
  double phi = 0.0;
  double path_length = 0.0;
  double creep = 0.0;
  double joint_segment = 0.0;
  double slack = 0.0;
  double stretch = 0.0;
  double motor_tension = 0.0;
  double joint_tension = 0.0;
  DriveDirection sliding = DriveDirection::MotorPulling;

  /// Left minus right side of the bookkeeping identity.
  double bookkeeping_residual() const {
    return (wound + hub_free_length + (path_length - creep) + joint_segment + slack) -
           (rest_length + stretch);
  }
};

struct SpringReturnActuator {
  SpringReturnJoint joint;
  TendonChannel tendon;
  MotorState motor;
  /// Holds the joint fixed (fingertip pressed on a gauge).
  bool locked = false;
};

struct AntagonisticActuator {
  AntagonisticJoint joint;
  TendonChannel agonist;
  TendonChannel antagonist;
  MotorState agonist_motor;
  MotorState antagonist_motor;
  /// Tension both tendons carry at rest when the actuator is added.
  double co_contraction_tension = 2.0;
};

struct CreepModel {
  bool enabled = false;
  double time_constant = 2.0;  // s
  double compliance = 2e-5;    // m of sheath shortening per N of tension
};

struct PlantOptions {
  enum class Mode { Dynamic, QuasiStatic };
  Mode mode = Mode::Dynamic;
  double transport_delay = 0.0;  // s
  CreepModel creep{};
  double bookkeeping_tolerance = 1e-9;  // m
};

/// Single-owner simulation of a set of tendon-driven joints. Motor commands are
/// indexed spring-return motors first (in insertion order), then each
/// antagonistic actuator's agonist and antagonist motors.
class Plant {
 public:
  explicit Plant(PlantOptions options = {});

  std::size_t add(SpringReturnActuator actuator);
  std::size_t add(AntagonisticActuator actuator);

  /// Advances the state from t to t + dt. Bend profiles are sampled at t + dt.
  void step(std::span<const MotorCommand> commands, double t, double dt);

  /// Replaces the bend profile of spring-return actuator `index`; takes effect
  /// from the next step. An empty profile falls back to the path's own bend.
  void set_bend_profile(std::size_t index, std::optional<ArmDisturbance> profile);

  std::size_t motor_count() const;
  const PlantOptions& options() const { return options_; }
  std::span<const SpringReturnActuator> spring_return() const { return spring_; }
  std::span<const AntagonisticActuator> antagonistic() const { return antagonistic_; }

  /// Free-return speed of a spring-return joint at mid-range with no tendon
  /// load, expressed as motor spool speed.
  static double spring_recovery_rate(const SpringReturnJoint& joint, const MotorState& motor);

 private:
  struct DelayLine {
    std::deque<double> samples;
  };

  void initialize_channel(TendonChannel& ch, double wound, double sign, double r, double q,
                          bool require_extensible);
  double delayed(DelayLine& line, double wound, double dt);
  void step_spring(std::size_t i, const MotorCommand& cmd, double t, double dt);
  void step_antagonistic(std::size_t i, const MotorCommand& ag, const MotorCommand& ant,
                         double t, double dt);

  PlantOptions options_;
  std::vector<SpringReturnActuator> spring_;
  std::vector<AntagonisticActuator> antagonistic_;
  std::vector<DelayLine> spring_delay_;
  std::vector<DelayLine> antagonistic_delay_;  // two per actuator
};

/// Tendon tension at the joint needed to hold a spring-return joint at q:
/// (preload + stiffness * q) / r.
double joint_equilibrium_tension(const SpringReturnJoint& joint, double q);

/// Static fingertip normal force for a fixed finger: the capstan-attenuated
/// tendon torque minus the spring reaction at the held angle, over the lever.
/// Clamped at zero (the gauge cannot pull).
double fingertip_force(const SpringReturnJoint& joint, double motor_tension, double phi,
                       const TendonSpec& spec, double contact_lever);

}  // namespace bowden
