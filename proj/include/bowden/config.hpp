#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "bowden/hand.hpp"

namespace bowden {

inline constexpr int kSchemaVersion = 1;

enum class ScenarioKind { FrictionSweep, FingertipForce, StepResponse, SineTracking };

std::string_view to_string(ScenarioKind kind);

// Every value below is SI (m, N, s, rad) once parsed.

struct JointConfig {
  double spool_radius = 0.01;
  double spring_stiffness = 0.02;  // N m / rad
  double spring_preload = 0.01;    // N m
  double damping = 1e-4;           // N m s / rad
  double inertia = 1e-6;           // kg m^2
  double stiction_torque = 0.0;    // N m
  bool operator==(const JointConfig&) const = default;
};

struct TendonConfig {
  double tendon_diameter = 1e-3;
  double sheath_inner_diameter = 4e-3;
  double friction_coefficient = 0.1;
  std::optional<double> axial_stiffness = 5e4;  // N; absent means inextensible
  bool operator==(const TendonConfig&) const = default;
};

struct SheathConfig {
  double length = 1.0;
  double bend = 2.0;  // accumulated bend of the stationary arm
  bool operator==(const SheathConfig&) const = default;
};

struct MotorConfig {
  double spool_radius = 0.01;
  double max_speed = 4.7;  // rad/s
  bool operator==(const MotorConfig&) const = default;
};

struct CreepConfig {
  bool enabled = false;
  double time_constant = 2.0;
  double compliance = 2e-5;  // m/N
  bool operator==(const CreepConfig&) const = default;
};

struct PlantConfig {
  JointConfig joint;
  TendonConfig tendon;
  SheathConfig sheath;
  MotorConfig motor;
  double hub_free_length = 0.05;
  double joint_segment_length = 0.03;
  bool quasi_static = false;
  double transport_delay = 0.0;
  CreepConfig creep;
  bool operator==(const PlantConfig&) const = default;
};

struct AnomalyConfigSpec {
  double current_spike_threshold = 1.5;
  double encoder_motion_floor = 0.01;
  double window = 0.1;
  bool operator==(const AnomalyConfigSpec&) const = default;
};

struct SlackConfigSpec {
  double threshold = 0.03490658503988659;
  double gain = 5.0;
  double max_speed = 2.0;
  bool operator==(const SlackConfigSpec&) const = default;
};

struct PretensionConfig {
  double angle = 0.1;
  double wind_speed = 1.0;
  double settle_time = 0.05;
  double horizon = 2.0;
  bool operator==(const PretensionConfig&) const = default;
};

struct ControllerConfig {
  double kp = 8.0;
  double ki = 2.0;
  double kd = 0.05;
  double integral_clamp = 0.5;
  double output_clamp = 4.7;
  double release_speed_limit = 4.7;
  AnomalyConfigSpec anomaly;
  SlackConfigSpec slack_recovery;
  PretensionConfig pretension;
  bool operator==(const ControllerConfig&) const = default;
};

/// Bend profile of the moving arm: phi0 + amplitude sin(2 pi f t).
struct ArmMotionConfig {
  double phi0 = 2.0;
  double amplitude = 0.5;
  double frequency = 0.2;
  bool operator==(const ArmMotionConfig&) const = default;
};

struct NoiseConfig {
  bool enabled = false;
  double encoder_resolution = 3.490658503988659e-4;  // 0.02 deg
  double tension_noise = 0.0;                        // relative std of tension readings
  bool operator==(const NoiseConfig&) const = default;
};

struct SheathType {
  std::string name;
  double mu;
  bool operator==(const SheathType&) const = default;
};

struct FrictionSweepConfig {
  std::vector<SheathType> sheaths{{"PTFE", 0.12}};
  std::vector<double> angles;     // rad
  std::vector<double> diameters;  // m
  double load = 19.6133;          // N
  double noise = 0.0;             // relative std per trace sample
  int trace_samples = 50;
  bool operator==(const FrictionSweepConfig&) const = default;
};

struct FingertipSheath {
  std::string name;
  double length;
  double bend;
  bool operator==(const FingertipSheath&) const = default;
};

struct FingertipConfig {
  std::vector<FingertipSheath> sheaths;
  double peak_tension = 169.0;  // N at the motor
  double ramp_time = 1.0;
  double contact_lever = 0.05;
  double joint_angle = 0.0;     // held angle
  bool operator==(const FingertipConfig&) const = default;
};

struct StepConfig {
  double amplitude = 0.17453292519943295;  // 10 deg
  double step_time = 1.0;
  double motion_floor = 8.726646259971648e-4;  // 0.05 deg/s
  double steady_fraction = 0.2;
  bool operator==(const StepConfig&) const = default;
};

struct SineConfig {
  double low = 0.4363323129985824;   // 25 deg
  double high = 0.9599310885968813;  // 55 deg
  double frequency = 0.5;
  double pre_roll = 2.0;
  ArmMotionConfig arm;
  bool operator==(const SineConfig&) const = default;
};

struct ScenarioConfig {
  int schema_version = kSchemaVersion;
  ScenarioKind kind = ScenarioKind::StepResponse;
  double duration = 5.0;
  double dt = 1e-3;
  std::uint64_t seed = 0;
  Finger finger = Finger::Index;  // target joint, "joint 0"
  JointName joint = JointName::MCP_FE;
  PlantConfig plant;
  ControllerConfig controller;
  NoiseConfig noise;
  FrictionSweepConfig friction_sweep;
  FingertipConfig fingertip;
  StepConfig step;
  SineConfig sine;
  bool operator==(const ScenarioConfig&) const = default;
};

/// Parses a config document. Numeric fields take either a plain number (SI)
/// or a string with a unit, e.g. "90 deg", "4 mm", "2 kgf", "1 ms".
/// "include" (string or list) names files merged underneath this one,
/// resolved relative to `base_dir`. Throws ConfigError.
ScenarioConfig parse_config(std::string_view text,
                            const std::filesystem::path& base_dir = {});
ScenarioConfig load_config(const std::filesystem::path& path);

/// Checks cross-field constraints; throws ConfigError naming the field.
void validate(const ScenarioConfig& cfg);

/// Canonical SI document with every field present and no includes.
nlohmann::json to_json(const ScenarioConfig& cfg);
std::string dump_config(const ScenarioConfig& cfg);

/// Value of a quantity string in SI units, e.g. "1.5 mm" -> 0.0015.
double parse_quantity(std::string_view text);

}  // namespace bowden
