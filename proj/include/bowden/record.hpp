#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace bowden {

/// One row of a run's time series. Angles in rad, tensions in N.
struct Sample {
  double t;
  double q_ref;
  double q_meas;
  double motor_angle;
  double motor_command;  // rad/s for velocity commands, rad for position commands
  double torque_estimate;
  double slack;
  double phi;
  double tendon_tension;   // joint side
  double fingertip_force;  // 0 outside the fingertip press

  bool operator==(const Sample&) const = default;
};

struct RunMetrics {
  std::optional<double> steady_state_error;  // rad
  std::optional<double> onset_delay;         // s
  std::optional<double> rms_error;           // rad
  std::optional<double> peak_force;          // N

  bool operator==(const RunMetrics&) const = default;
};

struct RunRecord {
  std::string variant;
  double dt = 0.0;
  std::vector<Sample> series;
  RunMetrics metrics;

  bool operator==(const RunRecord&) const = default;
};

/// Mean |q_ref - q_meas| over the last `fraction` of the rows.
double steady_state_error(std::span<const Sample> series, double fraction);

/// Time from `step_time` to the first row after it whose measured joint speed
/// (backward difference) exceeds `motion_floor`. Empty if the joint never moves.
std::optional<double> onset_delay(std::span<const Sample> series, double step_time,
                                  double motion_floor);

double rms_error(std::span<const Sample> series);
double peak_force(std::span<const Sample> series);

/// CSV with a leading `variant` column, 9 significant digits, LF endings.
void write_series_csv(std::ostream& out, std::span<const RunRecord> records);
std::vector<RunRecord> read_series_csv(std::istream& in);

}  // namespace bowden
