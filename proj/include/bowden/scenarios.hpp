#pragma once

#include <vector>

#include <json.hpp>

#include "bowden/config.hpp"
#include "bowden/estimation.hpp"
#include "bowden/record.hpp"

namespace bowden {

/// Grid of friction samples, sheath-major then angle then diameter. Each grid
/// point is an independent job; `jobs` > 1 runs them on that many threads
/// with identical output.
std::vector<FrictionSample> run_friction_sweep(const ScenarioConfig& cfg, int jobs = 1);

/// One locked-finger press per configured sheath, in config order.
std::vector<RunRecord> run_fingertip_force(const ScenarioConfig& cfg, int jobs = 1);

/// Peak force of the longest sheath over that of the shortest.
double peak_force_ratio(const ScenarioConfig& cfg, std::span<const RunRecord> records);

RunRecord run_step_response(const ScenarioConfig& cfg);

/// Records "stationary" then "moving".
std::vector<RunRecord> run_sine_tracking(const ScenarioConfig& cfg, int jobs = 1);

/// Sine reference at record time t: low at t = 0, high half a period later.
double sine_reference(const SineConfig& sine, double t);

/// Metrics of one record as the scenario kind defines them, computed from its
/// series alone.
RunMetrics compute_metrics(const ScenarioConfig& cfg, const RunRecord& record);

struct ScenarioResult {
  ScenarioKind kind;
  std::vector<RunRecord> records;      // time-series scenarios
  std::vector<FrictionSample> sweep;   // friction sweep
  nlohmann::json summary;
};

ScenarioResult run_scenario(const ScenarioConfig& cfg, int jobs = 1);

/// SVG figure for a finished run.
std::string plot_result(const ScenarioConfig& cfg, const ScenarioResult& result);

}  // namespace bowden
