#include "bowden/record.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

#include <fmt/core.h>

#include "bowden/errors.hpp"

namespace bowden {

double steady_state_error(std::span<const Sample> series, double fraction) {
  if (series.empty()) throw InvalidParameter("empty series");
  if (!(fraction > 0.0 && fraction <= 1.0)) throw InvalidParameter("fraction must be in (0, 1]");
  const auto n = series.size();
  const auto window = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(n) - 1e-9)));
  double sum = 0.0;
  for (std::size_t i = n - window; i < n; ++i) sum += std::abs(series[i].q_ref - series[i].q_meas);
  return sum / static_cast<double>(window);
}

std::optional<double> onset_delay(std::span<const Sample> series, double step_time,
                                  double motion_floor) {
  for (std::size_t i = 1; i < series.size(); ++i) {
    if (series[i].t <= step_time) continue;
    const double dt = series[i].t - series[i - 1].t;
    if (std::abs(series[i].q_meas - series[i - 1].q_meas) / dt > motion_floor) {
      return series[i].t - step_time;
    }
  }
  return std::nullopt;
}

double rms_error(std::span<const Sample> series) {
  if (series.empty()) throw InvalidParameter("empty series");
  double sum = 0.0;
  for (const auto& s : series) sum += (s.q_ref - s.q_meas) * (s.q_ref - s.q_meas);
  return std::sqrt(sum / static_cast<double>(series.size()));
}

double peak_force(std::span<const Sample> series) {
  double peak = 0.0;
  for (const auto& s : series) peak = std::max(peak, s.fingertip_force);
  return peak;
}

namespace {

constexpr const char* kHeader =
    "variant,t,q_ref,q_meas,motor_angle,motor_command,torque_estimate,slack,phi,tendon_tension,"
    "fingertip_force";

}  // namespace

void write_series_csv(std::ostream& out, std::span<const RunRecord> records) {
  out << kHeader << '\n';
  std::string buf;
  for (const auto& r : records) {
    for (const auto& s : r.series) {
      buf = fmt::format("{},{:.9g},{:.9g},{:.9g},{:.9g},{:.9g},{:.9g},{:.9g},{:.9g},{:.9g},{:.9g}\n",
                        r.variant, s.t, s.q_ref, s.q_meas, s.motor_angle, s.motor_command,
                        s.torque_estimate, s.slack, s.phi, s.tendon_tension, s.fingertip_force);
      out << buf;
    }
  }
}

std::vector<RunRecord> read_series_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kHeader) {
    throw CsvSchemaError("", 1, "not a series CSV (header mismatch)");
  }
  std::vector<RunRecord> out;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string variant;
    std::getline(ss, variant, ',');
    std::array<double, 10> v{};
    for (std::size_t c = 0; c < v.size(); ++c) {
      std::string field;
      if (!std::getline(ss, field, ',')) throw CsvSchemaError("", row, "too few fields");
      try {
        v[c] = std::stod(field);
      } catch (const std::logic_error&) {
        throw CsvSchemaError("", row, fmt::format("'{}' is not a number", field));
      }
    }
    if (out.empty() || out.back().variant != variant) out.push_back({variant, 0.0, {}, {}});
    out.back().series.push_back({v[0], v[1], v[2], v[3], v[4], v[5], v[6], v[7], v[8], v[9]});
  }
  for (auto& r : out) {
    if (r.series.size() >= 2) r.dt = r.series[1].t - r.series[0].t;
  }
  return out;
}

}  // namespace bowden
