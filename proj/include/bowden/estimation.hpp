#pragma once

#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace bowden {

struct FrictionSample {
  std::string sheath_type;
  double wrap_angle = 0.0;     // rad
  double disk_diameter = 0.0;  // m
  double mean_tension = 0.0;   // N, measured on the pulled side
  double std_tension = 0.0;    // N
  double load = 0.0;           // N, T0 hanging on the far side
};

struct FitResult {
  double mu = 0.0;
  double r_squared = 0.0;
  std::vector<double> residuals;  // N, measured minus fitted tension
  double standard_error_mu = 0.0;
  bool clamped = false;  // the regression slope was negative and mu was set to 0
};

enum class FitSpace { Log, Tension };

/// Fits T = T0 exp(mu phi). The default regresses ln(T/T0) on phi through the
/// origin; FitSpace::Tension minimises squared tension residuals instead
/// (Gauss-Newton seeded by the log fit). R^2 is the uncentred coefficient of
/// the through-origin regression in the chosen space.
FitResult fit_mu(std::span<const FrictionSample> samples, FitSpace space = FitSpace::Log);

/// |slope| through the origin of dq against dphi, i.e. (D - d) / (2 r).
double fit_transmission_gain(std::span<const std::pair<double, double>> pairs);

struct SweepCell {
  std::string sheath_type;
  double wrap_angle;
  double disk_diameter;
  std::size_t count;
  double mean_friction;  // N, mean of (tension - load)
  double std_friction;   // N, population standard deviation
};

/// Groups by (sheath type, angle, diameter) in sorted key order.
std::vector<SweepCell> summarize_sweep(std::span<const FrictionSample> samples);

struct TraceStats {
  double mean;
  double std;  // population
};

/// Mean and standard deviation of the middle of a force trace, with the first
/// and last 10% of samples dropped.
TraceStats trace_stats(std::span<const double> trace);

/// Friction-sample CSV: sheath_type, wrap_angle_deg, disk_diameter_mm,
/// mean_tension_N, std_tension_N, load_N. Columns may appear in any order.
/// Throws CsvSchemaError naming the column and row (the header is row 1).
std::vector<FrictionSample> read_friction_csv(std::istream& in);
void write_friction_csv(std::ostream& out, std::span<const FrictionSample> samples);

}  // namespace bowden
