#include "bowden/estimation.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>
#include <tuple>

#include <fmt/core.h>

#include "bowden/errors.hpp"
#include "bowden/units.hpp"

namespace bowden {

namespace {

void check_distinct(std::span<const double> xs, std::size_t minimum, const char* what) {
  if (xs.size() < minimum) {
    throw DegenerateData(fmt::format("need at least {} {}, got {}", minimum, what, xs.size()));
  }
  std::set<double> distinct(xs.begin(), xs.end());
  if (distinct.size() < 2) {
    throw DegenerateData(fmt::format("all {} share one value", what));
  }
}

struct OriginFit {
  double slope;
  double r_squared;
  double standard_error;
};

OriginFit fit_through_origin(std::span<const double> x, std::span<const double> y) {
  double sxx = 0.0;
  double sxy = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
    syy += y[i] * y[i];
  }
  if (!(sxx > 0.0)) throw DegenerateData("regressor is identically zero");
  const double slope = sxy / sxx;
  double sse = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double e = y[i] - slope * x[i];
    sse += e * e;
  }
  const double r2 = syy > 0.0 ? std::clamp(1.0 - sse / syy, 0.0, 1.0) : 1.0;
  const double dof = static_cast<double>(x.size()) - 1.0;
  const double se = dof > 0.0 ? std::sqrt(sse / dof / sxx) : 0.0;
  return {slope, r2, se};
}

}  // namespace

FitResult fit_mu(std::span<const FrictionSample> samples, FitSpace space) {
  std::vector<double> phi;
  std::vector<double> log_ratio;
  phi.reserve(samples.size());
  log_ratio.reserve(samples.size());
  for (const auto& s : samples) {
    if (!(s.load > 0.0) || !(s.mean_tension > 0.0)) {
      throw NonPositiveTension(
          fmt::format("tension ratio {} / {} is not positive", s.mean_tension, s.load));
    }
    if (!(s.wrap_angle >= 0.0)) throw InvalidParameter("wrap angle must be >= 0");
    phi.push_back(s.wrap_angle);
    log_ratio.push_back(std::log(s.mean_tension / s.load));
  }
  check_distinct(phi, 3, "samples with distinct wrap angles");

  const OriginFit log_fit = fit_through_origin(phi, log_ratio);
  FitResult out;
  out.mu = log_fit.slope;
  out.r_squared = log_fit.r_squared;
  out.standard_error_mu = log_fit.standard_error;

  if (space == FitSpace::Tension) {
    // Gauss-Newton on sum (T_i - T0_i exp(mu phi_i))^2.
    double mu = log_fit.slope;
    for (int it = 0; it < 50; ++it) {
      double jtj = 0.0;
      double jtr = 0.0;
      for (const auto& s : samples) {
        const double model = s.load * std::exp(mu * s.wrap_angle);
        const double jac = model * s.wrap_angle;
        jtj += jac * jac;
        jtr += jac * (s.mean_tension - model);
      }
      const double step = jtr / jtj;
      mu += step;
      if (std::abs(step) <= 1e-15 * std::max(1.0, std::abs(mu))) break;
    }
    double sse = 0.0;
    double syy = 0.0;
    double jtj = 0.0;
    for (const auto& s : samples) {
      const double model = s.load * std::exp(mu * s.wrap_angle);
      const double e = s.mean_tension - model;
      sse += e * e;
      const double y = s.mean_tension - s.load;
      syy += y * y;
      jtj += model * s.wrap_angle * model * s.wrap_angle;
    }
    out.mu = mu;
    out.r_squared = syy > 0.0 ? std::clamp(1.0 - sse / syy, 0.0, 1.0) : 1.0;
    const double dof = static_cast<double>(samples.size()) - 1.0;
    out.standard_error_mu = std::sqrt(sse / dof / jtj);
  }

  if (out.mu < 0.0) {
    out.mu = 0.0;
    out.clamped = true;
  }
  out.residuals.reserve(samples.size());
  for (const auto& s : samples) {
    out.residuals.push_back(s.mean_tension - s.load * std::exp(out.mu * s.wrap_angle));
  }
  return out;
}

double fit_transmission_gain(std::span<const std::pair<double, double>> pairs) {
  std::vector<double> dphi;
  std::vector<double> dq;
  for (const auto& [a, b] : pairs) {
    if (!std::isfinite(a) || !std::isfinite(b)) throw InvalidParameter("pairs must be finite");
    dphi.push_back(a);
    dq.push_back(b);
  }
  check_distinct(dphi, 2, "pairs with distinct bend changes");
  return std::abs(fit_through_origin(dphi, dq).slope);
}

std::vector<SweepCell> summarize_sweep(std::span<const FrictionSample> samples) {
  using Key = std::tuple<std::string, double, double>;
  std::map<Key, std::vector<double>> groups;
  for (const auto& s : samples) {
    groups[{s.sheath_type, s.wrap_angle, s.disk_diameter}].push_back(s.mean_tension - s.load);
  }
  std::vector<SweepCell> out;
  out.reserve(groups.size());
  for (const auto& [key, values] : groups) {
    const auto n = static_cast<double>(values.size());
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= n;
    double var = 0.0;
    for (double v : values) var += (v - mean) * (v - mean);
    out.push_back({std::get<0>(key), std::get<1>(key), std::get<2>(key), values.size(), mean,
                   std::sqrt(var / n)});
  }
  return out;
}

TraceStats trace_stats(std::span<const double> trace) {
  const std::size_t cut = trace.size() / 10;
  const auto middle = trace.subspan(cut, trace.size() - 2 * cut);
  if (middle.empty()) throw DegenerateData("trace is empty");
  const auto n = static_cast<double>(middle.size());
  double mean = 0.0;
  for (double v : middle) mean += v;
  mean /= n;
  double var = 0.0;
  for (double v : middle) var += (v - mean) * (v - mean);
  return {mean, std::sqrt(var / n)};
}

namespace {

constexpr std::array<const char*, 6> kColumns{"sheath_type",    "wrap_angle_deg",
                                              "disk_diameter_mm", "mean_tension_N",
                                              "std_tension_N",  "load_N"};

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) {
    const auto b = field.find_first_not_of(" \t\r");
    const auto e = field.find_last_not_of(" \t\r");
    fields.push_back(b == std::string::npos ? std::string{} : field.substr(b, e - b + 1));
  }
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

}  // namespace

std::vector<FrictionSample> read_friction_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || split_csv(line).empty()) {
    throw CsvSchemaError("", 0, "CSV is empty; expected a header row");
  }
  const auto header = split_csv(line);
  std::array<std::size_t, kColumns.size()> index{};
  for (std::size_t c = 0; c < kColumns.size(); ++c) {
    const auto it = std::find(header.begin(), header.end(), kColumns[c]);
    if (it == header.end()) throw CsvSchemaError(kColumns[c], 1, "missing column");
    index[c] = static_cast<std::size_t>(it - header.begin());
  }

  std::vector<FrictionSample> out;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto fields = split_csv(line);
    if (fields.size() != header.size()) {
      throw CsvSchemaError("", row,
                           fmt::format("expected {} fields, got {}", header.size(), fields.size()));
    }
    auto number = [&](std::size_t c) {
      const std::string& text = fields[index[c]];
      try {
        std::size_t used = 0;
        const double v = std::stod(text, &used);
        if (used != text.size() || !std::isfinite(v)) throw std::invalid_argument(text);
        return v;
      } catch (const std::logic_error&) {
        throw CsvSchemaError(kColumns[c], row, fmt::format("'{}' is not a number", text));
      }
    };
    FrictionSample s;
    s.sheath_type = fields[index[0]];
    if (s.sheath_type.empty()) throw CsvSchemaError(kColumns[0], row, "empty sheath type");
    s.wrap_angle = deg2rad(number(1));
    s.disk_diameter = number(2) * 1e-3;
    s.mean_tension = number(3);
    s.std_tension = number(4);
    s.load = number(5);
    if (s.wrap_angle < 0.0) throw CsvSchemaError(kColumns[1], row, "negative wrap angle");
    if (s.std_tension < 0.0) throw CsvSchemaError(kColumns[4], row, "negative standard deviation");
    out.push_back(std::move(s));
  }
  if (out.empty()) throw CsvSchemaError("", 0, "CSV has a header but no data rows");
  return out;
}

void write_friction_csv(std::ostream& out, std::span<const FrictionSample> samples) {
  out << "sheath_type,wrap_angle_deg,disk_diameter_mm,mean_tension_N,std_tension_N,load_N\n";
  for (const auto& s : samples) {
    out << fmt::format("{},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g}\n", s.sheath_type,
                       rad2deg(s.wrap_angle), s.disk_diameter * 1e3, s.mean_tension,
                       s.std_tension, s.load);
  }
}

}  // namespace bowden
