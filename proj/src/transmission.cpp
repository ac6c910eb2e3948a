#include "bowden/transmission.hpp"

#include <cmath>
#include <string>

#include <fmt/core.h>

#include "bowden/errors.hpp"

namespace bowden {

SheathPath::SheathPath(std::vector<SheathSegment> segments) : segments_(std::move(segments)) {
  if (segments_.empty()) {
    throw InvalidParameter("sheath path needs at least one segment");
  }
  for (std::size_t i = 0; i < segments_.size(); ++i) {
    const auto& s = segments_[i];
    if (!(s.length > 0.0) || !std::isfinite(s.length)) {
      throw InvalidParameter(fmt::format("segment {}: length must be > 0", i));
    }
    if (!(s.curvature >= 0.0) || !std::isfinite(s.curvature)) {
      throw InvalidParameter(fmt::format("segment {}: curvature must be >= 0", i));
    }
    total_length_ += s.length;
    accumulated_bend_ += s.curvature * s.length;
    max_curvature_ = std::max(max_curvature_, s.curvature);
  }
}

SheathPath SheathPath::uniform(double length, double bend) {
  if (!(length > 0.0)) throw InvalidParameter("sheath length must be > 0");
  if (!(bend >= 0.0)) throw InvalidParameter("sheath bend must be >= 0");
  return SheathPath({{length, bend / length}});
}

SheathPath SheathPath::sampled(double length, const std::function<double(double)>& kappa,
                               int resolution) {
  if (resolution < 1) throw InvalidParameter("resolution must be >= 1");
  if (!(length > 0.0)) throw InvalidParameter("sheath length must be > 0");
  std::vector<SheathSegment> segs;
  segs.reserve(static_cast<std::size_t>(resolution));
  const double ds = length / resolution;
  for (int i = 0; i < resolution; ++i) {
    segs.push_back({ds, std::abs(kappa((i + 0.5) * ds))});
  }
  return SheathPath(std::move(segs));
}

void TendonSpec::validate() const {
  if (!(tendon_diameter > 0.0) || !(sheath_inner_diameter > tendon_diameter)) {
    throw InvalidParameter("tendon spec requires 0 < d < D");
  }
  if (!(friction_coefficient >= 0.0) || !std::isfinite(friction_coefficient)) {
    throw InvalidParameter("friction coefficient must be >= 0");
  }
  if (axial_stiffness && !(*axial_stiffness > 0.0)) {
    throw InvalidParameter("axial stiffness must be > 0 when given");
  }
}

double accumulated_bend(const SheathPath& path) { return path.accumulated_bend(); }

void check_offset_curve(const SheathPath& path, const TendonSpec& spec) {
  const double e = spec.eccentricity();
  const auto segs = path.segments();
  for (std::size_t i = 0; i < segs.size(); ++i) {
    if (segs[i].curvature > 0.0 && 1.0 / segs[i].curvature <= e) {
      throw OffsetCurveViolation(
          fmt::format("segment {}: bend radius {:.6g} m does not exceed tendon offset {:.6g} m",
                      i, 1.0 / segs[i].curvature, e));
    }
  }
}

double tendon_path_length(const SheathPath& path, const TendonSpec& spec) {
  check_offset_curve(path, spec);
  return tendon_path_length(path.total_length(), path.accumulated_bend(), spec);
}

double tendon_path_length(double sheath_length, double bend, const TendonSpec& spec) {
  const double lt = sheath_length - spec.eccentricity() * bend;
  if (!(lt > 0.0)) {
    throw NonPositiveLength(
        fmt::format("tendon path length {:.6g} m is not positive (bend {:.6g} rad)", lt, bend));
  }
  return lt;
}

double induced_joint_offset(double delta_phi, const TendonSpec& spec,
                            double transmission_radius) {
  if (!(transmission_radius > 0.0)) {
    throw InvalidParameter("transmission radius must be > 0");
  }
  return -(spec.sheath_inner_diameter - spec.tendon_diameter) / (2.0 * transmission_radius) *
         delta_phi;
}

double tension_transfer(double t_drive, double phi, double mu, DriveDirection direction) {
  if (!(t_drive >= 0.0) || !(phi >= 0.0) || !(mu >= 0.0)) {
    throw InvalidParameter("tension_transfer needs non-negative tension, bend and mu");
  }
  // The dragged end is the high-tension end in both directions; what differs
  // is which physical end that is, not the attenuation law.
  switch (direction) {
    case DriveDirection::MotorPulling:
    case DriveDirection::SpringReturning:
      return t_drive * std::exp(-mu * phi);
  }
  return t_drive;
}

double friction_loss(double t_low, double phi, double mu) {
  if (!(t_low >= 0.0) || !(phi >= 0.0) || !(mu >= 0.0)) {
    throw InvalidParameter("friction_loss needs non-negative tension, bend and mu");
  }
  return t_low * std::expm1(mu * phi);
}

}  // namespace bowden
