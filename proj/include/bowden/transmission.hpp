#pragma once

#include <functional>
#include <optional>
#include <span>
#include <vector>

namespace bowden {

/// Constant-curvature piece of a sheath. Curvature is the unsigned magnitude.
struct SheathSegment {
  double length;     // m
  double curvature;  // 1/m
};

/// Sheath centerline described as piecewise-constant curvature along arc length.
class SheathPath {
 public:
  explicit SheathPath(std::vector<SheathSegment> segments);

  /// Single segment of the given length whose curvature integrates to `bend`.
  static SheathPath uniform(double length, double bend);

  /// Discretizes an arbitrary curvature function kappa(s) on [0, length] into
  /// `resolution` equal segments, sampling at segment midpoints.
  static SheathPath sampled(double length, const std::function<double(double)>& kappa,
                            int resolution);

  std::span<const SheathSegment> segments() const { return segments_; }
  double total_length() const { return total_length_; }
  double accumulated_bend() const { return accumulated_bend_; }
  /// Largest curvature of any segment (0 for a straight sheath).
  double max_curvature() const { return max_curvature_; }

 private:
  std::vector<SheathSegment> segments_;
  double total_length_ = 0.0;
  double accumulated_bend_ = 0.0;
  double max_curvature_ = 0.0;
};

/// Physical parameters of a tendon running inside a sheath.
struct TendonSpec {
  double tendon_diameter;                // d, m
  double sheath_inner_diameter;          // D, m
  double friction_coefficient;           // mu
  std::optional<double> axial_stiffness; // N per unit strain; nullopt = inextensible

  /// Offset e = (D - d)/2 between sheath centerline and tendon centerline.
  double eccentricity() const { return 0.5 * (sheath_inner_diameter - tendon_diameter); }
  bool inextensible() const { return !axial_stiffness.has_value(); }

  /// Throws InvalidParameter unless 0 < d < D, mu >= 0 and stiffness > 0.
  void validate() const;
};

/// Which end of the tendon is being dragged. The dragged end carries the
/// higher tension.
enum class DriveDirection {
  MotorPulling,     // motor drags tendon toward the hub; joint side is low
  SpringReturning,  // joint spring drags tendon toward the hand; hub side is low
};

/// phi = sum of kappa_i * L_i.
double accumulated_bend(const SheathPath& path);

/// Throws OffsetCurveViolation when a curved segment is tighter than the
/// tendon offset (1/kappa <= e).
void check_offset_curve(const SheathPath& path, const TendonSpec& spec);

/// Tendon centerline length l_t = L - e * phi for a tendon hugging the inner
/// wall on the bending side.
double tendon_path_length(const SheathPath& path, const TendonSpec& spec);

/// Same as above for a sheath of length L whose bend is given directly.
/// Throws NonPositiveLength if the result is <= 0.
double tendon_path_length(double sheath_length, double bend, const TendonSpec& spec);

/// Joint angle change caused by a bend change with the motor held:
/// dq = -(D - d) / (2 r) * dphi.
double induced_joint_offset(double delta_phi, const TendonSpec& spec,
                            double transmission_radius);

/// Capstan transfer: tension arriving at the far (low) end when `t_drive` is
/// applied at the dragged end. Both directions attenuate by exp(-mu phi).
double tension_transfer(double t_drive, double phi, double mu, DriveDirection direction);

/// Tension difference across the sheath when the low end holds t_low:
/// t_low * (exp(mu phi) - 1).
double friction_loss(double t_low, double phi, double mu);

}  // namespace bowden
