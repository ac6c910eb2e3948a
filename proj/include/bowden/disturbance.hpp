#pragma once

#include <utility>
#include <variant>
#include <vector>

namespace bowden {

/// Accumulated sheath bend as a function of time, standing in for arm motion.
/// Every profile is validated to stay non-negative over all t.
class ArmDisturbance {
 public:
  struct Constant {
    double phi;
  };
  /// phi0 + amplitude * sin(2 pi f t); requires amplitude <= phi0.
  struct Sinusoid {
    double phi0;
    double amplitude;
    double frequency;
  };
  /// phi0 before `time`, phi0 + delta at and after it.
  struct Step {
    double phi0;
    double delta;
    double time;
  };
  /// Piecewise-linear through (t, phi) samples, held flat outside the range.
  struct Samples {
    std::vector<std::pair<double, double>> points;
  };
  using Profile = std::variant<Constant, Sinusoid, Step, Samples>;

  ArmDisturbance() : ArmDisturbance(Constant{0.0}) {}
  explicit ArmDisturbance(Profile profile);

  static ArmDisturbance constant(double phi) { return ArmDisturbance(Constant{phi}); }

  double phi(double t) const;
  const Profile& profile() const { return profile_; }

 private:
  Profile profile_;
};

}  // namespace bowden
