#include "bowden/disturbance.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "bowden/errors.hpp"

namespace bowden {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void validate(const ArmDisturbance::Profile& p) {
  std::visit(Overloaded{
                 [](const ArmDisturbance::Constant& c) {
                   if (!(c.phi >= 0.0)) throw InvalidParameter("disturbance phi must be >= 0");
                 },
                 [](const ArmDisturbance::Sinusoid& s) {
                   if (!(s.amplitude >= 0.0) || !(s.phi0 >= s.amplitude)) {
                     throw InvalidParameter("sinusoid disturbance needs 0 <= amplitude <= phi0");
                   }
                   if (!(s.frequency >= 0.0)) {
                     throw InvalidParameter("sinusoid frequency must be >= 0");
                   }
                 },
                 [](const ArmDisturbance::Step& s) {
                   if (!(s.phi0 >= 0.0) || !(s.phi0 + s.delta >= 0.0)) {
                     throw InvalidParameter("step disturbance must stay >= 0");
                   }
                 },
                 [](const ArmDisturbance::Samples& s) {
                   if (s.points.empty()) throw InvalidParameter("disturbance samples are empty");
                   for (std::size_t i = 0; i < s.points.size(); ++i) {
                     if (!(s.points[i].second >= 0.0)) {
                       throw InvalidParameter("disturbance samples must be >= 0");
                     }
                     if (i > 0 && !(s.points[i].first > s.points[i - 1].first)) {
                       throw InvalidParameter("disturbance sample times must increase");
                     }
                   }
                 },
             },
             p);
}

}  // namespace

ArmDisturbance::ArmDisturbance(Profile profile) : profile_(std::move(profile)) {
  validate(profile_);
}

double ArmDisturbance::phi(double t) const {
  return std::visit(
      Overloaded{
          [](const Constant& c) { return c.phi; },
          [t](const Sinusoid& s) {
            // A rounding dip below zero at the trough is clipped.
            return std::max(0.0, s.phi0 + s.amplitude *
                                              std::sin(2.0 * std::numbers::pi * s.frequency * t));
          },
          [t](const Step& s) { return t >= s.time ? s.phi0 + s.delta : s.phi0; },
          [t](const Samples& s) {
            const auto& pts = s.points;
            if (t <= pts.front().first) return pts.front().second;
            if (t >= pts.back().first) return pts.back().second;
            auto hi = std::upper_bound(pts.begin(), pts.end(), t,
                                       [](double v, const auto& p) { return v < p.first; });
            auto lo = hi - 1;
            const double a = (t - lo->first) / (hi->first - lo->first);
            return lo->second + a * (hi->second - lo->second);
          },
      },
      profile_);
}

}  // namespace bowden
