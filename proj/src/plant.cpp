#include "bowden/plant.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include <fmt/core.h>

#include "bowden/errors.hpp"

namespace bowden {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// One extensible tendon as seen by the joint solver.
struct ChannelTerm {
  double sign;       // +1 flexing tendon, -1 antagonist
  double stiffness;  // N/m
  double stretch0;   // stretch at the current joint angle; negative means slack
  double mu_phi;
};

struct JointTerms {
  double r;
  double inertia;
  double damping;
  double spring_k;
  double spring_p;
  double stiction;
  double q;
  double v;
};

// Joint-side share of the motor-side tension for a tendon of the given sign
// when the joint moves in direction `dir`.
double friction_factor(double sign, int dir, double mu_phi) {
  return sign * dir > 0 ? std::exp(-mu_phi) : std::exp(mu_phi);
}

// Residual of the linearly implicit update (stiffness and damping evaluated
// at the end of the step) under a hypothesised sliding direction.
double residual(const JointTerms& j, std::span<const ChannelTerm> ch, int dir, double dt,
                double v_new) {
  const double q_new = j.q + dt * v_new;
  double torque = -(j.spring_p + j.spring_k * q_new) - dir * j.stiction;
  for (const auto& c : ch) {
    const double stretch = c.stretch0 - c.sign * j.r * dt * v_new;
    if (stretch > 0.0) {
      torque += c.sign * j.r * friction_factor(c.sign, dir, c.mu_phi) * c.stiffness * stretch;
    }
  }
  return (j.inertia + dt * j.damping) * v_new - j.inertia * j.v - dt * torque;
}

// Zero of a non-decreasing piecewise-linear function with the given kinks.
// Returns the zero closest to 0 when g vanishes on an interval, and -inf/+inf
// when g stays strictly positive/negative.
template <class F>
double monotone_root(const F& g, std::vector<double> kinks) {
  std::sort(kinks.begin(), kinks.end());
  kinks.erase(std::unique(kinks.begin(), kinks.end()), kinks.end());
  std::vector<double> xs;
  if (kinks.empty()) {
    xs = {0.0, 1.0};
  } else {
    xs.reserve(kinks.size() + 2);
    xs.push_back(kinks.front() - 1.0);
    xs.insert(xs.end(), kinks.begin(), kinks.end());
    xs.push_back(kinks.back() + 1.0);
  }
  std::vector<double> gs(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) gs[i] = g(xs[i]);
  const std::size_t n = xs.size();

  const double left_slope = (gs[1] - gs[0]) / (xs[1] - xs[0]);
  const double right_slope = (gs[n - 1] - gs[n - 2]) / (xs[n - 1] - xs[n - 2]);

  double lo;
  if (gs[n - 1] < 0.0) {
    if (!(right_slope > 0.0)) return kInf;
    lo = xs[n - 1] - gs[n - 1] / right_slope;
    return lo;
  }
  if (gs[0] >= 0.0) {
    if (left_slope > 0.0) {
      lo = xs[0] - gs[0] / left_slope;
    } else if (gs[0] == 0.0) {
      lo = -kInf;
    } else {
      return -kInf;
    }
  } else {
    std::size_t k = 1;
    while (gs[k] < 0.0) ++k;
    lo = xs[k - 1] + (xs[k] - xs[k - 1]) * (-gs[k - 1]) / (gs[k] - gs[k - 1]);
  }

  double hi;
  if (gs[0] > 0.0) {
    hi = lo;
  } else if (gs[n - 1] <= 0.0) {
    hi = right_slope > 0.0 ? xs[n - 1] - gs[n - 1] / right_slope : kInf;
  } else {
    std::size_t k = n - 2;
    while (gs[k] > 0.0) --k;
    hi = xs[k] + (xs[k + 1] - xs[k]) * (-gs[k]) / (gs[k + 1] - gs[k]);
  }
  return std::clamp(0.0, lo, std::max(lo, hi));
}

struct JointSolution {
  double v;
  int dir;  // +1 flexing, -1 extending, 0 stuck
};

// Tries both sliding directions; if neither is self-consistent the joint
// (and the tendon inside the sheath) sticks.
JointSolution solve_joint(const JointTerms& j, std::span<const ChannelTerm> ch, double dt) {
  std::vector<double> kinks;
  kinks.reserve(ch.size());
  for (const auto& c : ch) kinks.push_back(c.stretch0 / (c.sign * j.r * dt));

  const double v_plus = monotone_root(
      [&](double v) { return residual(j, ch, +1, dt, v); }, kinks);
  if (v_plus > 0.0) return {v_plus, +1};
  const double v_minus = monotone_root(
      [&](double v) { return residual(j, ch, -1, dt, v); }, kinks);
  if (v_minus < 0.0) return {v_minus, -1};
  return {0.0, 0};
}

DriveDirection sliding_for(double sign, int dir, DriveDirection previous) {
  const double s = sign * dir;
  if (s > 0) return DriveDirection::MotorPulling;
  if (s < 0) return DriveDirection::SpringReturning;
  return previous;
}

double factor_for(DriveDirection d, double mu_phi) {
  // Joint-side tension over motor-side tension.
  return d == DriveDirection::MotorPulling ? std::exp(-mu_phi) : std::exp(mu_phi);
}

double advance_motor(MotorState& m, const MotorCommand& cmd, double dt) {
  if (!std::isfinite(cmd.value)) throw NonFiniteState("motor command is not finite");
  m.command = cmd;
  double next;
  if (cmd.mode == MotorCommand::Mode::Position) {
    const double gap = cmd.value - m.spool_angle;
    next = std::abs(gap) <= m.max_speed * dt ? cmd.value
                                              : m.spool_angle + std::copysign(m.max_speed * dt, gap);
  } else {
    next = m.spool_angle + std::clamp(cmd.value, -m.max_speed, m.max_speed) * dt;
  }
  return next;
}

void validate_motor(const MotorState& m) {
  if (!(m.spool_radius > 0.0)) throw InvalidParameter("motor spool radius must be > 0");
  if (!(m.max_speed > 0.0)) throw InvalidParameter("motor max speed must be > 0");
}

void check_finite(std::initializer_list<double> values, const char* what) {
  for (double v : values) {
    if (!std::isfinite(v)) {
      throw NonFiniteState(fmt::format("{} became non-finite; reduce dt", what));
    }
  }
}

void check_bookkeeping(const TendonChannel& ch, double tol) {
  const double res = ch.bookkeeping_residual();
  if (!(std::abs(res) <= tol)) {
    throw InvariantBreach(fmt::format("tendon length bookkeeping off by {:.3e} m", res));
  }
}

}  // namespace

Plant::Plant(PlantOptions options) : options_(options) {
  if (!(options_.transport_delay >= 0.0)) throw InvalidParameter("transport delay must be >= 0");
  if (options_.creep.enabled &&
      (!(options_.creep.time_constant > 0.0) || !(options_.creep.compliance >= 0.0))) {
    throw InvalidParameter("creep needs time_constant > 0 and compliance >= 0");
  }
}

void Plant::set_bend_profile(std::size_t index, std::optional<ArmDisturbance> profile) {
  if (index >= spring_.size()) throw InvalidParameter("no such actuator");
  spring_[index].tendon.bend_profile = std::move(profile);
}

std::size_t Plant::motor_count() const { return spring_.size() + 2 * antagonistic_.size(); }

void Plant::initialize_channel(TendonChannel& ch, double wound, double sign, double r, double q,
                               bool require_extensible) {
  ch.spec.validate();
  if (require_extensible && ch.spec.inextensible()) {
    throw InvalidParameter("this actuator needs an extensible tendon (axial_stiffness)");
  }
  if (!(ch.initial_slack >= 0.0) || !(ch.initial_tension >= 0.0)) {
    throw InvalidParameter("initial slack and tension must be >= 0");
  }
  if (ch.initial_slack > 0.0 && ch.initial_tension > 0.0) {
    throw InvalidParameter("a channel starts either slack or tensioned, not both");
  }
  if (ch.initial_tension > 0.0 && ch.spec.inextensible()) {
    throw InvalidParameter("initial tension needs an extensible tendon");
  }
  if (!(ch.hub_free_length >= 0.0) || !(ch.joint_segment_length >= 0.0)) {
    throw InvalidParameter("hub and joint segment lengths must be >= 0");
  }
  check_offset_curve(ch.path, ch.spec);
  ch.phi = ch.bend_profile ? ch.bend_profile->phi(0.0) : ch.path.accumulated_bend();
  ch.path_length = tendon_path_length(ch.path.total_length(), ch.phi, ch.spec);
  ch.wound = wound;
  ch.creep = 0.0;
  ch.joint_segment = ch.joint_segment_length - sign * r * q;
  const double geometric = wound + ch.hub_free_length + ch.path_length + ch.joint_segment;
  if (ch.initial_tension > 0.0) {
    // stretch = T * rest / EA and geometric = rest + stretch.
    ch.rest_length = geometric / (1.0 + ch.initial_tension / *ch.spec.axial_stiffness);
    ch.stretch = geometric - ch.rest_length;
    ch.slack = 0.0;
    ch.motor_tension = *ch.spec.axial_stiffness * ch.stretch / ch.rest_length;
  } else {
    ch.rest_length = geometric + ch.initial_slack;
    ch.slack = ch.initial_slack;
    ch.stretch = 0.0;
    ch.motor_tension = 0.0;
  }
  ch.sliding = DriveDirection::MotorPulling;
  ch.joint_tension = ch.motor_tension * std::exp(-ch.spec.friction_coefficient * ch.phi);
  if (!(ch.rest_length > 0.0)) throw InvalidParameter("tendon rest length must be > 0");
}

std::size_t Plant::add(SpringReturnActuator a) {
  auto& j = a.joint;
  if (!(j.spool_radius > 0.0) || !(j.spring_stiffness > 0.0) || !(j.spring_preload >= 0.0) ||
      !(j.damping >= 0.0) || !(j.inertia >= 0.0) || !(j.stiction_torque >= 0.0)) {
    throw InvalidParameter("spring-return joint parameters out of range");
  }
  if (!(j.q_min < j.q_max) || j.angle < j.q_min || j.angle > j.q_max) {
    throw InvalidParameter("spring-return joint angle outside its limits");
  }
  validate_motor(a.motor);
  if (a.locked && a.tendon.spec.inextensible()) {
    throw InvalidParameter("a locked joint needs an extensible tendon to carry load");
  }
  initialize_channel(a.tendon, a.motor.spool_radius * a.motor.spool_angle, 1.0,
                     j.spool_radius, j.angle, false);
  a.motor.torque_estimate = a.tendon.motor_tension * a.motor.spool_radius;
  spring_.push_back(std::move(a));
  spring_delay_.emplace_back();
  return spring_.size() - 1;
}

std::size_t Plant::add(AntagonisticActuator a) {
  auto& j = a.joint;
  if (!(j.spool_radius > 0.0) || !(j.damping >= 0.0) || !(j.inertia >= 0.0) ||
      !(j.stiction_torque >= 0.0) || !(a.co_contraction_tension >= 0.0)) {
    throw InvalidParameter("antagonistic joint parameters out of range");
  }
  if (!(j.q_min < j.q_max) || j.angle < j.q_min || j.angle > j.q_max) {
    throw InvalidParameter("antagonistic joint angle outside its limits");
  }
  validate_motor(a.agonist_motor);
  validate_motor(a.antagonist_motor);
  a.agonist.initial_slack = a.antagonist.initial_slack = 0.0;
  a.agonist.initial_tension = a.antagonist.initial_tension = a.co_contraction_tension;
  if (a.co_contraction_tension == 0.0) {
    a.agonist.initial_tension = a.antagonist.initial_tension = 0.0;
  }
  initialize_channel(a.agonist, a.agonist_motor.spool_radius * a.agonist_motor.spool_angle, 1.0,
                     j.spool_radius, j.angle, true);
  initialize_channel(a.antagonist,
                     a.antagonist_motor.spool_radius * a.antagonist_motor.spool_angle, -1.0,
                     j.spool_radius, j.angle, true);
  a.agonist_motor.torque_estimate = a.agonist.motor_tension * a.agonist_motor.spool_radius;
  a.antagonist_motor.torque_estimate =
      a.antagonist.motor_tension * a.antagonist_motor.spool_radius;
  antagonistic_.push_back(std::move(a));
  antagonistic_delay_.emplace_back();
  antagonistic_delay_.emplace_back();
  return antagonistic_.size() - 1;
}

double Plant::delayed(DelayLine& line, double wound, double dt) {
  const auto lag = static_cast<std::size_t>(std::lround(options_.transport_delay / dt));
  if (lag == 0) return wound;
  if (line.samples.empty()) line.samples.assign(lag, wound);
  line.samples.push_back(wound);
  while (line.samples.size() > lag + 1) line.samples.pop_front();
  return line.samples.front();
}

void Plant::step(std::span<const MotorCommand> commands, double t, double dt) {
  if (!(dt > 0.0)) throw InvalidParameter("dt must be > 0");
  if (commands.size() != motor_count()) {
    throw InvalidParameter(
        fmt::format("expected {} motor commands, got {}", motor_count(), commands.size()));
  }
  for (std::size_t i = 0; i < spring_.size(); ++i) step_spring(i, commands[i], t, dt);
  for (std::size_t i = 0; i < antagonistic_.size(); ++i) {
    const std::size_t base = spring_.size() + 2 * i;
    step_antagonistic(i, commands[base], commands[base + 1], t, dt);
  }
}

namespace {

// Geometry of a channel at the end of the step, before the joint moves.
// Returns wound + hub + (path - creep) + joint_segment_length - rest, i.e. the
// stretch the tendon would have at q = 0.
double refresh_geometry(TendonChannel& ch, double wound_eff, double t_end, double dt,
                        const CreepModel& creep) {
  ch.wound = wound_eff;
  ch.phi = ch.bend_profile ? ch.bend_profile->phi(t_end) : ch.path.accumulated_bend();
  ch.path_length = tendon_path_length(ch.path.total_length(), ch.phi, ch.spec);
  if (creep.enabled) {
    const double target = creep.compliance * ch.motor_tension;
    ch.creep = target + (ch.creep - target) * std::exp(-dt / creep.time_constant);
  }
  return ch.wound + ch.hub_free_length + (ch.path_length - ch.creep) + ch.joint_segment_length -
         ch.rest_length;
}

// Slack/stretch/tension of an extensible channel at the final joint angle.
void settle_extensible(TendonChannel& ch, double base, double sign, double r, double q, int dir) {
  ch.joint_segment = ch.joint_segment_length - sign * r * q;
  const double delta = base - sign * r * q;
  ch.stretch = std::max(0.0, delta);
  ch.slack = std::max(0.0, -delta);
  ch.sliding = sliding_for(sign, dir, ch.sliding);
  ch.motor_tension = *ch.spec.axial_stiffness * ch.stretch / ch.rest_length;
  ch.joint_tension =
      ch.slack > 0.0 ? 0.0 : ch.motor_tension * factor_for(ch.sliding, ch.spec.friction_coefficient * ch.phi);
}

}  // namespace

void Plant::step_spring(std::size_t i, const MotorCommand& cmd, double t, double dt) {
  auto& a = spring_[i];
  auto& j = a.joint;
  auto& ch = a.tendon;
  auto& m = a.motor;
  const bool quasi = options_.mode == PlantOptions::Mode::QuasiStatic;
  const double r = j.spool_radius;

  const double previous_angle = m.spool_angle;
  double next_angle = advance_motor(m, cmd, dt);
  double wound_eff = delayed(spring_delay_[i], m.spool_radius * next_angle, dt);
  const double base = refresh_geometry(ch, wound_eff, t + dt, dt, options_.creep);
  double base_eff = base;

  if (ch.spec.inextensible()) {
    // The joint cannot be pulled past its upper stop by a rigid tendon: the
    // motor stalls there instead.
    const double excess = base - r * j.q_max;
    if (excess > 0.0) {
      const double stall_angle = next_angle - excess / m.spool_radius;
      next_angle = std::max(std::min(next_angle, stall_angle), std::min(previous_angle, next_angle));
      ch.wound -= excess;
      base_eff = base - excess;
    }
  }
  m.velocity = (next_angle - previous_angle) / dt;
  m.spool_angle = next_angle;

  const JointTerms terms{r,
                         quasi ? 0.0 : j.inertia,
                         quasi ? 0.0 : j.damping,
                         j.spring_stiffness,
                         j.spring_preload,
                         j.stiction_torque,
                         j.angle,
                         quasi ? 0.0 : j.velocity};
  const double mu_phi = ch.spec.friction_coefficient * ch.phi;

  if (a.locked) {
    const int dir = m.velocity > 0.0 ? 1 : (m.velocity < 0.0 ? -1 : 0);
    settle_extensible(ch, base_eff, 1.0, r, j.angle, dir);
    j.velocity = 0.0;
  } else if (ch.spec.inextensible()) {
    const JointSolution free = solve_joint(terms, {}, dt);
    const double q_taut = base_eff / r;
    double q_new = j.angle + dt * free.v;
    double v_new = free.v;
    int dir = free.dir;
    bool constrained = false;
    double tension = 0.0;
    if (q_new < q_taut) {
      constrained = true;
      q_new = q_taut;
      v_new = (q_taut - j.angle) / dt;
      const bool still = std::abs(q_taut - j.angle) <= 1e-14;
      dir = still ? -1 : (v_new > 0.0 ? 1 : -1);
      if (still) v_new = 0.0;
      tension = std::max(0.0, residual(terms, {}, dir, dt, v_new) / (dt * r));
      if (still) dir = 0;
    }
    if (q_new > j.q_max) {
      q_new = j.q_max;
      v_new = 0.0;
    } else if (q_new < j.q_min) {
      q_new = j.q_min;
      v_new = 0.0;
      if (q_new > q_taut) constrained = false;
    }
    j.angle = q_new;
    j.velocity = quasi ? 0.0 : v_new;
    ch.joint_segment = ch.joint_segment_length - r * q_new;
    const double delta = base_eff - r * q_new;
    ch.stretch = 0.0;
    ch.slack = constrained ? 0.0 : std::max(0.0, -delta);
    ch.sliding = sliding_for(1.0, dir, ch.sliding);
    ch.joint_tension = constrained ? tension : 0.0;
    ch.motor_tension = ch.joint_tension / factor_for(ch.sliding, mu_phi);
  } else {
    const std::array<ChannelTerm, 1> ct{
        ChannelTerm{1.0, *ch.spec.axial_stiffness / ch.rest_length, base_eff - r * j.angle,
                    mu_phi}};
    const JointSolution sol = solve_joint(terms, ct, dt);
    double q_new = j.angle + dt * sol.v;
    double v_new = sol.v;
    if (q_new > j.q_max) {
      q_new = j.q_max;
      v_new = 0.0;
    } else if (q_new < j.q_min) {
      q_new = j.q_min;
      v_new = 0.0;
    }
    j.angle = q_new;
    j.velocity = quasi ? 0.0 : v_new;
    settle_extensible(ch, base_eff, 1.0, r, q_new, sol.dir);
  }

  m.torque_estimate = ch.motor_tension * m.spool_radius;
  check_finite({j.angle, j.velocity, m.spool_angle, ch.motor_tension, ch.joint_tension},
               "spring-return actuator state");
  check_bookkeeping(ch, options_.bookkeeping_tolerance);
}

void Plant::step_antagonistic(std::size_t i, const MotorCommand& ag_cmd,
                              const MotorCommand& ant_cmd, double t, double dt) {
  auto& a = antagonistic_[i];
  auto& j = a.joint;
  const bool quasi = options_.mode == PlantOptions::Mode::QuasiStatic;
  const double r = j.spool_radius;

  struct Side {
    TendonChannel& ch;
    MotorState& m;
    const MotorCommand& cmd;
    DelayLine& delay;
    double sign;
    double base = 0.0;
  };
  std::array<Side, 2> sides{Side{a.agonist, a.agonist_motor, ag_cmd, antagonistic_delay_[2 * i], 1.0},
                            Side{a.antagonist, a.antagonist_motor, ant_cmd,
                                 antagonistic_delay_[2 * i + 1], -1.0}};
  std::array<ChannelTerm, 2> terms_ch{};
  for (std::size_t k = 0; k < 2; ++k) {
    auto& s = sides[k];
    const double previous = s.m.spool_angle;
    s.m.spool_angle = advance_motor(s.m, s.cmd, dt);
    s.m.velocity = (s.m.spool_angle - previous) / dt;
    const double wound_eff = delayed(s.delay, s.m.spool_radius * s.m.spool_angle, dt);
    s.base = refresh_geometry(s.ch, wound_eff, t + dt, dt, options_.creep);
    terms_ch[k] = ChannelTerm{s.sign, *s.ch.spec.axial_stiffness / s.ch.rest_length,
                              s.base - s.sign * r * j.angle,
                              s.ch.spec.friction_coefficient * s.ch.phi};
  }

  const JointTerms terms{r, quasi ? 0.0 : j.inertia, quasi ? 0.0 : j.damping, 0.0, 0.0,
                         j.stiction_torque, j.angle, quasi ? 0.0 : j.velocity};
  const JointSolution sol = solve_joint(terms, terms_ch, dt);
  double q_new = j.angle + dt * sol.v;
  double v_new = sol.v;
  if (q_new > j.q_max) {
    q_new = j.q_max;
    v_new = 0.0;
  } else if (q_new < j.q_min) {
    q_new = j.q_min;
    v_new = 0.0;
  }
  j.angle = q_new;
  j.velocity = quasi ? 0.0 : v_new;

  for (auto& s : sides) {
    settle_extensible(s.ch, s.base, s.sign, r, q_new, sol.dir);
    s.m.torque_estimate = s.ch.motor_tension * s.m.spool_radius;
    check_bookkeeping(s.ch, options_.bookkeeping_tolerance);
  }
  check_finite({j.angle, j.velocity, a.agonist.motor_tension, a.antagonist.motor_tension},
               "antagonistic actuator state");
}

double Plant::spring_recovery_rate(const SpringReturnJoint& joint, const MotorState& motor) {
  if (!(joint.damping > 0.0)) return kInf;
  const double q_mid = 0.5 * (joint.q_min + joint.q_max);
  const double joint_speed = -joint.spring_torque(q_mid) / joint.damping;
  return joint_speed * joint.spool_radius / motor.spool_radius;
}

double joint_equilibrium_tension(const SpringReturnJoint& joint, double q) {
  return -joint.spring_torque(q) / joint.spool_radius;
}

double fingertip_force(const SpringReturnJoint& joint, double motor_tension, double phi,
                       const TendonSpec& spec, double contact_lever) {
  if (!(motor_tension >= 0.0)) throw InvalidParameter("motor tension must be >= 0");
  if (!(contact_lever > 0.0)) throw InvalidParameter("contact lever must be > 0");
  const double delivered =
      tension_transfer(motor_tension, phi, spec.friction_coefficient, DriveDirection::MotorPulling);
  const double torque = delivered * joint.spool_radius + joint.spring_torque(joint.angle);
  return std::max(0.0, torque / contact_lever);
}

}  // namespace bowden
