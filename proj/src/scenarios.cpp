#include "bowden/scenarios.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <functional>
#include <mutex>
#include <numbers>
#include <optional>
#include <random>
#include <thread>

#include <fmt/core.h>

#include "bowden/control.hpp"
#include "bowden/errors.hpp"
#include "bowden/plant.hpp"
#include "bowden/svg.hpp"
#include "bowden/units.hpp"

namespace bowden {

namespace {

// Runs fn(0..n-1) on up to `jobs` threads; results land in index order so the
// output does not depend on scheduling. The first failing index rethrows.
template <class F>
auto parallel_map(std::size_t n, int jobs, F fn) -> std::vector<decltype(fn(std::size_t{}))> {
  using T = decltype(fn(std::size_t{}));
  std::vector<std::optional<T>> slots(n);
  std::vector<std::exception_ptr> errors(n);
  const auto workers = static_cast<std::size_t>(std::clamp<long>(jobs, 1, static_cast<long>(std::max<std::size_t>(n, 1))));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) slots[i].emplace(fn(i));
  } else {
    std::atomic<std::size_t> next{0};
    auto work = [&]() {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          slots[i].emplace(fn(i));
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    };
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
    for (const auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }
  std::vector<T> out;
  out.reserve(n);
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

std::mt19937_64 make_rng(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  return std::mt19937_64(seq);
}

double target_range_max(const ScenarioConfig& cfg) {
  const HandModel hand = default_hand();
  return hand.joints()[hand.index_of(cfg.finger, cfg.joint)].range_max;
}

TendonSpec tendon_spec(const ScenarioConfig& cfg) {
  const auto& t = cfg.plant.tendon;
  return {t.tendon_diameter, t.sheath_inner_diameter, t.friction_coefficient, t.axial_stiffness};
}

PlantOptions plant_options(const ScenarioConfig& cfg) {
  PlantOptions o;
  o.mode = cfg.plant.quasi_static ? PlantOptions::Mode::QuasiStatic : PlantOptions::Mode::Dynamic;
  o.transport_delay = cfg.plant.transport_delay;
  o.creep = {cfg.plant.creep.enabled, cfg.plant.creep.time_constant, cfg.plant.creep.compliance};
  return o;
}

SpringReturnActuator make_actuator(const ScenarioConfig& cfg, double sheath_length, double bend) {
  const auto& p = cfg.plant;
  SpringReturnActuator a;
  a.joint.spool_radius = p.joint.spool_radius;
  a.joint.spring_stiffness = p.joint.spring_stiffness;
  a.joint.spring_preload = p.joint.spring_preload;
  a.joint.damping = p.joint.damping;
  a.joint.inertia = p.joint.inertia;
  a.joint.stiction_torque = p.joint.stiction_torque;
  a.joint.q_min = 0.0;
  a.joint.q_max = target_range_max(cfg);
  a.tendon.spec = tendon_spec(cfg);
  a.tendon.path = SheathPath::uniform(sheath_length, bend);
  a.tendon.hub_free_length = p.hub_free_length;
  a.tendon.joint_segment_length = p.joint_segment_length;
  a.motor.spool_radius = p.motor.spool_radius;
  a.motor.max_speed = p.motor.max_speed;
  return a;
}

std::size_t step_count(const ScenarioConfig& cfg) {
  return static_cast<std::size_t>(std::llround(cfg.duration / cfg.dt)) + 1;
}

// Encoder quantization and load-current noise, when enabled.
class Sensors {
 public:
  Sensors(const NoiseConfig& noise, std::mt19937_64 rng) : noise_(noise), rng_(std::move(rng)) {}

  double angle(double q) const {
    if (!noise_.enabled || noise_.encoder_resolution <= 0.0) return q;
    return noise_.encoder_resolution * std::round(q / noise_.encoder_resolution);
  }

  double torque(double tau) {
    if (!noise_.enabled || noise_.tension_noise <= 0.0) return tau;
    return tau * (1.0 + noise_.tension_noise * normal_(rng_));
  }

 private:
  NoiseConfig noise_;
  std::mt19937_64 rng_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

struct TrackingRun {
  std::string variant;
  std::uint64_t stream;
  std::function<double(double)> reference;  // absolute joint angle at record time
  bool relative_to_hold = false;            // reference is added to the post-pretension angle
  double pre_roll = 0.0;
  std::optional<ArmDisturbance> arm;        // installed at record time 0
};

RunRecord run_tracking(const ScenarioConfig& cfg, const TrackingRun& run) {
  const double dt = cfg.dt;
  Plant plant(plant_options(cfg));
  plant.add(make_actuator(cfg, cfg.plant.sheath.length, cfg.plant.sheath.bend));
  const auto& k = cfg.controller;
  JointController controller(
      PidGains{k.kp, k.ki, k.kd, k.integral_clamp, k.output_clamp},
      AnomalyConfig{k.anomaly.current_spike_threshold, k.anomaly.encoder_motion_floor,
                    k.anomaly.window},
      SlackRecoveryConfig{k.slack_recovery.threshold, k.slack_recovery.gain,
                          k.slack_recovery.max_speed},
      k.release_speed_limit);

  PretensionOptions pre;
  pre.pretension_angle = k.pretension.angle;
  pre.wind_speed = k.pretension.wind_speed;
  pre.dt = dt;
  pre.horizon = k.pretension.horizon;
  pre.settle_time = k.pretension.settle_time;
  const auto pre_steps = static_cast<long>(std::llround(run.pre_roll / dt));
  // The pretension phase runs before the pre-roll; the bend is constant there
  // so the plant times passed in only need to precede the record.
  pretension_init(plant, 0, controller, pre,
                  -static_cast<double>(pre_steps) * dt - k.pretension.horizon);

  Sensors sensors(cfg.noise, make_rng(cfg.seed, run.stream));
  const double q_max = target_range_max(cfg);
  const double hold = sensors.angle(plant.spring_return()[0].joint.angle);

  RunRecord rec;
  rec.variant = run.variant;
  rec.dt = dt;
  const std::size_t n = step_count(cfg);
  rec.series.reserve(n);
  std::array<MotorCommand, 1> cmd{};
  double q_prev = hold;
  for (long i = -pre_steps; i < static_cast<long>(n); ++i) {
    const double t = static_cast<double>(i) * dt;
    if (i == 0 && run.arm) plant.set_bend_profile(0, run.arm);
    const auto& a = plant.spring_return()[0];
    const double q_meas = sensors.angle(a.joint.angle);
    const double torque = sensors.torque(a.motor.torque_estimate);
    const double raw_ref = run.relative_to_hold ? hold + run.reference(t) : run.reference(t);
    const double q_ref = std::clamp(raw_ref, 0.0, q_max);
    ControlInputs in{q_ref, q_meas, a.motor.spool_angle, a.tendon.phi, torque,
                     (q_meas - q_prev) / dt};
    const double u = controller.update(in, dt);
    if (controller.state().mode == ControllerMode::Faulted) {
      throw FaultedController(fmt::format(
          "{}: anomaly stop at t = {:.4g} s (motor load {:.3g} N m with joint at rest)",
          run.variant, t, torque));
    }
    if (i >= 0) {
      rec.series.push_back({t, q_ref, q_meas, a.motor.spool_angle, u, torque, a.tendon.slack,
                            a.tendon.phi, a.tendon.joint_tension, 0.0});
    }
    q_prev = q_meas;
    cmd[0] = MotorCommand::velocity(u);
    plant.step(cmd, t, dt);
  }
  rec.metrics = compute_metrics(cfg, rec);
  return rec;
}

RunRecord run_press(const ScenarioConfig& cfg, const FingertipSheath& sheath, std::uint64_t stream) {
  const auto& f = cfg.fingertip;
  const double dt = cfg.dt;
  Plant plant(plant_options(cfg));
  SpringReturnActuator act = make_actuator(cfg, sheath.length, sheath.bend);
  act.joint.angle = std::min(f.joint_angle, act.joint.q_max);
  act.locked = true;
  plant.add(std::move(act));

  Sensors sensors(cfg.noise, make_rng(cfg.seed, stream));
  const auto& a0 = plant.spring_return()[0];
  const double theta0 = a0.motor.spool_angle;
  const double rest = a0.tendon.rest_length;
  const double ea = *a0.tendon.spec.axial_stiffness;
  const double radius = a0.motor.spool_radius;
  auto motor_target = [&](double t) {
    const double tension = f.peak_tension * std::min(1.0, t / f.ramp_time);
    return theta0 + tension * rest / ea / radius;
  };

  RunRecord rec;
  rec.variant = sheath.name;
  rec.dt = dt;
  const std::size_t n = step_count(cfg);
  rec.series.reserve(n);
  std::array<MotorCommand, 1> cmd{};
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) * dt;
    const auto& a = plant.spring_return()[0];
    const double target = motor_target(t + dt);
    const double force = fingertip_force(a.joint, a.tendon.motor_tension, a.tendon.phi,
                                         a.tendon.spec, f.contact_lever);
    rec.series.push_back({t, a.joint.angle, sensors.angle(a.joint.angle), a.motor.spool_angle,
                          target, sensors.torque(a.motor.torque_estimate), a.tendon.slack,
                          a.tendon.phi, a.tendon.joint_tension, force});
    cmd[0] = MotorCommand::position(target);
    plant.step(cmd, t, dt);
  }
  rec.metrics = compute_metrics(cfg, rec);
  return rec;
}

}  // namespace

std::vector<FrictionSample> run_friction_sweep(const ScenarioConfig& cfg, int jobs) {
  if (cfg.kind != ScenarioKind::FrictionSweep) throw ScenarioError("not a friction sweep config");
  const auto& s = cfg.friction_sweep;
  const std::size_t na = s.angles.size();
  const std::size_t nd = s.diameters.size();
  const std::size_t total = s.sheaths.size() * na * nd;
  return parallel_map(total, jobs, [&](std::size_t idx) {
    const auto& sheath = s.sheaths[idx / (na * nd)];
    const double angle = s.angles[(idx / nd) % na];
    const double diameter = s.diameters[idx % nd];
    FrictionSample out{sheath.name, angle, diameter, 0.0, 0.0, s.load};
    // The disk diameter does not enter the capstan model.
    const double mean = s.load + friction_loss(s.load, angle, sheath.mu);
    if (s.noise <= 0.0) {
      out.mean_tension = mean;
      return out;
    }
    auto rng = make_rng(cfg.seed, idx);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<double> trace(static_cast<std::size_t>(s.trace_samples));
    for (auto& v : trace) v = mean * (1.0 + s.noise * normal(rng));
    const TraceStats stats = trace_stats(trace);
    out.mean_tension = stats.mean;
    out.std_tension = stats.std;
    return out;
  });
}

std::vector<RunRecord> run_fingertip_force(const ScenarioConfig& cfg, int jobs) {
  if (cfg.kind != ScenarioKind::FingertipForce) throw ScenarioError("not a fingertip config");
  return parallel_map(cfg.fingertip.sheaths.size(), jobs, [&](std::size_t i) {
    return run_press(cfg, cfg.fingertip.sheaths[i], i);
  });
}

double peak_force_ratio(const ScenarioConfig& cfg, std::span<const RunRecord> records) {
  const auto& sh = cfg.fingertip.sheaths;
  if (records.size() != sh.size() || sh.empty()) throw ScenarioError("one record per sheath expected");
  std::size_t longest = 0;
  std::size_t shortest = 0;
  for (std::size_t i = 1; i < sh.size(); ++i) {
    if (sh[i].length > sh[longest].length) longest = i;
    if (sh[i].length < sh[shortest].length) shortest = i;
  }
  const double denom = peak_force(records[shortest].series);
  if (!(denom > 0.0)) throw ScenarioError("shortest sheath produced no force");
  return peak_force(records[longest].series) / denom;
}

double sine_reference(const SineConfig& sine, double t) {
  // Blend weights keep both extrema exact in floating point.
  const double w = 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * sine.frequency * t));
  return sine.low * (1.0 - w) + sine.high * w;
}

RunRecord run_step_response(const ScenarioConfig& cfg) {
  if (cfg.kind != ScenarioKind::StepResponse) throw ScenarioError("not a step-response config");
  TrackingRun run;
  run.variant = "step";
  run.stream = 0;
  run.relative_to_hold = true;
  const StepConfig st = cfg.step;
  run.reference = [st](double t) { return t >= st.step_time ? st.amplitude : 0.0; };
  return run_tracking(cfg, run);
}

std::vector<RunRecord> run_sine_tracking(const ScenarioConfig& cfg, int jobs) {
  if (cfg.kind != ScenarioKind::SineTracking) throw ScenarioError("not a sine-tracking config");
  const SineConfig sine = cfg.sine;
  return parallel_map(2, jobs, [&](std::size_t i) {
    TrackingRun run;
    run.variant = i == 0 ? "stationary" : "moving";
    // Both variants see the same noise stream.
    run.stream = 0;
    run.pre_roll = sine.pre_roll;
    run.reference = [sine](double t) { return sine_reference(sine, t); };
    if (i == 1) {
      run.arm = ArmDisturbance(
          ArmDisturbance::Sinusoid{sine.arm.phi0, sine.arm.amplitude, sine.arm.frequency});
    }
    return run_tracking(cfg, run);
  });
}

RunMetrics compute_metrics(const ScenarioConfig& cfg, const RunRecord& record) {
  RunMetrics m;
  switch (cfg.kind) {
    case ScenarioKind::StepResponse:
      m.steady_state_error = steady_state_error(record.series, cfg.step.steady_fraction);
      m.onset_delay = onset_delay(record.series, cfg.step.step_time, cfg.step.motion_floor);
      break;
    case ScenarioKind::SineTracking:
      m.rms_error = rms_error(record.series);
      break;
    case ScenarioKind::FingertipForce:
      m.peak_force = peak_force(record.series);
      break;
    case ScenarioKind::FrictionSweep:
      break;
  }
  return m;
}

namespace {

nlohmann::json metrics_json(const RunMetrics& m) {
  nlohmann::json j = nlohmann::json::object();
  if (m.steady_state_error) {
    j["steady_state_error_rad"] = *m.steady_state_error;
    j["steady_state_error_deg"] = rad2deg(*m.steady_state_error);
  }
  if (m.onset_delay) j["onset_delay_s"] = *m.onset_delay;
  if (m.rms_error) {
    j["rms_error_rad"] = *m.rms_error;
    j["rms_error_deg"] = rad2deg(*m.rms_error);
  }
  if (m.peak_force) j["peak_force_N"] = *m.peak_force;
  return j;
}

}  // namespace

ScenarioResult run_scenario(const ScenarioConfig& cfg, int jobs) {
  validate(cfg);
  ScenarioResult r{cfg.kind, {}, {}, nlohmann::json::object()};
  r.summary["kind"] = std::string(to_string(cfg.kind));
  r.summary["seed"] = cfg.seed;
  switch (cfg.kind) {
    case ScenarioKind::FrictionSweep: {
      r.sweep = run_friction_sweep(cfg, jobs);
      nlohmann::json fits = nlohmann::json::object();
      for (const auto& sheath : cfg.friction_sweep.sheaths) {
        std::vector<FrictionSample> mine;
        for (const auto& s : r.sweep) {
          if (s.sheath_type == sheath.name) mine.push_back(s);
        }
        try {
          const FitResult fit = fit_mu(mine);
          fits[sheath.name] = {{"mu", fit.mu},
                               {"r_squared", fit.r_squared},
                               {"standard_error_mu", fit.standard_error_mu},
                               {"configured_mu", sheath.mu}};
        } catch (const DegenerateData& e) {
          fits[sheath.name] = {{"error", e.what()}, {"configured_mu", sheath.mu}};
        }
      }
      r.summary["fits"] = fits;
      nlohmann::json cells = nlohmann::json::array();
      for (const auto& c : summarize_sweep(r.sweep)) {
        cells.push_back({{"sheath_type", c.sheath_type},
                         {"wrap_angle_deg", rad2deg(c.wrap_angle)},
                         {"disk_diameter_mm", c.disk_diameter * 1e3},
                         {"mean_friction_N", c.mean_friction},
                         {"std_friction_N", c.std_friction}});
      }
      r.summary["table"] = cells;
      break;
    }
    case ScenarioKind::FingertipForce:
      r.records = run_fingertip_force(cfg, jobs);
      r.summary["peak_force_ratio"] = peak_force_ratio(cfg, r.records);
      break;
    case ScenarioKind::StepResponse:
      r.records.push_back(run_step_response(cfg));
      break;
    case ScenarioKind::SineTracking: {
      r.records = run_sine_tracking(cfg, jobs);
      const double still = *r.records[0].metrics.rms_error;
      const double moving = *r.records[1].metrics.rms_error;
      r.summary["rms_difference_rad"] = moving - still;
      r.summary["rms_difference_deg"] = rad2deg(moving - still);
      break;
    }
  }
  if (!r.records.empty()) {
    nlohmann::json runs = nlohmann::json::object();
    for (const auto& rec : r.records) runs[rec.variant] = metrics_json(rec.metrics);
    r.summary["runs"] = runs;
  }
  return r;
}

std::string plot_result(const ScenarioConfig& cfg, const ScenarioResult& result) {
  std::vector<PlotSeries> series;
  switch (cfg.kind) {
    case ScenarioKind::FrictionSweep: {
      // Friction against wrap angle at the first diameter, with the fit.
      const double d0 = cfg.friction_sweep.diameters.front();
      for (const auto& sheath : cfg.friction_sweep.sheaths) {
        PlotSeries pts{sheath.name, {}, {}, false, true};
        std::vector<FrictionSample> mine;
        for (const auto& s : result.sweep) {
          if (s.sheath_type != sheath.name) continue;
          mine.push_back(s);
          if (s.disk_diameter != d0) continue;
          pts.x.push_back(rad2deg(s.wrap_angle));
          pts.y.push_back(s.mean_tension - s.load);
        }
        series.push_back(pts);
        try {
          const double mu = fit_mu(mine).mu;
          PlotSeries fit{sheath.name + " fit", {}, {}, true, false};
          const double top = *std::max_element(cfg.friction_sweep.angles.begin(),
                                                cfg.friction_sweep.angles.end());
          for (int i = 0; i <= 60; ++i) {
            const double a = top * i / 60.0;
            fit.x.push_back(rad2deg(a));
            fit.y.push_back(friction_loss(cfg.friction_sweep.load, a, mu));
          }
          series.push_back(std::move(fit));
        } catch (const Error&) {
          // Too few angles to fit; points only.
        }
      }
      return line_plot("Friction vs. wrap angle", "wrap angle (deg)", "friction (N)", series);
    }
    case ScenarioKind::FingertipForce:
      for (const auto& rec : result.records) {
        PlotSeries s{rec.variant, {}, {}, false, false};
        for (const auto& row : rec.series) {
          s.x.push_back(row.t);
          s.y.push_back(row.fingertip_force);
        }
        series.push_back(std::move(s));
      }
      return line_plot("Fingertip force", "time (s)", "force (N)", series);
    case ScenarioKind::StepResponse:
    case ScenarioKind::SineTracking:
      for (std::size_t k = 0; k < result.records.size(); ++k) {
        const auto& rec = result.records[k];
        if (k == 0) {
          PlotSeries ref{"reference", {}, {}, true, false};
          for (const auto& row : rec.series) {
            ref.x.push_back(row.t);
            ref.y.push_back(rad2deg(row.q_ref));
          }
          series.push_back(std::move(ref));
        }
        PlotSeries s{rec.variant, {}, {}, false, false};
        for (const auto& row : rec.series) {
          s.x.push_back(row.t);
          s.y.push_back(rad2deg(row.q_meas));
        }
        series.push_back(std::move(s));
      }
      return line_plot(cfg.kind == ScenarioKind::StepResponse ? "Step response" : "Sine tracking",
                       "time (s)", "joint angle (deg)", series);
  }
  return {};
}

}  // namespace bowden
