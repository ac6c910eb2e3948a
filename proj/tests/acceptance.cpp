// One PASS/FAIL line per acceptance criterion; exits nonzero on any failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/core.h>

#include "bowden/cli.hpp"
#include "bowden/config.hpp"
#include "bowden/estimation.hpp"
#include "bowden/hand.hpp"
#include "bowden/plant.hpp"
#include "bowden/scenarios.hpp"
#include "bowden/transmission.hpp"
#include "bowden/units.hpp"
#include "oracles.hpp"

namespace fs = std::filesystem;
using namespace bowden;

namespace {

const fs::path kConfigDir = BOWDEN_CONFIG_DIR;

struct Outcome {
  bool ok;
  std::string detail;
};

Outcome pass(std::string detail) { return {true, std::move(detail)}; }
Outcome fail(std::string detail) { return {false, std::move(detail)}; }

// 1. Closed-form capstan against stepped integration of dT = mu T dtheta.
Outcome capstan_oracle() {
  std::vector<double> angles;
  for (int i = 1; i <= 16; ++i) angles.push_back(2.0 * std::numbers::pi * i / 16.0);
  double worst = 0.0;
  for (double mu : {0.0, 0.05, 0.2, 0.5}) {
    for (auto dir : {DriveDirection::MotorPulling, DriveDirection::SpringReturning}) {
      // Tension decays away from whichever end drives the sliding.
      const auto decay = oracle::integrate_capstan(10.0, -mu, angles);
      const auto growth = oracle::integrate_capstan(10.0, mu, angles);
      for (std::size_t i = 0; i < angles.size(); ++i) {
        const double t = tension_transfer(10.0, angles[i], mu, dir);
        worst = std::max(worst, std::abs(t - decay[i]) / t);
        // Read the other way: the far end needed to hold 10 N at the drive.
        const double held = 10.0 * 10.0 / t;
        worst = std::max(worst, std::abs(held - growth[i]) / held);
      }
    }
  }
  const std::string d = fmt::format("max relative error {:.3g}", worst);
  return worst <= 1e-6 ? pass(d) : fail(d);
}

// 2. Path-length formula against the offset-arc construction.
Outcome path_length_oracle() {
  const TendonSpec spec{0.001, 0.004, 0.1, 5e4};
  const double e = spec.eccentricity();
  double worst = 0.0;
  for (double ratio : {0.01, 0.1, 0.5}) {
    for (double theta : {0.2, 1.0, 2.5, 4.0, 6.0}) {
      const double rho = e / ratio;
      const SheathPath path({{rho * theta, 1.0 / rho}});
      const double expected = oracle::offset_arc_length(rho, theta, e);
      worst = std::max(worst, std::abs(tendon_path_length(path, spec) - expected) / expected);
    }
  }
  const std::string d = fmt::format("max relative error {:.3g}", worst);
  return worst <= 1e-12 ? pass(d) : fail(d);
}

ScenarioConfig fit_sweep(double noise, std::uint64_t seed) {
  ScenarioConfig c;
  c.kind = ScenarioKind::FrictionSweep;
  c.duration = 1.0;
  c.dt = 1.0;
  c.seed = seed;
  c.friction_sweep.sheaths = {{"PTFE", 0.12}};
  for (int a = 30; a <= 180; a += 30) c.friction_sweep.angles.push_back(deg2rad(a));
  c.friction_sweep.diameters = {0.02};
  c.friction_sweep.load = weight_of(2.0);
  c.friction_sweep.noise = noise;
  return c;
}

// 3. Fit round trip, noiseless and at 5% noise.
Outcome fit_round_trip() {
  const double clean = fit_mu(run_friction_sweep(fit_sweep(0.0, 0))).mu;
  int good = 0;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    const double mu = fit_mu(run_friction_sweep(fit_sweep(0.05, seed))).mu;
    good += std::abs(mu - 0.12) <= 0.05 * 0.12;
  }
  const std::string d =
      fmt::format("noiseless mu {:.12f}, noisy trials within 5%: {}/100", clean, good);
  return std::abs(clean - 0.12) <= 1e-9 && good >= 95 ? pass(d) : fail(d);
}

// 4. Sweep output is increasing and convex in wrap angle.
Outcome sweep_trend() {
  const auto cfg = load_config(kConfigDir / "friction_sweep.json");
  const auto table = run_friction_sweep(cfg);
  const std::size_t na = cfg.friction_sweep.angles.size();
  const std::size_t nd = cfg.friction_sweep.diameters.size();
  int curves = 0;
  for (std::size_t s = 0; s < cfg.friction_sweep.sheaths.size(); ++s) {
    if (!(cfg.friction_sweep.sheaths[s].mu > 0.0)) continue;
    for (std::size_t d = 0; d < nd; ++d) {
      auto at = [&](std::size_t a) { return table[(s * na + a) * nd + d].mean_tension; };
      for (std::size_t a = 1; a < na; ++a) {
        if (!(at(a) > at(a - 1))) return fail(fmt::format("not increasing at curve {}", curves));
      }
      for (std::size_t a = 2; a < na; ++a) {
        if (at(a) - 2.0 * at(a - 1) + at(a - 2) < 0.0) {
          return fail(fmt::format("not convex at curve {}", curves));
        }
      }
      ++curves;
    }
  }
  return curves > 0 ? pass(fmt::format("{} curves", curves)) : fail("no curves");
}

// 5. Long over short sheath peak force.
Outcome fingertip_ratio() {
  const auto cfg = load_config(kConfigDir / "fingertip_force.json");
  const auto records = run_fingertip_force(cfg);
  const double ratio = peak_force_ratio(cfg, records);
  const std::string d = fmt::format("ratio {:.12f}, target {:.12f}, peaks {:.4f} N / {:.4f} N",
                                    ratio, 25.0 / 33.0, *records.front().metrics.peak_force,
                                    *records.back().metrics.peak_force);
  return std::abs(ratio - 25.0 / 33.0) <= 1e-6 ? pass(d) : fail(d);
}

// 6. Step response with the shipped config.
Outcome step_response() {
  const auto cfg = load_config(kConfigDir / "step_response.json");
  const auto r = run_step_response(cfg);
  const double sse = rad2deg(*r.metrics.steady_state_error);
  if (!r.metrics.onset_delay) return fail(fmt::format("no onset, sse {:.3g} deg", sse));
  const double onset = *r.metrics.onset_delay;
  const std::string d = fmt::format("steady-state error {:.3g} deg, onset {:.4f} s", sse, onset);
  return sse < 0.1 && std::abs(onset - 0.2) <= 2.0 * cfg.dt + 1e-12 ? pass(d) : fail(d);
}

// 7. Sine tracking: moving arm no better than stationary, exact extrema.
Outcome sine_tracking() {
  const auto cfg = load_config(kConfigDir / "sine_tracking.json");
  if (cfg.duration < 20.0) return fail("duration below 20 s");
  const auto records = run_sine_tracking(cfg, 2);
  double lo = 1e9;
  double hi = -1e9;
  for (const auto& s : records[0].series) {
    lo = std::min(lo, s.q_ref);
    hi = std::max(hi, s.q_ref);
  }
  const double still = rad2deg(*records[0].metrics.rms_error);
  const double moving = rad2deg(*records[1].metrics.rms_error);
  const std::string d = fmt::format("rms stationary {:.4f} deg, moving {:.4f} deg, extrema {} / {}",
                                    still, moving, rad2deg(lo), rad2deg(hi));
  const bool extrema = lo == deg2rad(25.0) && hi == deg2rad(55.0);
  return moving >= still && extrema ? pass(d) : fail(d);
}

// 8. Joint table structure.
Outcome hand_table() {
  const HandModel hand = default_hand();
  const auto joints = hand.joints();
  if (joints.size() != 21) return fail(fmt::format("{} joints", joints.size()));
  int antagonistic = 0;
  for (const auto& j : joints) antagonistic += j.actuation == Actuation::Antagonistic;
  const auto& first = joints[hand.index_of(Finger::Thumb, JointName::CMC1_rotation)];
  if (antagonistic != 1 || first.actuation != Actuation::Antagonistic) {
    return fail("antagonistic joint is not thumb CMC1 alone");
  }
  struct Cell {
    Finger f;
    JointName j;
    double deg;
  };
  std::vector<Cell> cells{
      {Finger::Thumb, JointName::CMC1_rotation, 90}, {Finger::Thumb, JointName::CMC2_AA, 90},
      {Finger::Thumb, JointName::CMC3_FE, 90},       {Finger::Thumb, JointName::MCP_FE, 85},
      {Finger::Thumb, JointName::IP_FE, 90},         {Finger::Index, JointName::MCP_AA, 80},
      {Finger::Middle, JointName::MCP_AA, 100},      {Finger::Ring, JointName::MCP_AA, 95},
      {Finger::Little, JointName::MCP_AA, 85},
  };
  for (auto f : {Finger::Index, Finger::Middle, Finger::Ring, Finger::Little}) {
    cells.push_back({f, JointName::MCP_FE, 90});
    cells.push_back({f, JointName::PIP_FE, 85});
    cells.push_back({f, JointName::DIP_FE, 90});
  }
  for (const auto& c : cells) {
    if (joints[hand.index_of(c.f, c.j)].range_max != deg2rad(c.deg)) {
      return fail(fmt::format("{} {} range", to_string(c.f), to_string(c.j)));
    }
  }
  return pass(fmt::format("{} cells, {} tendon channels", cells.size(), hand.channel_count()));
}

// 9. Length bookkeeping over a long random run.
Outcome bookkeeping() {
  Plant plant;
  SpringReturnActuator a;
  a.tendon.spec = {0.001, 0.004, 0.1, 5e4};
  a.tendon.path = SheathPath::uniform(1.0, 2.0);
  a.tendon.bend_profile = ArmDisturbance(ArmDisturbance::Sinusoid{2.0, 0.5, 0.2});
  plant.add(a);
  SpringReturnActuator rigid = a;
  rigid.tendon.spec.axial_stiffness.reset();
  rigid.joint.angle = 0.4;
  plant.add(rigid);
  AntagonisticActuator b;
  b.agonist.spec = b.antagonist.spec = {0.001, 0.004, 0.12, 5e4};
  b.agonist.path = b.antagonist.path = SheathPath::uniform(0.8, 1.5);
  b.joint.angle = 0.7;
  plant.add(b);

  std::mt19937_64 rng(20240601);
  std::uniform_real_distribution<double> speed(-4.7, 4.7);
  std::uniform_int_distribution<int> hold(10, 400);
  std::vector<MotorCommand> c(plant.motor_count(), MotorCommand::velocity(0.0));
  std::vector<int> until(c.size(), 0);
  const double dt = 1e-3;
  const int steps = 60000;
  double worst = 0.0;
  auto check_tendon = [&](const TendonChannel& t) {
    worst = std::max(worst, std::abs(t.bookkeeping_residual()));
    return t.slack >= 0.0;
  };
  auto in_range = [](const auto& j) { return j.angle >= j.q_min && j.angle <= j.q_max; };
  for (int k = 0; k < steps; ++k) {
    for (std::size_t m = 0; m < c.size(); ++m) {
      if (k >= until[m]) {
        c[m] = MotorCommand::velocity(speed(rng));
        until[m] = k + hold(rng);
      }
    }
    plant.step(c, k * dt, dt);
    for (const auto& s : plant.spring_return()) {
      if (!check_tendon(s.tendon)) return fail(fmt::format("negative slack at step {}", k));
      if (!in_range(s.joint)) return fail(fmt::format("joint out of range at step {}", k));
    }
    for (const auto& s : plant.antagonistic()) {
      if (!check_tendon(s.agonist) || !check_tendon(s.antagonist)) {
        return fail(fmt::format("negative slack at step {}", k));
      }
      if (!in_range(s.joint)) return fail(fmt::format("joint out of range at step {}", k));
    }
    if (worst > 1e-9) return fail(fmt::format("residual {:.3g} m at step {}", worst, k));
  }
  return pass(fmt::format("{} steps, max residual {:.3g} m", steps, worst));
}

std::string read_bytes(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// 10. Byte-identical reruns of every shipped scenario.
Outcome determinism() {
  const fs::path root = fs::temp_directory_path() / "bowden_acceptance";
  std::ostringstream sink;
  int compared = 0;
  for (const char* name : {"friction_sweep.json", "fingertip_force.json", "step_response.json",
                           "sine_tracking.json"}) {
    std::string first;
    for (int pass_no = 0; pass_no < 2; ++pass_no) {
      cli::RunOptions opt;
      opt.out_dir = root / fmt::format("{}_{}", name, pass_no);
      opt.quiet = true;
      fs::remove_all(opt.out_dir);
      if (cli::cmd_run(kConfigDir / name, opt, sink, sink) != cli::kOk) {
        return fail(fmt::format("{} failed: {}", name, sink.str()));
      }
      const std::string csv = read_bytes(opt.out_dir / "series.csv");
      if (csv.empty()) return fail(fmt::format("{} wrote no csv", name));
      if (pass_no == 0) {
        first = csv;
      } else if (csv != first) {
        return fail(fmt::format("{} differs between runs", name));
      }
    }
    ++compared;
  }
  fs::remove_all(root);
  return pass(fmt::format("{} scenarios identical", compared));
}

// 11. Quasi-static drift under a held motor and a bend step.
Outcome quasi_static_drift() {
  Plant plant({PlantOptions::Mode::QuasiStatic});
  SpringReturnActuator a;
  a.tendon.spec = {0.001, 0.004, 0.1, std::nullopt};
  a.tendon.path = SheathPath::uniform(1.0, 1.0);
  a.joint.spool_radius = 0.01;
  a.joint.angle = 0.6;
  a.tendon.bend_profile = ArmDisturbance(ArmDisturbance::Step{1.0, 0.5, 0.1});
  plant.add(a);
  std::vector<MotorCommand> hold{MotorCommand::velocity(0.0)};
  const double dt = 1e-3;
  for (int k = 0; k < 500; ++k) plant.step(hold, k * dt, dt);
  const double drift = plant.spring_return()[0].joint.angle - 0.6;
  const std::string d = fmt::format("drift {:.12f} rad", drift);
  return std::abs(drift - (-0.075)) <= 1e-9 ? pass(d) : fail(d);
}

struct Criterion {
  const char* name;
  double budget;  // s
  std::function<Outcome()> run;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {"capstan oracle equivalence", 1.0, capstan_oracle},
      {"path-length geometric oracle", 1.0, path_length_oracle},
      {"exponential fit round trip", 5.0, fit_round_trip},
      {"sweep trend monotone and convex", 1.0, sweep_trend},
      {"fingertip force ratio", 10.0, fingertip_ratio},
      {"step response", 10.0, step_response},
      {"sine tracking ordinal", 30.0, sine_tracking},
      {"joint table conformance", 1.0, hand_table},
      {"plant bookkeeping", 30.0, bookkeeping},
      {"determinism", 60.0, determinism},
      {"quasi-static drift", 5.0, quasi_static_drift},
  };
  int failures = 0;
  int index = 0;
  for (const auto& c : criteria) {
    ++index;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = fail(std::string("exception: ") + e.what());
    }
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (o.ok && elapsed > c.budget) {
      o = fail(fmt::format("{} (took {:.2f} s, budget {:.0f} s)", o.detail, elapsed, c.budget));
    }
    failures += !o.ok;
    fmt::print("{} AC{:<2} {}: {} [{:.3f} s]\n", o.ok ? "PASS" : "FAIL", index, c.name, o.detail,
               elapsed);
  }
  fmt::print("{}/{} criteria passed\n", criteria.size() - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
