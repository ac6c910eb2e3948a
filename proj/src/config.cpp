#include "bowden/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include <fmt/core.h>

#include "bowden/errors.hpp"
#include "bowden/units.hpp"

namespace bowden {

using nlohmann::json;

namespace {

enum class Dim {
  None,
  Angle,
  Length,
  Force,
  Time,
  Frequency,
  AngularRate,
  Torque,
  RotStiffness,
  RotDamping,
  Inertia,
  Compliance,
};

struct Unit {
  std::string_view name;
  Dim dim;
  double scale;
};

constexpr double kPi = 3.14159265358979323846;

constexpr Unit kUnits[] = {
    {"%", Dim::None, 0.01},
    {"rad", Dim::Angle, 1.0},
    {"mrad", Dim::Angle, 1e-3},
    {"deg", Dim::Angle, kPi / 180.0},
    {"m", Dim::Length, 1.0},
    {"cm", Dim::Length, 1e-2},
    {"mm", Dim::Length, 1e-3},
    {"um", Dim::Length, 1e-6},
    {"N", Dim::Force, 1.0},
    {"mN", Dim::Force, 1e-3},
    {"kN", Dim::Force, 1e3},
    {"kgf", Dim::Force, kStandardGravity},
    {"s", Dim::Time, 1.0},
    {"ms", Dim::Time, 1e-3},
    {"min", Dim::Time, 60.0},
    {"Hz", Dim::Frequency, 1.0},
    {"rad/s", Dim::AngularRate, 1.0},
    {"deg/s", Dim::AngularRate, kPi / 180.0},
    {"rpm", Dim::AngularRate, 2.0 * kPi / 60.0},
    {"N m", Dim::Torque, 1.0},
    {"Nm", Dim::Torque, 1.0},
    {"mN m", Dim::Torque, 1e-3},
    {"mNm", Dim::Torque, 1e-3},
    {"N m/rad", Dim::RotStiffness, 1.0},
    {"N m s/rad", Dim::RotDamping, 1.0},
    {"kg m^2", Dim::Inertia, 1.0},
    {"m/N", Dim::Compliance, 1.0},
    {"mm/N", Dim::Compliance, 1e-3},
};

std::string_view dim_name(Dim d) {
  switch (d) {
    case Dim::None: return "dimensionless";
    case Dim::Angle: return "angle";
    case Dim::Length: return "length";
    case Dim::Force: return "force";
    case Dim::Time: return "time";
    case Dim::Frequency: return "frequency";
    case Dim::AngularRate: return "angular rate";
    case Dim::Torque: return "torque";
    case Dim::RotStiffness: return "rotational stiffness";
    case Dim::RotDamping: return "rotational damping";
    case Dim::Inertia: return "inertia";
    case Dim::Compliance: return "compliance";
  }
  return "?";
}

struct Quantity {
  double value;
  std::optional<Unit> unit;
};

// Splits "12.5 mm" / "12.5mm" / "12.5" into number and unit. Throws
// std::invalid_argument on malformed text.
Quantity split_quantity(std::string_view text) {
  std::string s(text);
  std::size_t used = 0;
  const double v = std::stod(s, &used);
  std::string rest = s.substr(used);
  const auto b = rest.find_first_not_of(' ');
  rest = b == std::string::npos ? std::string{} : rest.substr(b);
  while (!rest.empty() && rest.back() == ' ') rest.pop_back();
  if (rest.empty()) return {v, std::nullopt};
  for (const auto& u : kUnits) {
    if (u.name == rest) return {v, u};
  }
  throw std::invalid_argument(fmt::format("unknown unit '{}'", rest));
}

class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_, "expected an object");
  }

  std::string field(std::string_view key) const {
    return path_.empty() ? std::string(key) : path_ + "." + std::string(key);
  }

  const json* find(std::string_view key) {
    seen_.insert(std::string(key));
    const auto it = j_.find(std::string(key));
    return it == j_.end() ? nullptr : &*it;
  }

  void number(std::string_view key, double& dst, Dim dim) {
    if (const json* v = find(key)) dst = to_number(*v, field(key), dim);
  }

  void optional_number(std::string_view key, std::optional<double>& dst, Dim dim) {
    if (const json* v = find(key)) {
      if (v->is_null()) {
        dst.reset();
      } else {
        dst = to_number(*v, field(key), dim);
      }
    }
  }

  void boolean(std::string_view key, bool& dst) {
    if (const json* v = find(key)) {
      if (!v->is_boolean()) throw ConfigError(field(key), "expected true or false");
      dst = v->get<bool>();
    }
  }

  void integer(std::string_view key, int& dst) {
    if (const json* v = find(key)) {
      if (!v->is_number_integer()) throw ConfigError(field(key), "expected an integer");
      const auto x = v->get<long long>();
      if (x < std::numeric_limits<int>::min() || x > std::numeric_limits<int>::max()) {
        throw ConfigError(field(key), "integer out of range");
      }
      dst = static_cast<int>(x);
    }
  }

  void seed(std::string_view key, std::uint64_t& dst) {
    if (const json* v = find(key)) {
      if (v->is_number_unsigned()) {
        dst = v->get<std::uint64_t>();
      } else if (v->is_number_integer()) {
        throw ConfigError(field(key), "seed must be >= 0");
      } else {
        throw ConfigError(field(key), "expected a non-negative integer");
      }
    }
  }

  void string(std::string_view key, std::string& dst) {
    if (const json* v = find(key)) {
      if (!v->is_string()) throw ConfigError(field(key), "expected a string");
      dst = v->get<std::string>();
    }
  }

  void numbers(std::string_view key, std::vector<double>& dst, Dim dim) {
    if (const json* v = find(key)) {
      if (!v->is_array()) throw ConfigError(field(key), "expected a list");
      dst.clear();
      for (std::size_t i = 0; i < v->size(); ++i) {
        dst.push_back(to_number((*v)[i], fmt::format("{}[{}]", field(key), i), dim));
      }
    }
  }

  std::optional<Section> sub(std::string_view key) {
    if (const json* v = find(key)) return Section(*v, field(key));
    return std::nullopt;
  }

  /// Rejects keys nobody asked for, which are almost always typos.
  void finish() const {
    for (const auto& [key, value] : j_.items()) {
      if (!seen_.count(key)) throw ConfigError(field(key), "unknown field");
    }
  }

  static double to_number(const json& v, const std::string& field, Dim dim) {
    double value;
    if (v.is_number()) {
      value = v.get<double>();
    } else if (v.is_string()) {
      Quantity q;
      try {
        q = split_quantity(v.get<std::string>());
      } catch (const std::invalid_argument& e) {
        throw ConfigError(field, fmt::format("cannot read '{}' as a {} ({})",
                                             v.get<std::string>(), dim_name(dim),
                                             std::string_view(e.what()).starts_with("unknown")
                                                 ? e.what()
                                                 : "malformed number"));
      } catch (const std::out_of_range&) {
        throw ConfigError(field, "number out of range");
      }
      value = q.value;
      if (q.unit) {
        if (q.unit->dim != dim) {
          throw ConfigError(field, fmt::format("unit '{}' is a {}, expected a {}", q.unit->name,
                                               dim_name(q.unit->dim), dim_name(dim)));
        }
        value *= q.unit->scale;
      }
    } else {
      throw ConfigError(field, fmt::format("expected a {} (number or string with unit)",
                                           dim_name(dim)));
    }
    if (!std::isfinite(value)) throw ConfigError(field, "must be finite");
    return value;
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

json parse_document(std::string_view text) {
  try {
    return json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    const auto upto = std::min<std::size_t>(e.byte, text.size());
    const auto line =
        1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<long>(upto), '\n'));
    throw ConfigError("", fmt::format("syntax error at line {}: {}", line, e.what()), line);
  }
}

void merge_into(json& base, const json& overlay) {
  if (!base.is_object() || !overlay.is_object()) {
    base = overlay;
    return;
  }
  for (const auto& [key, value] : overlay.items()) {
    if (base.contains(key) && base[key].is_object() && value.is_object()) {
      merge_into(base[key], value);
    } else {
      base[key] = value;
    }
  }
}

json resolve_includes(json doc, const std::filesystem::path& base_dir, int depth) {
  if (!doc.is_object()) throw ConfigError("", "config must be an object");
  if (!doc.contains("include")) return doc;
  if (depth > 8) throw ConfigError("include", "includes nested too deeply (cycle?)");
  std::vector<std::string> files;
  const json& inc = doc["include"];
  if (inc.is_string()) {
    files.push_back(inc.get<std::string>());
  } else if (inc.is_array() && std::all_of(inc.begin(), inc.end(), [](const json& x) { return x.is_string(); })) {
    for (const auto& f : inc) files.push_back(f.get<std::string>());
  } else {
    throw ConfigError("include", "expected a file name or a list of file names");
  }
  json merged = json::object();
  for (const auto& f : files) {
    const auto path = base_dir / f;
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("include", fmt::format("cannot open '{}'", path.string()));
    std::stringstream ss;
    ss << in.rdbuf();
    json child;
    try {
      child = parse_document(ss.str());
    } catch (const ConfigError& e) {
      throw ConfigError("include", fmt::format("{}: {}", path.string(), e.what()), e.line());
    }
    merge_into(merged, resolve_includes(std::move(child), path.parent_path(), depth + 1));
  }
  doc.erase("include");
  merge_into(merged, doc);
  return merged;
}

ScenarioKind kind_from_string(const std::string& s, const std::string& field) {
  for (auto k : {ScenarioKind::FrictionSweep, ScenarioKind::FingertipForce,
                 ScenarioKind::StepResponse, ScenarioKind::SineTracking}) {
    if (to_string(k) == s) return k;
  }
  throw ConfigError(field, fmt::format("unknown scenario kind '{}'", s));
}

void read_plant(Section s, PlantConfig& p) {
  if (auto j = s.sub("joint")) {
    j->number("spool_radius", p.joint.spool_radius, Dim::Length);
    j->number("spring_stiffness", p.joint.spring_stiffness, Dim::RotStiffness);
    j->number("spring_preload", p.joint.spring_preload, Dim::Torque);
    j->number("damping", p.joint.damping, Dim::RotDamping);
    j->number("inertia", p.joint.inertia, Dim::Inertia);
    j->number("stiction_torque", p.joint.stiction_torque, Dim::Torque);
    j->finish();
  }
  if (auto t = s.sub("tendon")) {
    t->number("tendon_diameter", p.tendon.tendon_diameter, Dim::Length);
    t->number("sheath_inner_diameter", p.tendon.sheath_inner_diameter, Dim::Length);
    t->number("friction_coefficient", p.tendon.friction_coefficient, Dim::None);
    t->optional_number("axial_stiffness", p.tendon.axial_stiffness, Dim::Force);
    t->finish();
  }
  if (auto sh = s.sub("sheath")) {
    sh->number("length", p.sheath.length, Dim::Length);
    sh->number("bend", p.sheath.bend, Dim::Angle);
    sh->finish();
  }
  if (auto m = s.sub("motor")) {
    m->number("spool_radius", p.motor.spool_radius, Dim::Length);
    m->number("max_speed", p.motor.max_speed, Dim::AngularRate);
    m->finish();
  }
  s.number("hub_free_length", p.hub_free_length, Dim::Length);
  s.number("joint_segment_length", p.joint_segment_length, Dim::Length);
  s.boolean("quasi_static", p.quasi_static);
  s.number("transport_delay", p.transport_delay, Dim::Time);
  if (auto c = s.sub("creep")) {
    c->boolean("enabled", p.creep.enabled);
    c->number("time_constant", p.creep.time_constant, Dim::Time);
    c->number("compliance", p.creep.compliance, Dim::Compliance);
    c->finish();
  }
  s.finish();
}

void read_controller(Section s, ControllerConfig& c) {
  s.number("kp", c.kp, Dim::None);
  s.number("ki", c.ki, Dim::None);
  s.number("kd", c.kd, Dim::None);
  s.number("integral_clamp", c.integral_clamp, Dim::None);
  s.number("output_clamp", c.output_clamp, Dim::AngularRate);
  s.number("release_speed_limit", c.release_speed_limit, Dim::AngularRate);
  if (auto a = s.sub("anomaly")) {
    a->number("current_spike_threshold", c.anomaly.current_spike_threshold, Dim::Torque);
    a->number("encoder_motion_floor", c.anomaly.encoder_motion_floor, Dim::AngularRate);
    a->number("window", c.anomaly.window, Dim::Time);
    a->finish();
  }
  if (auto r = s.sub("slack_recovery")) {
    r->number("threshold", c.slack_recovery.threshold, Dim::Angle);
    r->number("gain", c.slack_recovery.gain, Dim::Frequency);
    r->number("max_speed", c.slack_recovery.max_speed, Dim::AngularRate);
    r->finish();
  }
  if (auto p = s.sub("pretension")) {
    p->number("angle", c.pretension.angle, Dim::Angle);
    p->number("wind_speed", c.pretension.wind_speed, Dim::AngularRate);
    p->number("settle_time", c.pretension.settle_time, Dim::Time);
    p->number("horizon", c.pretension.horizon, Dim::Time);
    p->finish();
  }
  s.finish();
}

void read_sweep(Section s, FrictionSweepConfig& f) {
  if (const json* v = s.find("sheaths")) {
    if (!v->is_array()) throw ConfigError(s.field("sheaths"), "expected a list");
    f.sheaths.clear();
    for (std::size_t i = 0; i < v->size(); ++i) {
      Section e((*v)[i], fmt::format("{}[{}]", s.field("sheaths"), i));
      SheathType t{"", 0.0};
      e.string("name", t.name);
      e.number("mu", t.mu, Dim::None);
      e.finish();
      f.sheaths.push_back(std::move(t));
    }
  }
  s.numbers("angles", f.angles, Dim::Angle);
  s.numbers("diameters", f.diameters, Dim::Length);
  s.number("load", f.load, Dim::Force);
  s.number("noise", f.noise, Dim::None);
  s.integer("trace_samples", f.trace_samples);
  s.finish();
}

void read_fingertip(Section s, FingertipConfig& f) {
  if (const json* v = s.find("sheaths")) {
    if (!v->is_array()) throw ConfigError(s.field("sheaths"), "expected a list");
    f.sheaths.clear();
    for (std::size_t i = 0; i < v->size(); ++i) {
      Section e((*v)[i], fmt::format("{}[{}]", s.field("sheaths"), i));
      FingertipSheath t{"", 0.0, 0.0};
      e.string("name", t.name);
      e.number("length", t.length, Dim::Length);
      e.number("bend", t.bend, Dim::Angle);
      e.finish();
      f.sheaths.push_back(std::move(t));
    }
  }
  s.number("peak_tension", f.peak_tension, Dim::Force);
  s.number("ramp_time", f.ramp_time, Dim::Time);
  s.number("contact_lever", f.contact_lever, Dim::Length);
  s.number("joint_angle", f.joint_angle, Dim::Angle);
  s.finish();
}

void read_step(Section s, StepConfig& st) {
  s.number("amplitude", st.amplitude, Dim::Angle);
  s.number("step_time", st.step_time, Dim::Time);
  s.number("motion_floor", st.motion_floor, Dim::AngularRate);
  s.number("steady_fraction", st.steady_fraction, Dim::None);
  s.finish();
}

void read_sine(Section s, SineConfig& sn) {
  s.number("low", sn.low, Dim::Angle);
  s.number("high", sn.high, Dim::Angle);
  s.number("frequency", sn.frequency, Dim::Frequency);
  s.number("pre_roll", sn.pre_roll, Dim::Time);
  if (auto a = s.sub("arm")) {
    a->number("phi0", sn.arm.phi0, Dim::Angle);
    a->number("amplitude", sn.arm.amplitude, Dim::Angle);
    a->number("frequency", sn.arm.frequency, Dim::Frequency);
    a->finish();
  }
  s.finish();
}

void require(bool ok, const char* field, const char* message) {
  if (!ok) throw ConfigError(field, message);
}

}  // namespace

std::string_view to_string(ScenarioKind kind) {
  switch (kind) {
    case ScenarioKind::FrictionSweep: return "FrictionSweep";
    case ScenarioKind::FingertipForce: return "FingertipForce";
    case ScenarioKind::StepResponse: return "StepResponse";
    case ScenarioKind::SineTracking: return "SineTracking";
  }
  return "?";
}

double parse_quantity(std::string_view text) {
  try {
    const Quantity q = split_quantity(text);
    return q.unit ? q.value * q.unit->scale : q.value;
  } catch (const std::logic_error& e) {
    throw ConfigError("", fmt::format("cannot read quantity '{}'", text));
  }
}

ScenarioConfig parse_config(std::string_view text, const std::filesystem::path& base_dir) {
  const json doc = resolve_includes(parse_document(text), base_dir, 0);
  ScenarioConfig cfg;
  Section root(doc, "");
  if (const json* v = root.find("schema_version")) {
    if (!v->is_number_integer() || v->get<long long>() != kSchemaVersion) {
      throw ConfigError("schema_version", fmt::format("unsupported; expected {}", kSchemaVersion));
    }
  } else {
    throw ConfigError("schema_version", "missing");
  }
  if (auto s = root.sub("scenario")) {
    std::string kind;
    s->string("kind", kind);
    if (kind.empty()) throw ConfigError(s->field("kind"), "missing");
    cfg.kind = kind_from_string(kind, s->field("kind"));
    s->number("duration", cfg.duration, Dim::Time);
    s->number("dt", cfg.dt, Dim::Time);
    s->seed("seed", cfg.seed);
    std::string finger(to_string(cfg.finger));
    std::string joint(to_string(cfg.joint));
    s->string("finger", finger);
    s->string("joint", joint);
    try {
      cfg.finger = finger_from_string(finger);
    } catch (const InvalidParameter& e) {
      throw ConfigError(s->field("finger"), e.what());
    }
    try {
      cfg.joint = joint_name_from_string(joint);
    } catch (const InvalidParameter& e) {
      throw ConfigError(s->field("joint"), e.what());
    }
    s->finish();
  } else {
    throw ConfigError("scenario", "missing");
  }
  if (auto s = root.sub("plant")) read_plant(*s, cfg.plant);
  if (auto s = root.sub("controller")) read_controller(*s, cfg.controller);
  if (auto s = root.sub("noise")) {
    s->boolean("enabled", cfg.noise.enabled);
    s->number("encoder_resolution", cfg.noise.encoder_resolution, Dim::Angle);
    s->number("tension_noise", cfg.noise.tension_noise, Dim::None);
    s->finish();
  }
  if (auto s = root.sub("friction_sweep")) read_sweep(*s, cfg.friction_sweep);
  if (auto s = root.sub("fingertip")) read_fingertip(*s, cfg.fingertip);
  if (auto s = root.sub("step")) read_step(*s, cfg.step);
  if (auto s = root.sub("sine")) read_sine(*s, cfg.sine);
  root.finish();
  validate(cfg);
  return cfg;
}

ScenarioConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("", fmt::format("cannot open config '{}'", path.string()));
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path.parent_path());
}

void validate(const ScenarioConfig& c) {
  require(c.duration > 0.0, "scenario.duration", "must be > 0");
  require(c.dt > 0.0, "scenario.dt", "must be > 0");
  require(c.dt <= c.duration, "scenario.dt", "must not exceed the duration");
  try {
    (void)default_hand().index_of(c.finger, c.joint);
  } catch (const InvalidParameter& e) {
    throw ConfigError("scenario.joint", e.what());
  }
  require(!(c.finger == Finger::Thumb && c.joint == JointName::CMC1_rotation), "scenario.joint",
          "the antagonistic thumb CMC1 is not a scenario target");

  const auto& p = c.plant;
  require(p.joint.spool_radius > 0.0, "plant.joint.spool_radius", "must be > 0");
  require(p.joint.spring_stiffness > 0.0, "plant.joint.spring_stiffness", "must be > 0");
  require(p.joint.spring_preload >= 0.0, "plant.joint.spring_preload", "must be >= 0");
  require(p.joint.damping >= 0.0, "plant.joint.damping", "must be >= 0");
  require(p.joint.inertia >= 0.0, "plant.joint.inertia", "must be >= 0");
  require(p.joint.stiction_torque >= 0.0, "plant.joint.stiction_torque", "must be >= 0");
  require(p.tendon.tendon_diameter > 0.0, "plant.tendon.tendon_diameter", "must be > 0");
  require(p.tendon.sheath_inner_diameter >= p.tendon.tendon_diameter,
          "plant.tendon.sheath_inner_diameter", "must be >= the tendon diameter");
  require(p.tendon.friction_coefficient >= 0.0, "plant.tendon.friction_coefficient",
          "must be >= 0");
  require(!p.tendon.axial_stiffness || *p.tendon.axial_stiffness > 0.0,
          "plant.tendon.axial_stiffness", "must be > 0 or null");
  require(p.sheath.length > 0.0, "plant.sheath.length", "must be > 0");
  require(p.sheath.bend >= 0.0, "plant.sheath.bend", "must be >= 0");
  require(p.motor.spool_radius > 0.0, "plant.motor.spool_radius", "must be > 0");
  require(p.motor.max_speed > 0.0, "plant.motor.max_speed", "must be > 0");
  require(p.hub_free_length >= 0.0, "plant.hub_free_length", "must be >= 0");
  require(p.joint_segment_length >= 0.0, "plant.joint_segment_length", "must be >= 0");
  require(p.transport_delay >= 0.0, "plant.transport_delay", "must be >= 0");
  require(p.creep.time_constant > 0.0, "plant.creep.time_constant", "must be > 0");
  require(p.creep.compliance >= 0.0, "plant.creep.compliance", "must be >= 0");

  const auto& k = c.controller;
  require(k.kp >= 0.0, "controller.kp", "must be >= 0");
  require(k.ki >= 0.0, "controller.ki", "must be >= 0");
  require(k.kd >= 0.0, "controller.kd", "must be >= 0");
  require(k.integral_clamp > 0.0, "controller.integral_clamp", "must be > 0");
  require(k.output_clamp > 0.0, "controller.output_clamp", "must be > 0");
  require(k.release_speed_limit > 0.0, "controller.release_speed_limit", "must be > 0");
  require(k.anomaly.current_spike_threshold > 0.0, "controller.anomaly.current_spike_threshold",
          "must be > 0");
  require(k.anomaly.encoder_motion_floor > 0.0, "controller.anomaly.encoder_motion_floor",
          "must be > 0");
  require(k.anomaly.window > 0.0, "controller.anomaly.window", "must be > 0");
  require(k.slack_recovery.threshold > 0.0, "controller.slack_recovery.threshold", "must be > 0");
  require(k.slack_recovery.gain >= 0.0, "controller.slack_recovery.gain", "must be >= 0");
  require(k.slack_recovery.max_speed > 0.0, "controller.slack_recovery.max_speed", "must be > 0");
  require(k.pretension.angle >= 0.0, "controller.pretension.angle", "must be >= 0");
  require(k.pretension.wind_speed > 0.0, "controller.pretension.wind_speed", "must be > 0");
  require(k.pretension.settle_time >= 0.0, "controller.pretension.settle_time", "must be >= 0");
  require(k.pretension.horizon > 0.0, "controller.pretension.horizon", "must be > 0");

  require(c.noise.encoder_resolution >= 0.0, "noise.encoder_resolution", "must be >= 0");
  require(c.noise.tension_noise >= 0.0, "noise.tension_noise", "must be >= 0");

  switch (c.kind) {
    case ScenarioKind::FrictionSweep: {
      const auto& f = c.friction_sweep;
      require(!f.sheaths.empty(), "friction_sweep.sheaths", "must not be empty");
      for (const auto& s : f.sheaths) {
        require(!s.name.empty(), "friction_sweep.sheaths", "every sheath needs a name");
        require(s.mu >= 0.0, "friction_sweep.sheaths", "mu must be >= 0");
      }
      require(!f.angles.empty(), "friction_sweep.angles", "must not be empty");
      require(std::all_of(f.angles.begin(), f.angles.end(), [](double a) { return a >= 0.0; }),
              "friction_sweep.angles", "must be >= 0");
      require(!f.diameters.empty(), "friction_sweep.diameters", "must not be empty");
      require(std::all_of(f.diameters.begin(), f.diameters.end(), [](double d) { return d > 0.0; }),
              "friction_sweep.diameters", "must be > 0");
      require(f.load > 0.0, "friction_sweep.load", "must be > 0");
      require(f.noise >= 0.0, "friction_sweep.noise", "must be >= 0");
      require(f.trace_samples >= 1, "friction_sweep.trace_samples", "must be >= 1");
      break;
    }
    case ScenarioKind::FingertipForce: {
      const auto& f = c.fingertip;
      require(!f.sheaths.empty(), "fingertip.sheaths", "must not be empty");
      for (const auto& s : f.sheaths) {
        require(s.length > 0.0, "fingertip.sheaths", "length must be > 0");
        require(s.bend >= 0.0, "fingertip.sheaths", "bend must be >= 0");
      }
      require(f.peak_tension >= 0.0, "fingertip.peak_tension", "must be >= 0");
      require(f.ramp_time > 0.0, "fingertip.ramp_time", "must be > 0");
      require(f.ramp_time <= c.duration, "fingertip.ramp_time", "must not exceed the duration");
      require(f.contact_lever > 0.0, "fingertip.contact_lever", "must be > 0");
      require(f.joint_angle >= 0.0, "fingertip.joint_angle", "must be >= 0");
      require(p.tendon.axial_stiffness.has_value(), "plant.tendon.axial_stiffness",
              "the fingertip press needs an extensible tendon");
      break;
    }
    case ScenarioKind::StepResponse:
      require(c.step.step_time >= 0.0 && c.step.step_time < c.duration, "step.step_time",
              "must lie inside the run");
      require(c.step.motion_floor > 0.0, "step.motion_floor", "must be > 0");
      require(c.step.steady_fraction > 0.0 && c.step.steady_fraction <= 1.0,
              "step.steady_fraction", "must be in (0, 1]");
      break;
    case ScenarioKind::SineTracking:
      require(c.sine.low >= 0.0, "sine.low", "must be >= 0");
      require(c.sine.high >= c.sine.low, "sine.high", "must be >= sine.low");
      require(c.sine.frequency > 0.0, "sine.frequency", "must be > 0");
      require(c.sine.pre_roll >= 0.0, "sine.pre_roll", "must be >= 0");
      require(c.sine.arm.amplitude >= 0.0 && c.sine.arm.amplitude <= c.sine.arm.phi0,
              "sine.arm.amplitude", "must be in [0, phi0] so the bend stays >= 0");
      require(c.sine.arm.frequency >= 0.0, "sine.arm.frequency", "must be >= 0");
      break;
  }
}

json to_json(const ScenarioConfig& c) {
  const auto& p = c.plant;
  const auto& k = c.controller;
  json sweep_sheaths = json::array();
  for (const auto& s : c.friction_sweep.sheaths) sweep_sheaths.push_back({{"name", s.name}, {"mu", s.mu}});
  json tip_sheaths = json::array();
  for (const auto& s : c.fingertip.sheaths) {
    tip_sheaths.push_back({{"name", s.name}, {"length", s.length}, {"bend", s.bend}});
  }
  return {
      {"schema_version", c.schema_version},
      {"scenario",
       {{"kind", std::string(to_string(c.kind))},
        {"duration", c.duration},
        {"dt", c.dt},
        {"seed", c.seed},
        {"finger", std::string(to_string(c.finger))},
        {"joint", std::string(to_string(c.joint))}}},
      {"plant",
       {{"joint",
         {{"spool_radius", p.joint.spool_radius},
          {"spring_stiffness", p.joint.spring_stiffness},
          {"spring_preload", p.joint.spring_preload},
          {"damping", p.joint.damping},
          {"inertia", p.joint.inertia},
          {"stiction_torque", p.joint.stiction_torque}}},
        {"tendon",
         {{"tendon_diameter", p.tendon.tendon_diameter},
          {"sheath_inner_diameter", p.tendon.sheath_inner_diameter},
          {"friction_coefficient", p.tendon.friction_coefficient},
          {"axial_stiffness",
           p.tendon.axial_stiffness ? json(*p.tendon.axial_stiffness) : json(nullptr)}}},
        {"sheath", {{"length", p.sheath.length}, {"bend", p.sheath.bend}}},
        {"motor", {{"spool_radius", p.motor.spool_radius}, {"max_speed", p.motor.max_speed}}},
        {"hub_free_length", p.hub_free_length},
        {"joint_segment_length", p.joint_segment_length},
        {"quasi_static", p.quasi_static},
        {"transport_delay", p.transport_delay},
        {"creep",
         {{"enabled", p.creep.enabled},
          {"time_constant", p.creep.time_constant},
          {"compliance", p.creep.compliance}}}}},
      {"controller",
       {{"kp", k.kp},
        {"ki", k.ki},
        {"kd", k.kd},
        {"integral_clamp", k.integral_clamp},
        {"output_clamp", k.output_clamp},
        {"release_speed_limit", k.release_speed_limit},
        {"anomaly",
         {{"current_spike_threshold", k.anomaly.current_spike_threshold},
          {"encoder_motion_floor", k.anomaly.encoder_motion_floor},
          {"window", k.anomaly.window}}},
        {"slack_recovery",
         {{"threshold", k.slack_recovery.threshold},
          {"gain", k.slack_recovery.gain},
          {"max_speed", k.slack_recovery.max_speed}}},
        {"pretension",
         {{"angle", k.pretension.angle},
          {"wind_speed", k.pretension.wind_speed},
          {"settle_time", k.pretension.settle_time},
          {"horizon", k.pretension.horizon}}}}},
      {"noise",
       {{"enabled", c.noise.enabled},
        {"encoder_resolution", c.noise.encoder_resolution},
        {"tension_noise", c.noise.tension_noise}}},
      {"friction_sweep",
       {{"sheaths", sweep_sheaths},
        {"angles", c.friction_sweep.angles},
        {"diameters", c.friction_sweep.diameters},
        {"load", c.friction_sweep.load},
        {"noise", c.friction_sweep.noise},
        {"trace_samples", c.friction_sweep.trace_samples}}},
      {"fingertip",
       {{"sheaths", tip_sheaths},
        {"peak_tension", c.fingertip.peak_tension},
        {"ramp_time", c.fingertip.ramp_time},
        {"contact_lever", c.fingertip.contact_lever},
        {"joint_angle", c.fingertip.joint_angle}}},
      {"step",
       {{"amplitude", c.step.amplitude},
        {"step_time", c.step.step_time},
        {"motion_floor", c.step.motion_floor},
        {"steady_fraction", c.step.steady_fraction}}},
      {"sine",
       {{"low", c.sine.low},
        {"high", c.sine.high},
        {"frequency", c.sine.frequency},
        {"pre_roll", c.sine.pre_roll},
        {"arm",
         {{"phi0", c.sine.arm.phi0},
          {"amplitude", c.sine.arm.amplitude},
          {"frequency", c.sine.arm.frequency}}}}},
  };
}

std::string dump_config(const ScenarioConfig& cfg) { return to_json(cfg).dump(2) + "\n"; }

}  // namespace bowden
