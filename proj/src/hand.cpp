#include "bowden/hand.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/core.h>

#include "bowden/errors.hpp"
#include "bowden/units.hpp"

namespace bowden {

namespace {

constexpr std::array<std::string_view, 5> kFingerNames{"Thumb", "Index", "Middle", "Ring",
                                                       "Little"};
constexpr std::array<std::string_view, 8> kJointLabels{
    "CMC1 rotation", "CMC2 A-A", "CMC3 F-E", "MCP A-A", "MCP F-E", "PIP F-E", "DIP F-E", "IP F-E"};
constexpr std::array<std::string_view, 8> kJointIds{
    "CMC1_rotation", "CMC2_AA", "CMC3_FE", "MCP_AA", "MCP_FE", "PIP_FE", "DIP_FE", "IP_FE"};

}  // namespace

std::string_view to_string(Finger f) { return kFingerNames[static_cast<std::size_t>(f)]; }
std::string_view to_string(JointName j) { return kJointLabels[static_cast<std::size_t>(j)]; }
std::string_view to_string(Actuation a) {
  return a == Actuation::SpringReturn ? "SpringReturn" : "Antagonistic";
}

Finger finger_from_string(std::string_view s) {
  for (std::size_t i = 0; i < kFingerNames.size(); ++i) {
    if (kFingerNames[i] == s) return static_cast<Finger>(i);
  }
  throw InvalidParameter(fmt::format("unknown finger '{}'", s));
}

JointName joint_name_from_string(std::string_view s) {
  for (std::size_t i = 0; i < kJointIds.size(); ++i) {
    if (kJointIds[i] == s || kJointLabels[i] == s) return static_cast<JointName>(i);
  }
  throw InvalidParameter(fmt::format("unknown joint '{}'", s));
}

HandModel::HandModel(std::vector<JointDescriptor> joints) : joints_(std::move(joints)) {
  if (joints_.size() != kHandJointCount) {
    throw InvalidParameter(fmt::format("hand needs {} joints, got {}", kHandJointCount,
                                       joints_.size()));
  }
  std::array<int, 5> per_finger{};
  int antagonistic = 0;
  for (std::size_t i = 0; i < joints_.size(); ++i) {
    const auto& j = joints_[i];
    if (!(j.range_max > 0.0) || !std::isfinite(j.range_max)) {
      throw InvalidParameter(fmt::format("joint {}: range max must be > 0", i));
    }
    for (std::size_t k = 0; k < i; ++k) {
      if (joints_[k].finger == j.finger && joints_[k].joint == j.joint) {
        throw InvalidParameter(fmt::format("joint {} duplicates joint {}", i, k));
      }
    }
    const bool is_cmc1 = j.finger == Finger::Thumb && j.joint == JointName::CMC1_rotation;
    if ((j.actuation == Actuation::Antagonistic) != is_cmc1) {
      throw InvalidParameter("only thumb CMC1 rotation is antagonistic");
    }
    antagonistic += j.actuation == Actuation::Antagonistic ? 1 : 0;
    ++per_finger[static_cast<std::size_t>(j.finger)];
  }
  if (per_finger[0] != 5 || std::any_of(per_finger.begin() + 1, per_finger.end(),
                                        [](int n) { return n != 4; })) {
    throw InvalidParameter("thumb needs 5 joints and every long finger 4");
  }
  if (antagonistic != 1) throw InvalidParameter("hand needs exactly one antagonistic joint");

  tendon_map_.resize(joints_.size());
  for (std::size_t i = 0; i < joints_.size(); ++i) {
    tendon_map_[i].push_back(channel_count_++);
    if (joints_[i].actuation == Actuation::Antagonistic) tendon_map_[i].push_back(channel_count_++);
  }
}

std::span<const std::size_t> HandModel::channels(std::size_t joint_index) const {
  return tendon_map_.at(joint_index);
}

std::size_t HandModel::index_of(Finger f, JointName j) const {
  for (std::size_t i = 0; i < joints_.size(); ++i) {
    if (joints_[i].finger == f && joints_[i].joint == j) return i;
  }
  throw InvalidParameter(fmt::format("hand has no {} {}", to_string(f), to_string(j)));
}

HandModel default_hand() {
  using F = Finger;
  using J = JointName;
  std::vector<JointDescriptor> joints{
      {F::Thumb, J::CMC1_rotation, deg2rad(90), Actuation::Antagonistic},
      {F::Thumb, J::CMC2_AA, deg2rad(90), Actuation::SpringReturn},
      {F::Thumb, J::CMC3_FE, deg2rad(90), Actuation::SpringReturn},
      {F::Thumb, J::MCP_FE, deg2rad(85), Actuation::SpringReturn},
      {F::Thumb, J::IP_FE, deg2rad(90), Actuation::SpringReturn},
  };
  // Long fingers: MCP A-A differs per finger, the flexion joints do not.
  const std::array<std::pair<F, double>, 4> long_fingers{
      {{F::Index, 80}, {F::Middle, 100}, {F::Ring, 95}, {F::Little, 85}}};
  for (auto [finger, mcp_aa] : long_fingers) {
    joints.push_back({finger, J::MCP_AA, deg2rad(mcp_aa), Actuation::SpringReturn});
    joints.push_back({finger, J::MCP_FE, deg2rad(90), Actuation::SpringReturn});
    joints.push_back({finger, J::PIP_FE, deg2rad(85), Actuation::SpringReturn});
    joints.push_back({finger, J::DIP_FE, deg2rad(90), Actuation::SpringReturn});
  }
  return HandModel(std::move(joints));
}

ClampResult clamp_command(const HandModel& hand, std::span<const double> q_ref) {
  const auto joints = hand.joints();
  if (q_ref.size() != joints.size()) {
    throw DimensionMismatch(
        fmt::format("command has {} entries, hand has {} joints", q_ref.size(), joints.size()));
  }
  ClampResult out;
  out.values.resize(q_ref.size());
  for (std::size_t i = 0; i < q_ref.size(); ++i) {
    if (!std::isfinite(q_ref[i])) {
      throw NonFiniteCommand(fmt::format("command entry {} is not finite", i));
    }
    out.values[i] = std::clamp(q_ref[i], 0.0, joints[i].range_max);
    out.clamped[i] = out.values[i] != q_ref[i];
  }
  return out;
}

nlohmann::json to_json(const HandModel& hand) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& j : hand.joints()) {
    arr.push_back({{"finger", std::string(to_string(j.finger))},
                   {"joint", std::string(kJointIds[static_cast<std::size_t>(j.joint)])},
                   {"range_max", j.range_max},
                   {"actuation", std::string(to_string(j.actuation))}});
  }
  return {{"joints", arr}};
}

HandModel hand_from_json(const nlohmann::json& j) {
  std::vector<JointDescriptor> joints;
  for (const auto& e : j.at("joints")) {
    const auto act = e.at("actuation").get<std::string>();
    if (act != "SpringReturn" && act != "Antagonistic") {
      throw InvalidParameter(fmt::format("unknown actuation '{}'", act));
    }
    joints.push_back({finger_from_string(e.at("finger").get<std::string>()),
                      joint_name_from_string(e.at("joint").get<std::string>()),
                      e.at("range_max").get<double>(),
                      act == "SpringReturn" ? Actuation::SpringReturn : Actuation::Antagonistic});
  }
  return HandModel(std::move(joints));
}

std::string describe(const HandModel& hand) {
  std::string out;
  for (const auto& j : hand.joints()) {
    // Ranges are whole degrees; rounding hides the rad/deg round trip.
    const double deg = std::round(rad2deg(j.range_max) * 1e6) / 1e6;
    out += fmt::format("{} {} {:g} {}\n", to_string(j.finger), to_string(j.joint), deg,
                       to_string(j.actuation));
  }
  return out;
}

}  // namespace bowden
