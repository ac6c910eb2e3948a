#pragma once

#include <array>
#include <bitset>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace bowden {

enum class Finger { Thumb, Index, Middle, Ring, Little };
enum class JointName { CMC1_rotation, CMC2_AA, CMC3_FE, MCP_AA, MCP_FE, PIP_FE, DIP_FE, IP_FE };
enum class Actuation { SpringReturn, Antagonistic };

std::string_view to_string(Finger f);
std::string_view to_string(JointName j);  // table label, e.g. "MCP A-A"
std::string_view to_string(Actuation a);
Finger finger_from_string(std::string_view s);
JointName joint_name_from_string(std::string_view s);  // accepts "MCP_AA" or "MCP A-A"

struct JointDescriptor {
  Finger finger;
  JointName joint;
  double range_max;  // rad; the range is [0, range_max]
  Actuation actuation;

  bool operator==(const JointDescriptor&) const = default;
};

inline constexpr std::size_t kHandJointCount = 21;

/// Hand joint inventory in canonical order: thumb (CMC1, CMC2, CMC3, MCP F-E,
/// IP F-E), then index to little, each (MCP A-A, MCP F-E, PIP F-E, DIP F-E).
class HandModel {
 public:
  /// Validates the structural invariants (21 joints, 5 thumb + 4 per long
  /// finger, one antagonistic joint at thumb CMC1) and assigns tendon
  /// channels in joint order, two for the antagonistic joint.
  explicit HandModel(std::vector<JointDescriptor> joints);

  std::span<const JointDescriptor> joints() const { return joints_; }
  /// Tendon channel ids driving joint i (one, or two for antagonistic).
  std::span<const std::size_t> channels(std::size_t joint_index) const;
  std::size_t channel_count() const { return channel_count_; }

  /// Canonical index of a joint; throws InvalidParameter if absent.
  std::size_t index_of(Finger f, JointName j) const;

  bool operator==(const HandModel& other) const { return joints_ == other.joints_; }

 private:
  std::vector<JointDescriptor> joints_;
  std::vector<std::vector<std::size_t>> tendon_map_;
  std::size_t channel_count_ = 0;
};

/// The 21-DoF hand with the published ranges of motion.
HandModel default_hand();

struct ClampResult {
  std::vector<double> values;
  std::bitset<kHandJointCount> clamped;
};

/// Clamps each command into its joint's [0, max]. Throws DimensionMismatch
/// for a wrong length and NonFiniteCommand for NaN/inf entries.
ClampResult clamp_command(const HandModel& hand, std::span<const double> q_ref);

nlohmann::json to_json(const HandModel& hand);
HandModel hand_from_json(const nlohmann::json& j);

/// One line per joint: "<Finger> <Joint> <max deg> <actuation>".
std::string describe(const HandModel& hand);

}  // namespace bowden
