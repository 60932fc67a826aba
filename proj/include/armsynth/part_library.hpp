#ifndef ARMSYNTH_PART_LIBRARY_HPP
#define ARMSYNTH_PART_LIBRARY_HPP

#include <cstddef>
#include <istream>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "armsynth/collision.hpp"
#include "armsynth/rigid_transform.hpp"

namespace armsynth {

enum class PartKind { Base, Actuator, Link, EndEffector };

std::string_view to_string(PartKind kind);
std::optional<PartKind> part_kind_from_string(std::string_view s);

/// Revolute joint of an actuator. The axis passes through the body origin.
struct Joint {
  Vector3 axis = Vector3::UnitZ();
  double lower = -std::numbers::pi;
  double upper = std::numbers::pi;
  bool operator==(const Joint&) const = default;
};

struct Part {
  std::string id;
  PartKind kind = PartKind::Link;
  double cost_weight = 1.0;
  // Mount point (in body coordinates) by which the part attaches to its parent.
  Transform input_frame;
  // Mount points offered to children. For actuators they are expressed in the
  // rotating (distal) side, which coincides with the body frame at angle 0.
  std::vector<Transform> output_frames;
  std::optional<Joint> joint;
  std::vector<CollisionPrimitive> collision_geometry;

  bool operator==(const Part&) const = default;
};

struct ConnectionRule {
  std::string id;
  std::string parent_part;
  std::string child_part;
  std::size_t parent_output_index = 0;
  // Child input frame relative to the selected parent output frame.
  Transform transform;

  bool operator==(const ConnectionRule&) const = default;
};

inline constexpr std::string_view kVirtualEndEffectorId = "__virtual_end_effector__";
inline constexpr std::string_view kVirtualRulePrefix = "__virtual__:";

/*
 * Immutable, validated collection of parts and connection rules.
 *
 * Parts and rules keep their file order; all queries are deterministic in
 * that order. Construction throws ValidationError naming the violated
 * invariant and the offending id.
 */
class PartLibrary {
 public:
  PartLibrary(std::vector<Part> parts, std::vector<ConnectionRule> rules);

  const std::vector<Part>& parts() const { return parts_; }
  const std::vector<ConnectionRule>& rules() const { return rules_; }

  const Part* find_part(std::string_view id) const;
  const ConnectionRule* find_rule(std::string_view id) const;
  // Throw ValidationError for unknown ids.
  const Part& part(std::string_view id) const;
  const ConnectionRule& rule(std::string_view id) const;

  /// Rules whose parent is `tip`, in library order.
  std::vector<ConnectionRule> compatible_rules(std::string_view tip) const;

  bool operator==(const PartLibrary& o) const { return parts_ == o.parts_ && rules_ == o.rules_; }

 private:
  std::vector<Part> parts_;
  std::vector<ConnectionRule> rules_;
  std::unordered_map<std::string, std::size_t> part_index_;
  std::unordered_map<std::string, std::size_t> rule_index_;
  std::unordered_map<std::string, std::vector<std::size_t>> rules_by_parent_;
};

PartLibrary load_library(std::istream& source);
PartLibrary parse_library(std::string_view text);
/// Canonical JSON encoding (format "armlib/1"), newline terminated.
std::string save_library(const PartLibrary& lib);

/*
 * The zero-cost terminator used to evaluate unfinished designs. It has an
 * identity input frame, a tool point at its origin, and no geometry. It is
 * never stored in a library or a design file.
 */
Part virtual_end_effector(const PartLibrary& lib);

/// Synthetic rule attaching the virtual end-effector to `parent` at the
/// given output frame with an identity offset.
ConnectionRule virtual_rule(const Part& parent, std::size_t output_index = 0);

}  // namespace armsynth

#endif  // ARMSYNTH_PART_LIBRARY_HPP
