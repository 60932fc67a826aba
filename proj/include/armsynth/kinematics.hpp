#ifndef ARMSYNTH_KINEMATICS_HPP
#define ARMSYNTH_KINEMATICS_HPP

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "armsynth/part_library.hpp"
#include "armsynth/rigid_transform.hpp"

namespace armsynth {

/// Joint angles in radians, one per actuator in chain order.
using Pose = Eigen::VectorXd;
using PoseSequence = std::vector<Pose>;

struct Attachment {
  std::string part;
  std::string rule;
  bool operator==(const Attachment&) const = default;
};

/*
 * A serial chain: a base followed by parts attached one rule at a time.
 *
 * Designs are values. They never contain the virtual end-effector; use
 * KinematicChain to evaluate an unfinished design.
 */
class Design {
 public:
  explicit Design(std::string base) : base_(std::move(base)), signature_(base_) {}

  /// Replays `rule_ids` through append_part; throws on any illegal step.
  static Design replay(const PartLibrary& lib, std::string base, const std::vector<std::string>& rule_ids);

  const std::string& base() const { return base_; }
  const std::vector<Attachment>& links() const { return links_; }
  const std::string& signature() const { return signature_; }
  /// Base plus attached parts.
  std::size_t part_count() const { return links_.size() + 1; }
  const std::string& tip() const { return links_.empty() ? base_ : links_.back().part; }
  std::vector<std::string> rule_ids() const;

  bool operator==(const Design& o) const { return base_ == o.base_ && links_ == o.links_; }

 private:
  friend Design append_part(const PartLibrary& lib, const Design& d, std::string_view rule_id);

  std::string base_;
  std::vector<Attachment> links_;
  std::string signature_;
};

/// Copy of `d` with the child of `rule_id` attached at the tip.
Design append_part(const PartLibrary& lib, const Design& d, std::string_view rule_id);

/// Sum of cost weights of non-base parts.
double design_cost(const PartLibrary& lib, const Design& d);

/// Number of actuators.
std::size_t design_dof(const PartLibrary& lib, const Design& d);

/// True when the final part is a (real) end-effector.
bool is_terminated(const PartLibrary& lib, const Design& d);

/// Design file (format "armdesign/1").
Design parse_design(const PartLibrary& lib, std::string_view text);
std::string save_design(const Design& d);

/*
 * Compiled kinematic chain of a design.
 *
 * When the design does not end in an end-effector the virtual end-effector is
 * appended at output frame 0 of the tip, so the last element always carries
 * the tool frame.
 */
class KinematicChain {
 public:
  struct Element {
    const Part* part;
    // Body frame of this element relative to the parent's distal frame.
    Transform mount;
    // Which parent output frame `mount` hangs from (unused for the base).
    std::size_t parent_output = 0;
    // Index into the pose vector, or -1 when the part has no joint.
    int joint_index = -1;
  };

  KinematicChain(const PartLibrary& lib, const Design& d);

  std::size_t dof() const { return dof_; }
  std::size_t size() const { return elements_.size(); }
  const Element& element(std::size_t i) const { return elements_[i]; }
  bool has_virtual_tip() const { return virtual_tip_; }
  const std::vector<double>& lower_limits() const { return lower_; }
  const std::vector<double>& upper_limits() const { return upper_; }

  /// World body frames of every element, base first.
  std::vector<Transform> body_frames(const Transform& base_pose, const Pose& q) const;
  Transform tool_frame(const Transform& base_pose, const Pose& q) const;

  /// Brings each angle into its joint limits: clamped, or wrapped for joints
  /// whose range spans a full turn.
  Pose clamp(const Pose& q) const;
  bool within_limits(const Pose& q) const;

 private:
  void check_dimension(const Pose& q) const;
  // Distal frame of element i given its body frame.
  Transform distal(std::size_t i, const Transform& body, const Pose& q) const;

  std::vector<Element> elements_;
  Part virtual_part_;
  bool virtual_tip_ = false;
  std::size_t dof_ = 0;
  std::vector<double> lower_;
  std::vector<double> upper_;
};

/*
 * World frames of the base and every chain part, in chain order. If the
 * design is not terminated by an end-effector, a final frame for the virtual
 * end-effector at the tip mount is appended, so back() is always the tool
 * frame e.
 */
std::vector<Transform> forward_kinematics(const PartLibrary& lib, const Design& d,
                                          const Transform& base_pose, const Pose& q);

struct ErrorMetric {
  enum class Kind { PositionOnly, PositionAndAxis, FullPose };
  Kind kind = Kind::PositionAndAxis;
  // Weight of the squared rotational angle, in m^2 / rad^2.
  double w_rot = 0.1;

  static ErrorMetric position_only() { return {Kind::PositionOnly, 0.0}; }
  static ErrorMetric position_and_axis(double w = 0.1) { return {Kind::PositionAndAxis, w}; }
  static ErrorMetric full_pose(double w = 0.1) { return {Kind::FullPose, w}; }

  std::size_t residual_size() const { return kind == Kind::PositionOnly ? 3 : 6; }
  bool operator==(const ErrorMetric&) const = default;
};

std::string_view to_string(ErrorMetric::Kind kind);

/*
 * Squared pose error Delta^2 between a target and an actual tool frame.
 *
 * The position term is the squared distance between tool points. The
 * rotational term adds w_rot * angle^2, where the angle is the geodesic
 * rotation angle (FullPose) or the angle between the tool z-axes
 * (PositionAndAxis).
 */
double pose_error(const Transform& target, const Transform& actual, const ErrorMetric& metric);

/// Residual r with r.squaredNorm() == pose_error(target, actual, metric).
Eigen::VectorXd pose_residual(const Transform& target, const Transform& actual,
                              const ErrorMetric& metric);

}  // namespace armsynth

#endif  // ARMSYNTH_KINEMATICS_HPP
