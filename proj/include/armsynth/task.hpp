#ifndef ARMSYNTH_TASK_HPP
#define ARMSYNTH_TASK_HPP

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "armsynth/collision.hpp"
#include "armsynth/config.hpp"
#include "armsynth/kinematics.hpp"
#include "armsynth/part_library.hpp"
#include "armsynth/rigid_transform.hpp"

namespace armsynth {

inline constexpr std::size_t kDefaultSamples = 20;

struct TimedFrame {
  double time = 0.0;
  Transform frame;
  bool operator==(const TimedFrame&) const = default;
};

struct LineCurve {
  Vector3 from;
  Vector3 to;
  bool operator==(const LineCurve&) const = default;
};

/// Circular arc: center + radius * (cos(a) u + sin(a) (n x u)), a in [0, sweep].
struct ArcCurve {
  Vector3 center;
  Vector3 normal = Vector3::UnitZ();
  Vector3 start_direction = Vector3::UnitX();
  double radius = 1.0;
  double sweep = 0.0;
  bool operator==(const ArcCurve&) const = default;
};

/// Arc whose center advances `rise` meters along the normal over the sweep.
struct HelixCurve {
  Vector3 center;
  Vector3 axis = Vector3::UnitZ();
  Vector3 start_direction = Vector3::UnitX();
  double radius = 1.0;
  double sweep = 0.0;
  double rise = 0.0;
  bool operator==(const HelixCurve&) const = default;
};

/*
 * Parametric target path. Frames have x along the tangent and z along an up
 * vector transported without twist (rotation-minimizing frame); `up` seeds the
 * transport at the start and defaults to world +z.
 */
struct ParametricCurve {
  std::variant<LineCurve, ArcCurve, HelixCurve> shape;
  double duration = 1.0;
  std::optional<Vector3> up;
  bool operator==(const ParametricCurve&) const = default;
};

struct Trajectory {
  std::variant<std::vector<TimedFrame>, ParametricCurve> spec;
  // Sample count for parametric curves; explicit lists use their own length.
  std::size_t samples = kDefaultSamples;
  bool operator==(const Trajectory&) const = default;

  std::size_t frame_count() const;
};

/*
 * Tool frames of `chain` sampled along a piecewise linear joint-space path
 * through `waypoints`, `samples` frames evenly spaced in path parameter, with
 * time equal to the sample index. Angles are clamped into joint limits.
 */
std::vector<TimedFrame> record_frames(const KinematicChain& chain, const Transform& base_pose,
                                      const std::vector<Pose>& waypoints, std::size_t samples);

/// Target frames for IK. Throws ValidationError on invalid input.
std::vector<Transform> discretize(const Trajectory& t);

struct Task {
  std::string library_ref;
  // Root part of the search; defaults to the first base in the library.
  std::optional<std::string> base;
  Transform base_pose;
  Trajectory trajectory;
  std::string end_effector;
  std::vector<Obstacle> obstacles;
  ErrorMetric metric;
  double clearance = kDefaultClearance;
  SynthesisConfig synthesis;
  IkConfig ik;

  bool operator==(const Task&) const = default;
};

/// Checks library references; throws ValidationError.
void validate_task(const Task& task, const PartLibrary& lib);
std::string root_base(const Task& task, const PartLibrary& lib);

/// Task file (format "armtask/1").
Task parse_task(std::string_view text);
std::string save_task(const Task& task);

}  // namespace armsynth

#endif  // ARMSYNTH_TASK_HPP
