// Fixture arms and recorded trajectories for the re-synthesis experiment.
#ifndef ARMSYNTH_TESTS_REPLICATION_HPP
#define ARMSYNTH_TESTS_REPLICATION_HPP

#include <optional>
#include <random>
#include <string>
#include <vector>

#include "armsynth/ik_solver.hpp"
#include "armsynth/task.hpp"
#include "support/fixtures.hpp"

namespace fixtures {

struct ReplicationCase {
  std::string name;
  Design original{""};
  Task task;
};

inline constexpr std::size_t kReplicationSamples = 12;

/*
 * Records the original arm moving through three random joint waypoints. The
 * waypoint draw is repeated (deterministically) until the recorded motion is
 * free of self-collision, since the fixture must be a valid design.
 */
inline std::optional<Task> recorded_task(const PartLibrary& lib, const Design& d, std::uint64_t seed) {
  const KinematicChain chain(lib, d);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int attempt = 0; attempt < 50; ++attempt) {
    std::vector<Pose> waypoints;
    for (int w = 0; w < 3; ++w) {
      Pose q(static_cast<Eigen::Index>(chain.dof()));
      for (Eigen::Index j = 0; j < q.size(); ++j) q[j] = u(rng);
      waypoints.push_back(q);
    }
    Task task;
    task.trajectory.spec = record_frames(chain, task.base_pose, waypoints, kReplicationSamples);
    task.trajectory.samples = kReplicationSamples;
    task.end_effector = d.tip();
    task.metric = ErrorMetric::position_only();
    const auto targets = discretize(task.trajectory);
    // Re-derive the poses along the path to check the original for contacts.
    bool clear = true;
    for (std::size_t i = 0; i < kReplicationSamples && clear; ++i) {
      const double s = static_cast<double>(i) / static_cast<double>(kReplicationSamples - 1) * 2.0;
      const std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(s), 1);
      const Pose q = waypoints[k] + (s - static_cast<double>(k)) * (waypoints[k + 1] - waypoints[k]);
      clear = check_pose_collisions(chain, task.base_pose, q, {}, task.clearance, true).empty();
    }
    if (clear) return task;
  }
  return std::nullopt;
}

/// Straight line in the x-z plane, tracked by a yaw + 3 pitch redundant arm.
inline Task line_task(const PartLibrary& lib, const Design& d) {
  Task task;
  task.trajectory.spec = ParametricCurve{LineCurve{Vector3(0.35, 0, 0.35), Vector3(0.5, 0, 0.05)}, 1.0, std::nullopt};
  task.trajectory.samples = kReplicationSamples;
  task.end_effector = d.tip();
  task.metric = ErrorMetric::position_only();
  (void)lib;
  return task;
}

inline std::vector<ReplicationCase> replication_cases(const PartLibrary& lib) {
  const std::vector<std::pair<std::string, std::vector<std::string>>> arms{
      {"f01_yaw_long", {"yaw", "long", "gripper"}},
      {"f02_pitch_short", {"pitch", "short", "gripper"}},
      {"f03_yaw_pitch_long", {"yaw", "pitch", "long", "gripper"}},
      {"f04_yaw_long_pitch_short", {"yaw", "long", "pitch", "short", "gripper"}},
      {"f05_planar_2r", {"pitch", "long", "pitch", "long", "gripper"}},
      {"f06_elbow_3r", {"yaw", "pitch", "long", "pitch", "short", "gripper"}},
      {"f07_offset_3r", {"yaw", "short", "pitch", "long", "pitch", "short", "gripper"}},
      {"f08_wrist_4r", {"yaw", "pitch", "long", "pitch", "long", "yaw", "short", "gripper"}},
      {"f09_planar_4r", {"yaw", "pitch", "short", "pitch", "long", "pitch", "short", "gripper"}},
  };
  std::vector<ReplicationCase> out;
  std::uint64_t seed = 100;
  for (const auto& [name, parts] : arms) {
    const Design d = arm_design(lib, parts);
    auto task = recorded_task(lib, d, seed++);
    if (task) out.push_back({name, d, *task});
  }
  const Design redundant = arm_design(lib, {"yaw", "pitch", "long", "pitch", "short", "pitch", "short", "gripper"});
  out.push_back({"f10_redundant_line", redundant, line_task(lib, redundant)});
  return out;
}

}  // namespace fixtures

#endif  // ARMSYNTH_TESTS_REPLICATION_HPP
