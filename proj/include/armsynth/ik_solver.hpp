#ifndef ARMSYNTH_IK_SOLVER_HPP
#define ARMSYNTH_IK_SOLVER_HPP

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "armsynth/collision.hpp"
#include "armsynth/config.hpp"
#include "armsynth/kinematics.hpp"

namespace armsynth {

/// Tracking result of one design against a discretized trajectory (E_IK).
struct IkResult {
  double total_error = 0.0;  // m^2
  std::vector<double> per_frame_error;
  PoseSequence poses;
  bool collision_free = true;
  std::vector<std::size_t> frames_in_collision;
};

/*
 * Derivative of pose_residual(target, tool_frame(q), metric) with respect to
 * the joint angles. Rows follow the residual layout, one column per joint.
 * Position columns are axis x (tool_point - joint_origin).
 */
Eigen::MatrixXd jacobian(const KinematicChain& chain, const Transform& base_pose, const Pose& q,
                         const Transform& target, const ErrorMetric& metric);

Eigen::MatrixXd jacobian(const PartLibrary& lib, const Design& d, const Transform& base_pose,
                         const Pose& q, const Transform& target, const ErrorMetric& metric);

/// One damped least squares run from `start`. `history`, when given,
/// receives the objective after each accepted step (starting value first).
struct DlsRun {
  Pose pose;
  double error;
  int iterations;
};
DlsRun refine_pose(const KinematicChain& chain, const Transform& base_pose, const Transform& target,
                   const ErrorMetric& metric, const Pose& start, const IkConfig& cfg,
                   std::vector<double>* history = nullptr);

/*
 * Minimizes the per-frame squared pose error over the trajectory.
 *
 * Frames are solved in order; frame i starts from the solution of frame i-1
 * (frame 0 from the zero pose clamped into limits), followed by up to
 * `cfg.restarts` seeded random starts. `warm_start`, when non-empty, supplies
 * an extra per-frame starting pose tried first. Frames whose best pose collides
 * report max(error, cfg.collision_penalty).
 *
 * Designs that are not terminated by an end-effector are evaluated with the
 * virtual end-effector at their tip.
 */
IkResult solve_ik(const KinematicChain& chain, const Transform& base_pose,
                  std::span<const Transform> targets, std::span<const Obstacle> obstacles,
                  const ErrorMetric& metric, const IkConfig& cfg,
                  double clearance = kDefaultClearance,
                  std::span<const Pose> warm_start = {});

IkResult solve_ik(const PartLibrary& lib, const Design& d, const Transform& base_pose,
                  std::span<const Transform> targets, std::span<const Obstacle> obstacles,
                  const ErrorMetric& metric, const IkConfig& cfg,
                  double clearance = kDefaultClearance,
                  std::span<const Pose> warm_start = {});

/// Per-frame errors and collision flags for fixed poses (no optimization).
IkResult evaluate_poses(const KinematicChain& chain, const Transform& base_pose,
                        std::span<const Transform> targets, std::span<const Pose> poses,
                        std::span<const Obstacle> obstacles, const ErrorMetric& metric,
                        const IkConfig& cfg, double clearance = kDefaultClearance);

}  // namespace armsynth

#endif  // ARMSYNTH_IK_SOLVER_HPP
