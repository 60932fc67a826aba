#include "armsynth/ik_solver.hpp"

#include <cmath>
#include <limits>
#include <optional>
#include <random>

#include <Eigen/Cholesky>

#include "armsynth/error.hpp"

namespace armsynth {

namespace {

Eigen::Matrix3d skew(const Vector3& v) {
  Eigen::Matrix3d m;
  m << 0, -v.z(), v.y(), v.z(), 0, -v.x(), -v.y(), v.x(), 0;
  return m;
}

// Inverse of the left Jacobian of SO(3) at rotation vector phi.
Eigen::Matrix3d inverse_left_jacobian(const Vector3& phi) {
  const double theta = phi.norm();
  const Eigen::Matrix3d k = skew(phi);
  double c;
  if (theta < 1e-4) {
    c = 1.0 / 12.0 + theta * theta / 720.0;
  } else {
    c = 1.0 / (theta * theta) - (1.0 + std::cos(theta)) / (2.0 * theta * std::sin(theta));
  }
  return Eigen::Matrix3d::Identity() - 0.5 * k + c * k * k;
}

double residual_error(const KinematicChain& chain, const Transform& base_pose, const Transform& target,
                      const ErrorMetric& metric, const Pose& q) {
  return pose_error(target, chain.tool_frame(base_pose, q), metric);
}

}  // namespace

Eigen::MatrixXd jacobian(const KinematicChain& chain, const Transform& base_pose, const Pose& q,
                         const Transform& target, const ErrorMetric& metric) {
  const std::vector<Transform> bodies = chain.body_frames(base_pose, q);
  const Transform& tool = bodies.back();
  const Vector3 tool_point = tool.translation();
  const auto rows = static_cast<Eigen::Index>(metric.residual_size());
  Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(rows, static_cast<Eigen::Index>(chain.dof()));
  if (chain.dof() == 0) return jac;

  const double scale = std::sqrt(metric.w_rot);
  Eigen::Matrix3d rot_map = Eigen::Matrix3d::Zero();
  // For PositionAndAxis the rotational row block is nonlinear in the tool
  // axis; precompute its pieces.
  Vector3 za, zt, c;
  double s = 0, angle = 0, k = 0, ratio = 1;
  if (metric.kind == ErrorMetric::Kind::FullPose) {
    const Vector3 phi = rotation_log(Eigen::Quaterniond(tool.rotation() * target.rotation().conjugate()));
    rot_map = inverse_left_jacobian(phi);
  } else if (metric.kind == ErrorMetric::Kind::PositionAndAxis) {
    za = tool.rotation() * Vector3::UnitZ();
    zt = target.rotation() * Vector3::UnitZ();
    c = zt.cross(za);
    s = c.norm();
    angle = std::atan2(s, zt.dot(za));
    if (angle < 1e-3) {
      k = 1.0 / 3.0 + 2.0 * angle * angle / 15.0;
      ratio = 1.0 + angle * angle / 6.0;
    } else {
      k = (s - angle * std::cos(angle)) / (s * s * s);
      ratio = angle / s;
    }
  }

  for (std::size_t i = 0; i < chain.size(); ++i) {
    const auto& e = chain.element(i);
    if (e.joint_index < 0) continue;
    const Vector3 axis = bodies[i].rotation() * e.part->joint->axis;
    const Vector3 origin = bodies[i].translation();
    auto col = jac.col(e.joint_index);
    col.head<3>() = axis.cross(tool_point - origin);
    if (metric.kind == ErrorMetric::Kind::FullPose) {
      col.tail<3>() = scale * rot_map * axis;
    } else if (metric.kind == ErrorMetric::Kind::PositionAndAxis) {
      const Vector3 dz = axis.cross(za);
      const Vector3 dc = zt.cross(dz);
      col.tail<3>() = scale * (-(zt.dot(dz)) * k * c + ratio * dc);
    }
  }
  return jac;
}

Eigen::MatrixXd jacobian(const PartLibrary& lib, const Design& d, const Transform& base_pose,
                         const Pose& q, const Transform& target, const ErrorMetric& metric) {
  return jacobian(KinematicChain(lib, d), base_pose, q, target, metric);
}

DlsRun refine_pose(const KinematicChain& chain, const Transform& base_pose, const Transform& target,
                   const ErrorMetric& metric, const Pose& start, const IkConfig& cfg,
                   std::vector<double>* history) {
  Pose q = chain.clamp(start);
  double err = residual_error(chain, base_pose, target, metric, q);
  if (history) history->push_back(err);
  if (chain.dof() == 0) return {q, err, 0};

  const auto n = static_cast<Eigen::Index>(chain.dof());
  double mu = cfg.damping;
  int it = 0;
  for (; it < cfg.max_iterations_per_frame; ++it) {
    const Transform tool = chain.tool_frame(base_pose, q);
    const Eigen::VectorXd r = pose_residual(target, tool, metric);
    const Eigen::MatrixXd jac = jacobian(chain, base_pose, q, target, metric);
    const Eigen::MatrixXd h = jac.transpose() * jac + mu * Eigen::MatrixXd::Identity(n, n);
    const Eigen::VectorXd step = -h.ldlt().solve(jac.transpose() * r);
    const Pose candidate = chain.clamp(q + step);
    const double cand_err = residual_error(chain, base_pose, target, metric, candidate);
    if (cand_err < err) {
      const double improvement = err - cand_err;
      q = candidate;
      err = cand_err;
      if (history) history->push_back(err);
      mu = std::max(mu * 0.5, 1e-12);
      if (improvement < cfg.convergence_tolerance) {
        ++it;
        break;
      }
    } else {
      mu *= 10.0;
      if (mu > 1e12) {
        ++it;
        break;
      }
    }
  }
  return {q, err, it};
}

namespace {

struct Candidate {
  Pose pose;
  double error;
  bool collides;
  double score;
};

std::uint64_t frame_seed(std::uint64_t seed, std::size_t frame) {
  // splitmix64 step keeps per-frame streams decorrelated.
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (frame + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

bool has_geometry(const KinematicChain& chain, std::span<const Obstacle> obstacles) {
  if (!obstacles.empty()) return true;
  std::size_t with_geometry = 0;
  for (std::size_t i = 0; i < chain.size(); ++i)
    if (!chain.element(i).part->collision_geometry.empty()) ++with_geometry;
  // Self-collision needs two non-adjacent parts with geometry.
  return with_geometry >= 2 && chain.size() >= 3;
}

}  // namespace

IkResult solve_ik(const KinematicChain& chain, const Transform& base_pose,
                  std::span<const Transform> targets, std::span<const Obstacle> obstacles,
                  const ErrorMetric& metric, const IkConfig& cfg, double clearance,
                  std::span<const Pose> warm_start) {
  if (targets.empty()) throw KinematicsError("solve_ik needs at least one target");
  if (!warm_start.empty() && warm_start.size() != targets.size())
    throw KinematicsError("warm start must provide one pose per target");

  const bool check_collisions = has_geometry(chain, obstacles);
  auto make_candidate = [&](DlsRun run) {
    Candidate c{std::move(run.pose), run.error, false, run.error};
    if (check_collisions) {
      c.collides = !check_pose_collisions(chain, base_pose, c.pose, obstacles, clearance, true).empty();
      if (c.collides) c.score = std::max(c.error, cfg.collision_penalty);
    }
    return c;
  };

  IkResult result;
  result.per_frame_error.reserve(targets.size());
  result.poses.reserve(targets.size());
  Pose previous = chain.clamp(Pose::Zero(static_cast<Eigen::Index>(chain.dof())));

  for (std::size_t i = 0; i < targets.size(); ++i) {
    const Transform& target = targets[i];
    std::optional<Candidate> best;
    auto consider = [&](Candidate c) {
      if (!best || c.score < best->score) best = std::move(c);
    };
    if (!warm_start.empty()) consider(make_candidate(refine_pose(chain, base_pose, target, metric, warm_start[i], cfg)));
    consider(make_candidate(refine_pose(chain, base_pose, target, metric, previous, cfg)));

    if (chain.dof() > 0 && best->score > cfg.convergence_tolerance) {
      std::mt19937_64 rng(frame_seed(cfg.seed, i));
      for (int r = 0; r < cfg.restarts; ++r) {
        Pose seed(static_cast<Eigen::Index>(chain.dof()));
        for (std::size_t j = 0; j < chain.dof(); ++j) {
          std::uniform_real_distribution<double> dist(chain.lower_limits()[j], chain.upper_limits()[j]);
          seed[static_cast<Eigen::Index>(j)] = dist(rng);
        }
        consider(make_candidate(refine_pose(chain, base_pose, target, metric, seed, cfg)));
        if (best->score <= cfg.convergence_tolerance) break;
      }
    }

    if (best->collides) {
      result.collision_free = false;
      result.frames_in_collision.push_back(i);
    }
    result.per_frame_error.push_back(best->score);
    previous = best->pose;
    result.poses.push_back(std::move(best->pose));
  }
  result.total_error = 0.0;
  for (double e : result.per_frame_error) result.total_error += e;
  return result;
}

IkResult solve_ik(const PartLibrary& lib, const Design& d, const Transform& base_pose,
                  std::span<const Transform> targets, std::span<const Obstacle> obstacles,
                  const ErrorMetric& metric, const IkConfig& cfg, double clearance,
                  std::span<const Pose> warm_start) {
  return solve_ik(KinematicChain(lib, d), base_pose, targets, obstacles, metric, cfg, clearance,
                  warm_start);
}

IkResult evaluate_poses(const KinematicChain& chain, const Transform& base_pose,
                        std::span<const Transform> targets, std::span<const Pose> poses,
                        std::span<const Obstacle> obstacles, const ErrorMetric& metric,
                        const IkConfig& cfg, double clearance) {
  if (poses.size() != targets.size()) throw KinematicsError("need one pose per target");
  IkResult result;
  for (std::size_t i = 0; i < targets.size(); ++i) {
    double err = residual_error(chain, base_pose, targets[i], metric, poses[i]);
    if (!check_pose_collisions(chain, base_pose, poses[i], obstacles, clearance, true).empty()) {
      result.collision_free = false;
      result.frames_in_collision.push_back(i);
      err = std::max(err, cfg.collision_penalty);
    }
    result.per_frame_error.push_back(err);
    result.poses.push_back(poses[i]);
    result.total_error += err;
  }
  return result;
}

}  // namespace armsynth
