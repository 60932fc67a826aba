#include "armsynth/collision.hpp"

#include "armsynth/kinematics.hpp"

namespace armsynth {

CollisionReport check_pose_collisions(const KinematicChain& chain, const Transform& base_pose,
                                      const Eigen::VectorXd& q,
                                      std::span<const Obstacle> obstacles, double clearance,
                                      bool stop_at_first) {
  CollisionReport report;
  const std::vector<Transform> bodies = chain.body_frames(base_pose, q);

  // World-space geometry per chain element.
  std::vector<std::vector<CollisionPrimitive>> world(chain.size());
  for (std::size_t i = 0; i < chain.size(); ++i) {
    for (const auto& g : chain.element(i).part->collision_geometry)
      world[i].push_back(transformed(g, bodies[i]));
  }

  for (std::size_t i = 0; i < chain.size(); ++i) {
    for (const Obstacle& ob : obstacles) {
      double closest = std::numeric_limits<double>::infinity();
      for (const auto& g : world[i]) closest = std::min(closest, primitive_distance(g, ob.primitive));
      if (closest < clearance) {
        report.obstacle_contacts.push_back({i, chain.element(i).part->id, ob.id, closest});
        if (stop_at_first) return report;
      }
    }
  }

  for (std::size_t i = 0; i < chain.size(); ++i) {
    for (std::size_t j = i + 2; j < chain.size(); ++j) {
      double closest = std::numeric_limits<double>::infinity();
      for (const auto& a : world[i])
        for (const auto& b : world[j]) closest = std::min(closest, primitive_distance(a, b));
      if (closest < 0.0) {
        report.self_contacts.push_back(
            {i, j, chain.element(i).part->id, chain.element(j).part->id, closest});
        if (stop_at_first) return report;
      }
    }
  }
  return report;
}

CollisionReport check_pose_collisions(const PartLibrary& lib, const Design& d,
                                      const Transform& base_pose, const Eigen::VectorXd& q,
                                      std::span<const Obstacle> obstacles, double clearance) {
  return check_pose_collisions(KinematicChain(lib, d), base_pose, q, obstacles, clearance);
}

}  // namespace armsynth
