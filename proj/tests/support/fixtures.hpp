// Part libraries and designs shared by the test and acceptance binaries.
#ifndef ARMSYNTH_TESTS_FIXTURES_HPP
#define ARMSYNTH_TESTS_FIXTURES_HPP

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "armsynth/kinematics.hpp"
#include "armsynth/part_library.hpp"
#include "armsynth/task.hpp"

namespace fixtures {

using namespace armsynth;

inline Part make_part(std::string id, PartKind kind, double cost) {
  Part p;
  p.id = std::move(id);
  p.kind = kind;
  p.cost_weight = cost;
  return p;
}

inline Part make_actuator(std::string id, const Vector3& axis, double cost,
                          const Vector3& output = Vector3::Zero()) {
  Part p = make_part(std::move(id), PartKind::Actuator, cost);
  p.joint = Joint{axis, -std::numbers::pi, std::numbers::pi};
  p.output_frames.push_back(Transform::FromTranslation(output));
  return p;
}

// Straight link along body x with a capsule inset from both mounts.
inline Part make_link(std::string id, double length, double cost, double radius = 0.0) {
  Part p = make_part(std::move(id), PartKind::Link, cost);
  p.output_frames.push_back(Transform::FromTranslation(Vector3(length, 0, 0)));
  if (radius > 0) {
    const double inset = 2.0 * radius;
    p.collision_geometry.push_back(
        Capsule<double>{Vector3(inset, 0, 0), Vector3(length - inset, 0, 0), radius});
  }
  return p;
}

inline ConnectionRule make_rule(const std::string& parent, const std::string& child,
                                Transform t = Transform::Identity()) {
  return {parent + "->" + child, parent, child, 0, t};
}

/*
 * Planar arms: zero-length z actuators joined by links along x. The tip of
 * base/j/a/j/b/.../tool sits at sum_k L_k (cos s_k, sin s_k, 0), with s_k the
 * running sum of the joint angles.
 */
inline PartLibrary planar_library() {
  std::vector<Part> parts;
  Part base = make_part("base", PartKind::Base, 0.0);
  base.output_frames.push_back(Transform::Identity());
  parts.push_back(base);
  parts.push_back(make_actuator("joint", Vector3::UnitZ(), 1.0));
  parts.push_back(make_link("link_a", 0.4, 1.0));
  parts.push_back(make_link("link_b", 0.3, 1.0));
  parts.push_back(make_link("link_c", 0.2, 1.0));
  parts.push_back(make_part("tool", PartKind::EndEffector, 0.5));

  std::vector<ConnectionRule> rules;
  rules.push_back(make_rule("base", "joint"));
  for (const char* link : {"link_a", "link_b", "link_c"}) {
    rules.push_back(make_rule("joint", link));
    rules.push_back(make_rule(link, "joint"));
    rules.push_back(make_rule(link, "tool"));
  }
  return PartLibrary(std::move(parts), std::move(rules));
}

/// base, then one joint + link per entry of `links`, then the tool.
inline Design planar_arm(const PartLibrary& lib, const std::vector<std::string>& links) {
  std::vector<std::string> rules{"base->joint"};
  for (std::size_t i = 0; i < links.size(); ++i) {
    rules.push_back("joint->" + links[i]);
    rules.push_back(links[i] + (i + 1 < links.size() ? "->joint" : "->tool"));
  }
  return Design::replay(lib, "base", rules);
}

/*
 * Spatial arm library with six part types: a base whose mount sits 0.1 m up,
 * yaw (z) and pitch (y) actuators, short and long capsule links, and a
 * gripper. Actuators cost more than links so cheaper designs have fewer DOF.
 */
inline PartLibrary arm_library() {
  std::vector<Part> parts;
  Part base = make_part("base", PartKind::Base, 0.0);
  base.output_frames.push_back(Transform::FromTranslation(Vector3(0, 0, 0.1)));
  base.collision_geometry.push_back(Box<double>{Vector3(0, 0, 0.03), Vector3(0.03, 0.03, 0.03),
                                                Eigen::Quaterniond::Identity()});
  parts.push_back(base);
  parts.push_back(make_actuator("yaw", Vector3::UnitZ(), 2.0));
  parts.push_back(make_actuator("pitch", Vector3::UnitY(), 2.0));
  parts.push_back(make_link("short", 0.15, 1.0, 0.012));
  parts.push_back(make_link("long", 0.3, 1.0, 0.012));
  Part gripper = make_part("gripper", PartKind::EndEffector, 0.5);
  gripper.collision_geometry.push_back(Sphere<double>{Vector3::Zero(), 0.015});
  parts.push_back(gripper);

  std::vector<ConnectionRule> rules;
  rules.push_back(make_rule("base", "yaw"));
  rules.push_back(make_rule("base", "pitch"));
  for (const char* act : {"yaw", "pitch"}) {
    rules.push_back(make_rule(act, "short"));
    rules.push_back(make_rule(act, "long"));
  }
  rules.push_back(make_rule("yaw", "pitch"));
  for (const char* link : {"short", "long"}) {
    rules.push_back(make_rule(link, "yaw"));
    rules.push_back(make_rule(link, "pitch"));
    rules.push_back(make_rule(link, "gripper"));
  }
  return PartLibrary(std::move(parts), std::move(rules));
}

/// Designs of arm_library() given as a part sequence after the base.
inline Design arm_design(const PartLibrary& lib, const std::vector<std::string>& parts) {
  std::vector<std::string> rules;
  std::string prev = "base";
  for (const auto& p : parts) {
    rules.push_back(prev + "->" + p);
    prev = p;
  }
  return Design::replay(lib, "base", rules);
}

inline Pose random_pose(const KinematicChain& chain, std::mt19937_64& rng) {
  Pose q(static_cast<Eigen::Index>(chain.dof()));
  for (std::size_t j = 0; j < chain.dof(); ++j) {
    std::uniform_real_distribution<double> u(chain.lower_limits()[j], chain.upper_limits()[j]);
    q[static_cast<Eigen::Index>(j)] = u(rng);
  }
  return q;
}

/// Task tracking explicit frames with the given end-effector.
inline Task frames_task(const std::vector<Transform>& targets, std::string end_effector,
                        ErrorMetric metric = ErrorMetric::position_only()) {
  Task task;
  std::vector<TimedFrame> frames;
  for (std::size_t i = 0; i < targets.size(); ++i) frames.push_back({static_cast<double>(i), targets[i]});
  task.trajectory.spec = std::move(frames);
  task.trajectory.samples = targets.size();
  task.end_effector = std::move(end_effector);
  task.metric = metric;
  return task;
}

}  // namespace fixtures

#endif  // ARMSYNTH_TESTS_FIXTURES_HPP
