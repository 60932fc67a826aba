#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "armsynth/error.hpp"
#include "armsynth/kinematics.hpp"
#include "support/fixtures.hpp"

using namespace armsynth;

namespace {

Vector3 planar_tip(const std::vector<double>& lengths, const Pose& q) {
  Vector3 p = Vector3::Zero();
  double s = 0;
  for (std::size_t k = 0; k < lengths.size(); ++k) {
    s += q[static_cast<Eigen::Index>(k)];
    p += lengths[k] * Vector3(std::cos(s), std::sin(s), 0);
  }
  return p;
}

}  // namespace

TEST_CASE("planar arms match the closed form") {
  const PartLibrary lib = fixtures::planar_library();
  const Design d2 = fixtures::planar_arm(lib, {"link_a", "link_b"});
  const Design d3 = fixtures::planar_arm(lib, {"link_a", "link_b", "link_c"});
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-std::numbers::pi, std::numbers::pi);
  for (int i = 0; i < 200; ++i) {
    const Pose q2 = Eigen::Vector2d(u(rng), u(rng));
    const Pose q3 = Eigen::Vector3d(u(rng), u(rng), u(rng));
    const auto f2 = forward_kinematics(lib, d2, Transform::Identity(), q2);
    const auto f3 = forward_kinematics(lib, d3, Transform::Identity(), q3);
    CHECK((f2.back().translation() - planar_tip({0.4, 0.3}, q2)).norm() < 1e-12);
    CHECK((f3.back().translation() - planar_tip({0.4, 0.3, 0.2}, q3)).norm() < 1e-12);
    // Tool x axis follows the summed angle.
    const double s = q3.sum();
    CHECK((f3.back().rotation() * Vector3::UnitX() - Vector3(std::cos(s), std::sin(s), 0)).norm() < 1e-12);
  }
}

TEST_CASE("forward kinematics lists one frame per part") {
  const PartLibrary lib = fixtures::planar_library();
  const Design d = fixtures::planar_arm(lib, {"link_a"});
  const auto frames = forward_kinematics(lib, d, Transform::Identity(), Pose::Zero(1));
  CHECK(frames.size() == d.part_count());

  const Transform base_pose = Transform::FromAxisAngle(Vector3::UnitX(), 0.3, Vector3(1, 2, 3));
  const auto moved = forward_kinematics(lib, d, base_pose, Pose::Constant(1, 0.4));
  const auto local = forward_kinematics(lib, d, Transform::Identity(), Pose::Constant(1, 0.4));
  for (std::size_t i = 0; i < moved.size(); ++i) CHECK(moved[i].isApprox(base_pose * local[i], 1e-12));
}

TEST_CASE("unterminated designs gain the virtual end-effector") {
  const PartLibrary lib = fixtures::planar_library();
  Design d("base");
  d = append_part(lib, d, "base->joint");
  d = append_part(lib, d, "joint->link_b");
  const KinematicChain chain(lib, d);
  CHECK(chain.has_virtual_tip());
  CHECK(chain.size() == d.part_count() + 1);
  const auto frames = forward_kinematics(lib, d, Transform::Identity(), Pose::Constant(1, std::numbers::pi / 2));
  CHECK(frames.size() == d.part_count() + 1);
  CHECK((frames.back().translation() - Vector3(0, 0.3, 0)).norm() < 1e-12);

  const KinematicChain base_only(lib, Design("base"));
  CHECK(base_only.dof() == 0);
  CHECK(base_only.tool_frame(Transform::Identity(), Pose(0)) == Transform::Identity());

  const KinematicChain closed(lib, fixtures::planar_arm(lib, {"link_a"}));
  CHECK_FALSE(closed.has_virtual_tip());
}

TEST_CASE("designs track signature, cost and DOF") {
  const PartLibrary lib = fixtures::arm_library();
  const Design d = fixtures::arm_design(lib, {"yaw", "long", "pitch", "short", "gripper"});
  CHECK(d.signature() == "base/base->yaw/yaw->long/long->pitch/pitch->short/short->gripper");
  CHECK(d.part_count() == 6);
  CHECK(d.tip() == "gripper");
  CHECK(design_cost(lib, d) == 2 + 1 + 2 + 1 + 0.5);
  CHECK(design_dof(lib, d) == 2);
  CHECK(is_terminated(lib, d));
  CHECK(Design::replay(lib, "base", d.rule_ids()) == d);
}

TEST_CASE("illegal appends throw") {
  const PartLibrary lib = fixtures::arm_library();
  const Design d = fixtures::arm_design(lib, {"yaw"});
  CHECK_THROWS_AS(append_part(lib, d, "short->yaw"), KinematicsError);
  CHECK_THROWS_AS(append_part(lib, d, "missing"), std::exception);
  const Design done = fixtures::arm_design(lib, {"yaw", "short", "gripper"});
  CHECK_THROWS_AS(append_part(lib, done, "short->yaw"), KinematicsError);
  CHECK_THROWS_AS(Design::replay(lib, "yaw", {}), std::exception);
}

TEST_CASE("pose dimension is checked") {
  const PartLibrary lib = fixtures::planar_library();
  const KinematicChain chain(lib, fixtures::planar_arm(lib, {"link_a", "link_b"}));
  CHECK_THROWS_AS(chain.tool_frame(Transform::Identity(), Pose::Zero(3)), KinematicsError);
}

TEST_CASE("joint limits clamp") {
  std::vector<Part> parts{fixtures::make_part("base", PartKind::Base, 0),
                          fixtures::make_actuator("j", Vector3::UnitZ(), 1)};
  parts[0].output_frames.push_back(Transform::Identity());
  parts[1].joint->lower = -0.5;
  parts[1].joint->upper = 0.25;
  const PartLibrary lib(parts, {fixtures::make_rule("base", "j")});
  const KinematicChain chain(lib, Design::replay(lib, "base", {"base->j"}));
  CHECK(chain.clamp(Pose::Constant(1, 2.0))[0] == 0.25);
  CHECK(chain.clamp(Pose::Constant(1, -2.0))[0] == -0.5);
  CHECK(chain.within_limits(Pose::Constant(1, 0.1)));
  CHECK_FALSE(chain.within_limits(Pose::Constant(1, 0.3)));
}

TEST_CASE("full-turn joints wrap instead of clamping") {
  const PartLibrary lib = fixtures::planar_library();
  const KinematicChain chain(lib, fixtures::planar_arm(lib, {"link_a"}));
  const Pose q = chain.clamp(Pose::Constant(1, 3.5));
  CHECK(q[0] == doctest::Approx(3.5 - 2 * std::numbers::pi));
  CHECK(chain.within_limits(q));
  CHECK(chain.tool_frame(Transform::Identity(), q).isApprox(
      chain.tool_frame(Transform::Identity(), Pose::Constant(1, 3.5)), 1e-12));
  CHECK(chain.clamp(Pose::Constant(1, -0.5))[0] == -0.5);
}

TEST_CASE("error metrics") {
  const Transform target = Transform::FromAxisAngle(Vector3::UnitX(), 0.0, Vector3(1, 0, 0));
  const Transform tilted = Transform::FromAxisAngle(Vector3::UnitX(), 0.5, Vector3(1, 0.1, 0));
  const Transform spun = Transform::FromAxisAngle(Vector3::UnitZ(), 0.5, Vector3(1, 0, 0));

  CHECK(pose_error(target, tilted, ErrorMetric::position_only()) == doctest::Approx(0.01));
  CHECK(pose_error(target, tilted, ErrorMetric::position_and_axis(0.1)) ==
        doctest::Approx(0.01 + 0.1 * 0.25));
  CHECK(pose_error(target, tilted, ErrorMetric::full_pose(0.1)) == doctest::Approx(0.01 + 0.1 * 0.25));
  // Rotation about the tool axis is invisible to the axis metric.
  CHECK(pose_error(target, spun, ErrorMetric::position_and_axis()) == doctest::Approx(0.0));
  CHECK(pose_error(target, spun, ErrorMetric::full_pose(0.2)) == doctest::Approx(0.2 * 0.25));

  std::mt19937_64 rng(2);
  std::normal_distribution<double> n;
  for (int i = 0; i < 100; ++i) {
    const Transform a(Eigen::Quaterniond(n(rng), n(rng), n(rng), n(rng)), Vector3(n(rng), n(rng), n(rng)));
    const Transform b(Eigen::Quaterniond(n(rng), n(rng), n(rng), n(rng)), Vector3(n(rng), n(rng), n(rng)));
    for (const ErrorMetric& m : {ErrorMetric::position_only(), ErrorMetric::position_and_axis(0.3),
                                 ErrorMetric::full_pose(0.3)}) {
      const Eigen::VectorXd r = pose_residual(a, b, m);
      CHECK(static_cast<std::size_t>(r.size()) == m.residual_size());
      CHECK(r.squaredNorm() == doctest::Approx(pose_error(a, b, m)).epsilon(1e-10));
    }
  }
}

TEST_CASE("design files round-trip") {
  const PartLibrary lib = fixtures::arm_library();
  const Design d = fixtures::arm_design(lib, {"pitch", "long", "yaw", "short"});
  const std::string text = save_design(d);
  CHECK(parse_design(lib, text) == d);
  CHECK(save_design(parse_design(lib, text)) == text);
  CHECK_THROWS_AS(parse_design(lib, R"({"format": "armdesign/1", "base": "base", "rules": ["short->yaw"]})"),
                  ValidationError);
  CHECK_THROWS_AS(parse_design(lib, R"({"format": "armdesign/1", "base": "base", "rules": [3]})"),
                  ParseError);
}
