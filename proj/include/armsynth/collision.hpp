#ifndef ARMSYNTH_COLLISION_HPP
#define ARMSYNTH_COLLISION_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Core>

#include "armsynth/rigid_transform.hpp"

namespace armsynth {

template <typename Scalar>
struct Sphere {
  Eigen::Matrix<Scalar, 3, 1> center;
  Scalar radius;
  bool operator==(const Sphere&) const = default;
};

template <typename Scalar>
struct Capsule {
  Eigen::Matrix<Scalar, 3, 1> endpoint_a;
  Eigen::Matrix<Scalar, 3, 1> endpoint_b;
  Scalar radius;
  bool operator==(const Capsule&) const = default;
};

template <typename Scalar>
struct Box {
  Eigen::Matrix<Scalar, 3, 1> center;
  Eigen::Matrix<Scalar, 3, 1> half_extents;
  Eigen::Quaternion<Scalar> orientation = Eigen::Quaternion<Scalar>::Identity();
  bool operator==(const Box& o) const {
    return center == o.center && half_extents == o.half_extents &&
           orientation.coeffs() == o.orientation.coeffs();
  }
};

template <typename Scalar>
using PrimitiveT = std::variant<Sphere<Scalar>, Capsule<Scalar>, Box<Scalar>>;

using CollisionPrimitive = PrimitiveT<double>;

/// Sample count used along a capsule axis when measuring against a box.
inline constexpr int kBoxCapsuleSamples = 64;
inline constexpr double kDefaultClearance = 0.005;

namespace detail {

template <typename Scalar>
using Vec3 = Eigen::Matrix<Scalar, 3, 1>;

template <typename Scalar>
Scalar point_segment_distance(const Vec3<Scalar>& p, const Vec3<Scalar>& a,
                              const Vec3<Scalar>& b) {
  const Vec3<Scalar> ab = b - a;
  const Scalar len2 = ab.squaredNorm();
  Scalar t = len2 > Scalar(0) ? (p - a).dot(ab) / len2 : Scalar(0);
  t = std::clamp(t, Scalar(0), Scalar(1));
  return (a + t * ab - p).norm();
}

// Closest distance between segments p1q1 and p2q2 (Ericson, RTCD 5.1.9).
template <typename Scalar>
Scalar segment_segment_distance(const Vec3<Scalar>& p1, const Vec3<Scalar>& q1,
                                const Vec3<Scalar>& p2, const Vec3<Scalar>& q2) {
  constexpr Scalar eps = Scalar(1e-14);
  const Vec3<Scalar> d1 = q1 - p1;
  const Vec3<Scalar> d2 = q2 - p2;
  const Vec3<Scalar> r = p1 - p2;
  const Scalar a = d1.squaredNorm();
  const Scalar e = d2.squaredNorm();
  const Scalar f = d2.dot(r);
  Scalar s = 0;
  Scalar t = 0;
  if (a <= eps && e <= eps) return r.norm();
  if (a <= eps) {
    t = std::clamp(f / e, Scalar(0), Scalar(1));
  } else {
    const Scalar c = d1.dot(r);
    if (e <= eps) {
      s = std::clamp(-c / a, Scalar(0), Scalar(1));
    } else {
      const Scalar b = d1.dot(d2);
      const Scalar denom = a * e - b * b;
      s = denom > eps ? std::clamp((b * f - c * e) / denom, Scalar(0), Scalar(1)) : Scalar(0);
      t = (b * s + f) / e;
      if (t < Scalar(0)) {
        t = 0;
        s = std::clamp(-c / a, Scalar(0), Scalar(1));
      } else if (t > Scalar(1)) {
        t = 1;
        s = std::clamp((b - c) / a, Scalar(0), Scalar(1));
      }
    }
  }
  return ((p1 + s * d1) - (p2 + t * d2)).norm();
}

// Signed distance from a point to a box surface (negative inside).
template <typename Scalar>
Scalar point_box_signed_distance(const Vec3<Scalar>& p, const Box<Scalar>& box) {
  const Vec3<Scalar> local = box.orientation.conjugate() * (p - box.center);
  const Vec3<Scalar> q = local.cwiseAbs() - box.half_extents;
  const Scalar outside = q.cwiseMax(Scalar(0)).norm();
  const Scalar inside = std::min(q.maxCoeff(), Scalar(0));
  return outside + inside;
}

template <typename Scalar>
Scalar sphere_sphere(const Sphere<Scalar>& a, const Sphere<Scalar>& b) {
  return (a.center - b.center).norm() - a.radius - b.radius;
}

template <typename Scalar>
Scalar sphere_capsule(const Sphere<Scalar>& s, const Capsule<Scalar>& c) {
  return point_segment_distance(s.center, c.endpoint_a, c.endpoint_b) - s.radius - c.radius;
}

template <typename Scalar>
Scalar capsule_capsule(const Capsule<Scalar>& a, const Capsule<Scalar>& b) {
  return segment_segment_distance(a.endpoint_a, a.endpoint_b, b.endpoint_a, b.endpoint_b) -
         a.radius - b.radius;
}

template <typename Scalar>
Scalar sphere_box(const Sphere<Scalar>& s, const Box<Scalar>& b) {
  return point_box_signed_distance(s.center, b) - s.radius;
}

// The signed point-box distance is 1-Lipschitz, so the sampled minimum minus
// half the sample spacing bounds the true segment-box distance from below.
template <typename Scalar>
Scalar capsule_box(const Capsule<Scalar>& c, const Box<Scalar>& b) {
  const Vec3<Scalar> d = c.endpoint_b - c.endpoint_a;
  Scalar best = std::numeric_limits<Scalar>::infinity();
  for (int i = 0; i < kBoxCapsuleSamples; ++i) {
    const Scalar t = Scalar(i) / Scalar(kBoxCapsuleSamples - 1);
    best = std::min(best, point_box_signed_distance<Scalar>(c.endpoint_a + t * d, b));
  }
  const Scalar half_spacing = d.norm() / Scalar(2 * (kBoxCapsuleSamples - 1));
  return best - half_spacing - c.radius;
}

// Largest separating gap over the 15 SAT axes. Projection gaps never exceed
// the Euclidean distance, and all gaps are <= 0 iff the boxes overlap.
template <typename Scalar>
Scalar box_box(const Box<Scalar>& a, const Box<Scalar>& b) {
  const Eigen::Matrix<Scalar, 3, 3> ra = a.orientation.toRotationMatrix();
  const Eigen::Matrix<Scalar, 3, 3> rb = b.orientation.toRotationMatrix();
  const Vec3<Scalar> delta = b.center - a.center;
  Scalar best = -std::numeric_limits<Scalar>::infinity();
  auto test_axis = [&](Vec3<Scalar> axis) {
    const Scalar n = axis.norm();
    if (n < Scalar(1e-9)) return;
    axis /= n;
    const Scalar extent_a = (ra.transpose() * axis).cwiseAbs().dot(a.half_extents);
    const Scalar extent_b = (rb.transpose() * axis).cwiseAbs().dot(b.half_extents);
    best = std::max(best, std::abs(delta.dot(axis)) - extent_a - extent_b);
  };
  for (int i = 0; i < 3; ++i) {
    test_axis(ra.col(i));
    test_axis(rb.col(i));
    for (int j = 0; j < 3; ++j) test_axis(ra.col(i).cross(rb.col(j)));
  }
  return best;
}

}  // namespace detail

/*
 * Signed separation between two primitives expressed in a common frame.
 * Negative values indicate overlap. Sphere and capsule pairs are exact; any
 * pair involving a box is a conservative lower bound.
 */
template <typename Scalar>
Scalar primitive_distance(const PrimitiveT<Scalar>& a, const PrimitiveT<Scalar>& b) {
  using S = Sphere<Scalar>;
  using C = Capsule<Scalar>;
  using B = Box<Scalar>;
  return std::visit(
      [](const auto& x, const auto& y) -> Scalar {
        using X = std::decay_t<decltype(x)>;
        using Y = std::decay_t<decltype(y)>;
        if constexpr (std::is_same_v<X, S> && std::is_same_v<Y, S>) return detail::sphere_sphere(x, y);
        else if constexpr (std::is_same_v<X, S> && std::is_same_v<Y, C>) return detail::sphere_capsule(x, y);
        else if constexpr (std::is_same_v<X, C> && std::is_same_v<Y, S>) return detail::sphere_capsule(y, x);
        else if constexpr (std::is_same_v<X, C> && std::is_same_v<Y, C>) return detail::capsule_capsule(x, y);
        else if constexpr (std::is_same_v<X, S> && std::is_same_v<Y, B>) return detail::sphere_box(x, y);
        else if constexpr (std::is_same_v<X, B> && std::is_same_v<Y, S>) return detail::sphere_box(y, x);
        else if constexpr (std::is_same_v<X, C> && std::is_same_v<Y, B>) return detail::capsule_box(x, y);
        else if constexpr (std::is_same_v<X, B> && std::is_same_v<Y, C>) return detail::capsule_box(y, x);
        else return detail::box_box(x, y);
      },
      a, b);
}

template <typename Scalar>
PrimitiveT<Scalar> transformed(const PrimitiveT<Scalar>& p, const RigidTransform<Scalar>& t) {
  return std::visit(
      [&t](const auto& x) -> PrimitiveT<Scalar> {
        using X = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<X, Sphere<Scalar>>) {
          return Sphere<Scalar>{t * x.center, x.radius};
        } else if constexpr (std::is_same_v<X, Capsule<Scalar>>) {
          return Capsule<Scalar>{t * x.endpoint_a, t * x.endpoint_b, x.radius};
        } else {
          return Box<Scalar>{t * x.center, x.half_extents, t.rotation() * x.orientation};
        }
      },
      p);
}

/// Throws std::invalid_argument when radii or half extents are not positive.
void validate_primitive(const CollisionPrimitive& p);

struct Obstacle {
  std::string id;
  CollisionPrimitive primitive;
  bool operator==(const Obstacle&) const = default;
};

struct ObstacleContact {
  std::size_t chain_index;  // position in the design chain, base == 0
  std::string part_id;
  std::string obstacle_id;
  double distance;
};

struct SelfContact {
  std::size_t first_index;
  std::size_t second_index;
  std::string first_part;
  std::string second_part;
  double distance;
};

struct CollisionReport {
  std::vector<ObstacleContact> obstacle_contacts;
  std::vector<SelfContact> self_contacts;
  bool empty() const { return obstacle_contacts.empty() && self_contacts.empty(); }
};

class PartLibrary;
class Design;
class KinematicChain;

/*
 * Lists every (part primitive, obstacle) pair closer than `clearance` and
 * every overlapping pair of non-adjacent chain parts. Adjacent parts touch at
 * their mounts and are skipped.
 */
CollisionReport check_pose_collisions(const PartLibrary& lib, const Design& d,
                                      const Transform& base_pose, const Eigen::VectorXd& q,
                                      std::span<const Obstacle> obstacles,
                                      double clearance = kDefaultClearance);

CollisionReport check_pose_collisions(const KinematicChain& chain, const Transform& base_pose,
                                      const Eigen::VectorXd& q,
                                      std::span<const Obstacle> obstacles, double clearance,
                                      bool stop_at_first = false);

}  // namespace armsynth

#endif  // ARMSYNTH_COLLISION_HPP
