#ifndef ARMSYNTH_RIGID_TRANSFORM_HPP
#define ARMSYNTH_RIGID_TRANSFORM_HPP

#include <algorithm>
#include <cmath>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace armsynth {

/*
 * Element of SE(3) stored as a unit quaternion plus a translation.
 *
 * Composition follows the usual convention: (A * B) maps points from B's
 * frame into A's parent frame, i.e. p_world = A * (B * p).
 */
template <typename Scalar>
class RigidTransform {
 public:
  using Quaternion = Eigen::Quaternion<Scalar>;
  using Vector3 = Eigen::Matrix<Scalar, 3, 1>;
  using Matrix3 = Eigen::Matrix<Scalar, 3, 3>;
  using Matrix4 = Eigen::Matrix<Scalar, 4, 4>;

  RigidTransform() : rotation_(Quaternion::Identity()), translation_(Vector3::Zero()) {}

  // Normalizes the rotation.
  RigidTransform(const Quaternion& rotation, const Vector3& translation)
      : rotation_(rotation.normalized()), translation_(translation) {}

  static RigidTransform Identity() { return RigidTransform(); }

  // Caller guarantees |rotation| == 1; the coefficients are stored verbatim.
  static RigidTransform FromUnitQuaternion(const Quaternion& rotation, const Vector3& translation) {
    return RigidTransform(rotation, translation, Raw{});
  }

  static RigidTransform FromTranslation(const Vector3& t) {
    return RigidTransform(Quaternion::Identity(), t, Raw{});
  }

  // `axis` need not be normalized; a zero axis yields a pure translation.
  static RigidTransform FromAxisAngle(const Vector3& axis, Scalar angle,
                                      const Vector3& t = Vector3::Zero()) {
    const Scalar n = axis.norm();
    if (n == Scalar(0)) return FromTranslation(t);
    return RigidTransform(Quaternion(Eigen::AngleAxis<Scalar>(angle, axis / n)), t);
  }

  static RigidTransform FromMatrix(const Matrix3& r, const Vector3& t) {
    return RigidTransform(Quaternion(r), t);
  }

  const Quaternion& rotation() const { return rotation_; }
  const Vector3& translation() const { return translation_; }
  Matrix3 rotation_matrix() const { return rotation_.toRotationMatrix(); }

  Matrix4 matrix() const {
    Matrix4 m = Matrix4::Identity();
    m.template topLeftCorner<3, 3>() = rotation_matrix();
    m.template topRightCorner<3, 1>() = translation_;
    return m;
  }

  // Composition does not renormalize, so composing with the identity is
  // bit-exact.
  RigidTransform operator*(const RigidTransform& other) const {
    return RigidTransform(rotation_ * other.rotation_,
                          rotation_ * other.translation_ + translation_, Raw{});
  }

  Vector3 operator*(const Vector3& p) const { return rotation_ * p + translation_; }

  RigidTransform inverse() const {
    const Quaternion inv = rotation_.conjugate();
    return RigidTransform(inv, -(inv * translation_), Raw{});
  }

  RigidTransform normalized() const { return RigidTransform(rotation_, translation_); }

  template <typename Other>
  RigidTransform<Other> cast() const {
    return RigidTransform<Other>(rotation_.template cast<Other>(),
                                 translation_.template cast<Other>());
  }

  bool operator==(const RigidTransform& o) const {
    return rotation_.coeffs() == o.rotation_.coeffs() && translation_ == o.translation_;
  }

  bool isApprox(const RigidTransform& o, Scalar tol) const {
    // q and -q encode the same rotation.
    const Scalar dq = std::min((rotation_.coeffs() - o.rotation_.coeffs()).norm(),
                               (rotation_.coeffs() + o.rotation_.coeffs()).norm());
    return dq <= tol && (translation_ - o.translation_).norm() <= tol;
  }

 private:
  struct Raw {};
  RigidTransform(const Quaternion& q, const Vector3& t, Raw) : rotation_(q), translation_(t) {}

  Quaternion rotation_;
  Vector3 translation_;
};

using Transform = RigidTransform<double>;
using Vector3 = Eigen::Vector3d;

/// Geodesic angle in [0, pi] between two rotations.
template <typename Scalar>
Scalar rotation_angle(const Eigen::Quaternion<Scalar>& a, const Eigen::Quaternion<Scalar>& b) {
  Eigen::Quaternion<Scalar> rel = a * b.conjugate();
  const Scalar n = rel.vec().norm();
  return Scalar(2) * std::atan2(n, std::abs(rel.w()));
}

/// Angle in [0, pi] between two vectors, stable near 0 and pi.
template <typename Derived1, typename Derived2>
typename Derived1::Scalar vector_angle(const Eigen::MatrixBase<Derived1>& a,
                                       const Eigen::MatrixBase<Derived2>& b) {
  return std::atan2(a.cross(b).norm(), a.dot(b));
}

/// Rotation vector phi with exp([phi]x) = R(q); |phi| in [0, pi].
template <typename Scalar>
Eigen::Matrix<Scalar, 3, 1> rotation_log(Eigen::Quaternion<Scalar> q) {
  if (q.w() < Scalar(0)) q.coeffs() = -q.coeffs();
  const Scalar n = q.vec().norm();
  if (n < Scalar(1e-12)) return Scalar(2) * q.vec() / q.w();
  const Scalar angle = Scalar(2) * std::atan2(n, q.w());
  return q.vec() * (angle / n);
}

}  // namespace armsynth

#endif  // ARMSYNTH_RIGID_TRANSFORM_HPP
