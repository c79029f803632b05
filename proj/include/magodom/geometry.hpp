#pragma once

#include <Eigen/Dense>

namespace magodom {

using Eigen::Matrix2d;
using Eigen::Matrix3d;
using Eigen::Vector2d;
using Eigen::Vector3d;

// Twist ordering convention used everywhere: (rotation, translation) =
// (phi, rho_x, rho_y).
using Twist2 = Eigen::Vector3d;

/// Wraps an angle to (-pi, pi].
double wrap_angle(double a);

/// 2x2 skew generator of so(2).
inline Matrix2d so2_hat() {
  Matrix2d w;
  w << 0.0, -1.0, 1.0, 0.0;
  return w;
}

/// Rotation about the z-axis embedded in 3D, generator form.
inline Matrix3d so3_z_hat() {
  Matrix3d w = Matrix3d::Zero();
  w(0, 1) = -1.0;
  w(1, 0) = 1.0;
  return w;
}

/// Planar rotation, stored as a 2x2 orthogonal matrix.
class Rot2 {
 public:
  Rot2() : mat_(Matrix2d::Identity()) {}
  explicit Rot2(const Matrix2d& C) : mat_(C) {}

  static Rot2 identity() { return Rot2(); }

  /// Closed-form exponential map, exp(phi^) = [[c,-s],[s,c]].
  static Rot2 exp(double phi);

  /// Angle in (-pi, pi].
  double log() const;

  const Matrix2d& matrix() const { return mat_; }
  Rot2 inverse() const { return Rot2(mat_.transpose()); }
  Rot2 operator*(const Rot2& rhs) const { return Rot2(mat_ * rhs.mat_); }
  Vector2d operator*(const Vector2d& v) const { return mat_ * v; }

  /// Re-projects onto SO(2) through the angle; cheap drift control after
  /// long composition chains.
  Rot2 normalized() const { return Rot2::exp(log()); }

 private:
  Matrix2d mat_;
};

inline Rot2 so2_exp(double phi) { return Rot2::exp(phi); }

/// SE(2) element: heading of the body frame plus planar position of the
/// body origin resolved in the world frame.
class Pose2 {
 public:
  Pose2() : rot_(), pos_(Vector2d::Zero()) {}
  Pose2(const Rot2& C, const Vector2d& r) : rot_(C), pos_(r) {}
  Pose2(double heading, const Vector2d& r) : rot_(Rot2::exp(heading)), pos_(r) {}

  static Pose2 identity() { return Pose2(); }

  const Rot2& rotation() const { return rot_; }
  const Vector2d& position() const { return pos_; }
  double heading() const { return rot_.log(); }

  Pose2 inverse() const {
    Rot2 Ct = rot_.inverse();
    return Pose2(Ct, -(Ct * pos_));
  }

  Pose2 operator*(const Pose2& rhs) const {
    return Pose2(rot_ * rhs.rot_, pos_ + rot_ * rhs.pos_);
  }

 private:
  Rot2 rot_;
  Vector2d pos_;
};

/// V(phi) = (sin(phi)/phi) I + ((1-cos(phi))/phi) W, the SE(2) translation
/// coupling block. Series fallback below |phi| ~ 1e-5.
Matrix2d se2_V(double phi);

/// Closed-form SE(2) exponential. No truncation; exact for any finite twist.
Pose2 se2_exp(const Twist2& xi);

/// Closed-form SE(2) logarithm. The heading is recovered by atan2, so the
/// result angle lies in (-pi, pi]; at exactly pi the V matrix is
/// [[0,-2/pi],[2/pi,0]], which is invertible, so the branch needs no
/// special casing beyond the atan2 cut itself.
Twist2 se2_log(const Pose2& T);

/// Left Jacobian of SE(2) at xi: d exp(xi + d)/d d = (Jl(xi) d)^ * exp(xi).
/// Ordering (phi, rho). Block form [[1, 0], [(V' - W V) rho, V]].
Matrix3d se2_left_jacobian(const Twist2& xi);

/// Inverse of the left Jacobian (direct 3x3 inverse of the closed form).
Matrix3d se2_left_jacobian_inv(const Twist2& xi);

/// Right Jacobian, Jr(xi) = Jl(-xi).
inline Matrix3d se2_right_jacobian(const Twist2& xi) {
  return se2_left_jacobian(-xi);
}
inline Matrix3d se2_right_jacobian_inv(const Twist2& xi) {
  return se2_left_jacobian_inv(-xi);
}

/// Embeds a planar pose in 3D: z-axis rotation DCM and position (x, y, 0).
/// Used when evaluating the 3D magnetic residuals.
struct Pose3Padded {
  Matrix3d C;
  Vector3d r;
};
Pose3Padded pad_to_3d(const Pose2& T);

}  // namespace magodom
