#include "magodom/geometry.hpp"

#include <cmath>

namespace magodom {

double wrap_angle(double a) {
  a = std::remainder(a, 2.0 * M_PI);  // (-pi, pi], except remainder gives [-pi, pi]
  if (a <= -M_PI) a += 2.0 * M_PI;
  return a;
}

Rot2 Rot2::exp(double phi) {
  const double c = std::cos(phi);
  const double s = std::sin(phi);
  Matrix2d C;
  C << c, -s, s, c;
  return Rot2(C);
}

double Rot2::log() const { return std::atan2(mat_(1, 0), mat_(0, 0)); }

namespace {

// a(phi) = sin(phi)/phi, b(phi) = (1-cos(phi))/phi and their derivatives,
// with Taylor fallbacks near zero.
struct VCoeffs {
  double a, b, da, db;
};

VCoeffs v_coeffs(double phi) {
  VCoeffs k;
  if (std::abs(phi) < 1e-5) {
    const double p2 = phi * phi;
    k.a = 1.0 - p2 / 6.0;
    k.b = phi / 2.0 - phi * p2 / 24.0;
    k.da = -phi / 3.0 + phi * p2 / 30.0;
    k.db = 0.5 - p2 / 8.0;
  } else {
    const double s = std::sin(phi);
    const double c = std::cos(phi);
    k.a = s / phi;
    k.b = (1.0 - c) / phi;
    k.da = (phi * c - s) / (phi * phi);
    k.db = (phi * s - (1.0 - c)) / (phi * phi);
  }
  return k;
}

}  // namespace

Matrix2d se2_V(double phi) {
  const VCoeffs k = v_coeffs(phi);
  Matrix2d V;
  V << k.a, -k.b, k.b, k.a;
  return V;
}

Pose2 se2_exp(const Twist2& xi) {
  const double phi = xi[0];
  const Vector2d rho = xi.tail<2>();
  return Pose2(Rot2::exp(phi), se2_V(phi) * rho);
}

Twist2 se2_log(const Pose2& T) {
  const double phi = T.rotation().log();
  const Vector2d rho = se2_V(phi).inverse() * T.position();
  Twist2 xi;
  xi << phi, rho;
  return xi;
}

Matrix3d se2_left_jacobian(const Twist2& xi) {
  const double phi = xi[0];
  const Vector2d rho = xi.tail<2>();
  const VCoeffs k = v_coeffs(phi);
  // V = aI + bW, V' = a'I + b'W, W V = -bI + aW
  // coupling column: (V' - W V) rho
  Matrix2d M;
  M << (k.da + k.b), -(k.db - k.a), (k.db - k.a), (k.da + k.b);
  Matrix3d J = Matrix3d::Identity();
  J.block<2, 1>(1, 0) = M * rho;
  J.block<2, 2>(1, 1) = se2_V(phi);
  return J;
}

Matrix3d se2_left_jacobian_inv(const Twist2& xi) {
  return se2_left_jacobian(xi).inverse();
}

Pose3Padded pad_to_3d(const Pose2& T) {
  Pose3Padded out;
  out.C = Matrix3d::Identity();
  out.C.topLeftCorner<2, 2>() = T.rotation().matrix();
  out.r = Vector3d::Zero();
  out.r.head<2>() = T.position();
  return out;
}

}  // namespace magodom
