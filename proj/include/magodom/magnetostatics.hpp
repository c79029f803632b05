#pragma once

#include <vector>

#include <Eigen/Dense>

#include "magodom/errors.hpp"

namespace magodom {

using Eigen::Matrix3d;
using Eigen::Vector3d;
using GradVec = Eigen::Matrix<double, 5, 1>;

/// Field vector and packed gradient at one timestep, body frame.
/// Units: B in uT, gradient in uT/m, timestamp in s.
struct FieldSample {
  Vector3d B = Vector3d::Zero();
  GradVec gvec = GradVec::Zero();
  double t = 0.0;
};

struct InvariantTriple {
  double I1;  // |B|_2, uT
  double I2;  // |G|_F, uT/m
  double I3;  // det(G), (uT/m)^3
};

/// Packs a symmetric traceless gradient into (Bxx, Bxy, Bxz, Byy, Byz).
/// Throws NotSymmetricTraceless if the input violates the structure by
/// more than 1e-8.
GradVec vdash(const Matrix3d& G);

/// Reconstructs the full gradient; Bzz = -(Bxx + Byy) by construction.
Matrix3d unvdash(const GradVec& g);

InvariantTriple invariants(const FieldSample& sample);

struct Dipole {
  Vector3d position;  // m, world frame
  Vector3d moment;    // A*m^2
};

/// Synthetic magnetostatic world: uniform background, optional uniform
/// gradient, point dipoles. Every term is individually curl- and
/// divergence-free, so the total field is too.
class MagWorld {
 public:
  MagWorld() = default;
  MagWorld(const Vector3d& background, std::vector<Dipole> dipoles,
           double exclusion_radius = 0.3, double dipole_scale = 0.1,
           const GradVec& background_gradient = GradVec::Zero());

  struct FieldEval {
    Vector3d B;   // uT, world frame
    Matrix3d G;   // uT/m, world frame
  };

  /// Analytic field and gradient at a world point. Throws
  /// EvaluationInsideExclusionZone when the point is closer than the
  /// exclusion radius to any dipole.
  FieldEval eval(const Vector3d& r) const;

  const Vector3d& background() const { return background_; }
  const std::vector<Dipole>& dipoles() const { return dipoles_; }
  double exclusion_radius() const { return exclusion_radius_; }
  double dipole_scale() const { return dipole_scale_; }
  const Matrix3d& background_gradient() const { return background_gradient_; }

 private:
  Vector3d background_ = Vector3d::Zero();
  Matrix3d background_gradient_ = Matrix3d::Zero();
  std::vector<Dipole> dipoles_;
  double exclusion_radius_ = 0.3;
  // mu0/(4 pi) in uT*m^3/(A*m^2); exposed as a plain scale knob.
  double dipole_scale_ = 0.1;
};

}  // namespace magodom
