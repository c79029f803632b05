#pragma once

#include <array>
#include <vector>

#include <Eigen/Dense>

#include "magodom/geometry.hpp"
#include "magodom/magnetostatics.hpp"

namespace magodom {

/// One error term of the batch cost. Pose perturbations are applied on the
/// right, T = Tbar * exp(dxi^), dxi ordered (dphi, drho); every Jacobian
/// below is exact w.r.t. that perturbation at dxi = 0.
struct ResidualBlock {
  enum class Kind { prior, gyro, fd_mag, cd_mag, slip, loop };

  Kind kind;
  std::array<int, 3> idx{-1, -1, -1};
  int n_poses = 0;

  // payloads (per kind)
  Pose2 prior_mean;                        // prior
  double gyro_dtheta = 0.0;                // gyro: preintegrated increment
  Vector3d B_first = Vector3d::Zero();     // fd/cd: field at alpha
  Vector3d B_second = Vector3d::Zero();    // fd: field at beta; cd: at gamma
  Matrix3d G_beta = Matrix3d::Zero();      // fd/cd: gradient at beta, body frame

  Eigen::MatrixXd cov;  // dim x dim, SPD

  int dim() const;

  using JacobianBlock = Eigen::Matrix<double, Eigen::Dynamic, 3>;

  /// Residual and, when requested, one dim x 3 Jacobian per involved pose.
  void evaluate(const std::vector<Pose2>& poses, Eigen::VectorXd& r,
                std::vector<JacobianBlock>* J) const;

  static ResidualBlock make_prior(int i, const Pose2& mean, const Matrix3d& P0);
  static ResidualBlock make_gyro(int i_prev, int i, double dtheta, double variance);
  static ResidualBlock make_fd_mag(int i_alpha, int i_beta, const Vector3d& B_alpha,
                                   const Vector3d& B_beta, const GradVec& gvec_beta,
                                   const Matrix3d& R_fd);
  static ResidualBlock make_cd_mag(int i_alpha, int i_beta, int i_gamma,
                                   const Vector3d& B_alpha, const Vector3d& B_gamma,
                                   const GradVec& gvec_beta, const Matrix3d& R_cd);
  static ResidualBlock make_slip(int i_alpha, int i_beta, double variance);
  static ResidualBlock make_loop(int i, int j, const Matrix2d& psi);
};

}  // namespace magodom
