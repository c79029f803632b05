#include "magodom/residuals.hpp"

namespace magodom {

namespace {

// 3x2 selector embedding a planar translation perturbation in 3D
const Eigen::Matrix<double, 3, 2> kPad = [] {
  Eigen::Matrix<double, 3, 2> P = Eigen::Matrix<double, 3, 2>::Zero();
  P(0, 0) = 1.0;
  P(1, 1) = 1.0;
  return P;
}();

}  // namespace

int ResidualBlock::dim() const {
  switch (kind) {
    case Kind::prior:
    case Kind::fd_mag:
    case Kind::cd_mag:
      return 3;
    case Kind::loop:
      return 2;
    case Kind::gyro:
    case Kind::slip:
      return 1;
  }
  return 0;
}

void ResidualBlock::evaluate(const std::vector<Pose2>& poses, Eigen::VectorXd& r,
                             std::vector<JacobianBlock>* J) const {
  if (J) {
    J->assign(n_poses, JacobianBlock::Zero(dim(), 3));
  }
  switch (kind) {
    case Kind::prior: {
      const Pose2& T = poses[idx[0]];
      const Twist2 e = se2_log(T.inverse() * prior_mean);
      r = e;
      if (J) (*J)[0] = -se2_left_jacobian_inv(e);
      break;
    }
    case Kind::gyro: {
      const double th_prev = poses[idx[0]].heading();
      const double th = poses[idx[1]].heading();
      r.resize(1);
      r[0] = wrap_angle(th_prev - th + gyro_dtheta);
      if (J) {
        (*J)[0](0, 0) = 1.0;
        (*J)[1](0, 0) = -1.0;
      }
      break;
    }
    case Kind::fd_mag: {
      const Pose3Padded Ta = pad_to_3d(poses[idx[0]]);
      const Pose3Padded Tb = pad_to_3d(poses[idx[1]]);
      const Matrix3d W = so3_z_hat();
      const Vector3d dr = Tb.r - Ta.r;
      const Matrix3d CbtCa = Tb.C.transpose() * Ta.C;
      r = G_beta * (Tb.C.transpose() * dr) - (B_second - CbtCa * B_first);
      if (J) {
        auto& Ja = (*J)[0];
        Ja.col(0) = CbtCa * (W * B_first);
        Ja.rightCols<2>() = -G_beta * CbtCa * kPad;
        auto& Jb = (*J)[1];
        Jb.col(0) = -G_beta * (W * (Tb.C.transpose() * dr)) -
                    W * (CbtCa * B_first);
        Jb.rightCols<2>() = G_beta * kPad;
      }
      break;
    }
    case Kind::cd_mag: {
      const Pose3Padded Ta = pad_to_3d(poses[idx[0]]);
      const Pose3Padded Tb = pad_to_3d(poses[idx[1]]);
      const Pose3Padded Tg = pad_to_3d(poses[idx[2]]);
      const Matrix3d W = so3_z_hat();
      const Vector3d dr = Tg.r - Ta.r;
      const Matrix3d CbtCa = Tb.C.transpose() * Ta.C;
      const Matrix3d CbtCg = Tb.C.transpose() * Tg.C;
      r = G_beta * (Tb.C.transpose() * dr) - (CbtCg * B_second - CbtCa * B_first);
      if (J) {
        auto& Ja = (*J)[0];
        Ja.col(0) = CbtCa * (W * B_first);
        Ja.rightCols<2>() = -G_beta * CbtCa * kPad;
        auto& Jb = (*J)[1];
        Jb.col(0) = -G_beta * (W * (Tb.C.transpose() * dr)) +
                    W * (CbtCg * B_second) - W * (CbtCa * B_first);
        auto& Jg = (*J)[2];
        Jg.col(0) = -CbtCg * (W * B_second);
        Jg.rightCols<2>() = G_beta * CbtCg * kPad;
      }
      break;
    }
    case Kind::slip: {
      const Pose2& Ta = poses[idx[0]];
      const Pose2& Tb = poses[idx[1]];
      const Vector2d dr = Tb.position() - Ta.position();
      const Vector2d body = Tb.rotation().inverse() * dr;
      r.resize(1);
      r[0] = body.y();
      if (J) {
        const Matrix2d CbtCa = Tb.rotation().matrix().transpose() * Ta.rotation().matrix();
        const Vector2d wbody = so2_hat() * body;  // d(Cb' dr)/dphi_b = -W Cb' dr
        (*J)[0].block<1, 2>(0, 1) = -CbtCa.row(1);
        (*J)[1](0, 0) = -wbody.y();
        (*J)[1](0, 1) = 0.0;
        (*J)[1](0, 2) = 1.0;
      }
      break;
    }
    case Kind::loop: {
      r = poses[idx[1]].position() - poses[idx[0]].position();
      if (J) {
        (*J)[0].rightCols<2>() = -poses[idx[0]].rotation().matrix();
        (*J)[1].rightCols<2>() = poses[idx[1]].rotation().matrix();
      }
      break;
    }
  }
}

ResidualBlock ResidualBlock::make_prior(int i, const Pose2& mean, const Matrix3d& P0) {
  ResidualBlock b;
  b.kind = Kind::prior;
  b.idx[0] = i;
  b.n_poses = 1;
  b.prior_mean = mean;
  b.cov = P0;
  return b;
}

ResidualBlock ResidualBlock::make_gyro(int i_prev, int i, double dtheta,
                                       double variance) {
  ResidualBlock b;
  b.kind = Kind::gyro;
  b.idx[0] = i_prev;
  b.idx[1] = i;
  b.n_poses = 2;
  b.gyro_dtheta = dtheta;
  b.cov = Eigen::MatrixXd::Constant(1, 1, variance);
  return b;
}

ResidualBlock ResidualBlock::make_fd_mag(int i_alpha, int i_beta,
                                         const Vector3d& B_alpha,
                                         const Vector3d& B_beta,
                                         const GradVec& gvec_beta,
                                         const Matrix3d& R_fd) {
  ResidualBlock b;
  b.kind = Kind::fd_mag;
  b.idx[0] = i_alpha;
  b.idx[1] = i_beta;
  b.n_poses = 2;
  b.B_first = B_alpha;
  b.B_second = B_beta;
  b.G_beta = unvdash(gvec_beta);
  b.cov = R_fd;
  return b;
}

ResidualBlock ResidualBlock::make_cd_mag(int i_alpha, int i_beta, int i_gamma,
                                         const Vector3d& B_alpha,
                                         const Vector3d& B_gamma,
                                         const GradVec& gvec_beta,
                                         const Matrix3d& R_cd) {
  ResidualBlock b;
  b.kind = Kind::cd_mag;
  b.idx[0] = i_alpha;
  b.idx[1] = i_beta;
  b.idx[2] = i_gamma;
  b.n_poses = 3;
  b.B_first = B_alpha;
  b.B_second = B_gamma;
  b.G_beta = unvdash(gvec_beta);
  b.cov = R_cd;
  return b;
}

ResidualBlock ResidualBlock::make_slip(int i_alpha, int i_beta, double variance) {
  ResidualBlock b;
  b.kind = Kind::slip;
  b.idx[0] = i_alpha;
  b.idx[1] = i_beta;
  b.n_poses = 2;
  b.cov = Eigen::MatrixXd::Constant(1, 1, variance);
  return b;
}

ResidualBlock ResidualBlock::make_loop(int i, int j, const Matrix2d& psi) {
  ResidualBlock b;
  b.kind = Kind::loop;
  b.idx[0] = i;
  b.idx[1] = j;
  b.n_poses = 2;
  b.cov = psi;
  return b;
}

}  // namespace magodom
