#include "magodom/solver.hpp"

#include <cmath>

#include "magodom/errors.hpp"

namespace magodom {

namespace {

// Whitens residual and Jacobians in place with the inverse Cholesky
// factor of the block covariance.
void whiten(const Eigen::MatrixXd& cov, Eigen::VectorXd& r,
            std::vector<ResidualBlock::JacobianBlock>* J) {
  const Eigen::LLT<Eigen::MatrixXd> llt(cov);
  r = llt.matrixL().solve(r);
  if (J) {
    for (auto& Jb : *J) Jb = llt.matrixL().solve(Jb);
  }
}

struct NormalEquations {
  Eigen::SparseMatrix<double> H;
  Eigen::VectorXd g;  // gradient J' W e
  double cost;
};

NormalEquations linearize(const EstimationProblem& problem,
                          const std::vector<Pose2>& poses) {
  const int dim = 3 * static_cast<int>(poses.size());
  NormalEquations out;
  out.g = Eigen::VectorXd::Zero(dim);
  out.cost = 0.0;
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(problem.blocks.size() * 36);
  Eigen::VectorXd r;
  std::vector<ResidualBlock::JacobianBlock> J;
  for (const ResidualBlock& b : problem.blocks) {
    b.evaluate(poses, r, &J);
    whiten(b.cov, r, &J);
    out.cost += 0.5 * r.squaredNorm();
    for (int p = 0; p < b.n_poses; ++p) {
      out.g.segment<3>(3 * b.idx[p]) += J[p].transpose() * r;
      for (int q = 0; q < b.n_poses; ++q) {
        const Eigen::Matrix3d Hpq = J[p].transpose() * J[q];
        for (int a = 0; a < 3; ++a)
          for (int c = 0; c < 3; ++c)
            trip.emplace_back(3 * b.idx[p] + a, 3 * b.idx[q] + c, Hpq(a, c));
      }
    }
  }
  out.H.resize(dim, dim);
  out.H.setFromTriplets(trip.begin(), trip.end());
  return out;
}

void check_constrained(const Eigen::SparseMatrix<double>& H, int n_poses) {
  Eigen::VectorXd diag = H.diagonal();
  for (int k = 0; k < n_poses; ++k) {
    if (diag.segment<3>(3 * k).isZero(0.0)) {
      throw SingularNormalEquations("pose block " + std::to_string(k) +
                                    " is unconstrained");
    }
  }
}

std::vector<Pose2> apply_step(const std::vector<Pose2>& poses,
                              const Eigen::VectorXd& dx) {
  std::vector<Pose2> out;
  out.reserve(poses.size());
  for (size_t k = 0; k < poses.size(); ++k) {
    const Twist2 xi = dx.segment<3>(3 * k);
    Pose2 T = poses[k] * se2_exp(xi);
    // renormalize the angle so se2_log stays on the principal branch
    out.emplace_back(T.rotation().normalized(), T.position());
  }
  return out;
}

}  // namespace

double evaluate_cost(const EstimationProblem& problem,
                     const std::vector<Pose2>& poses) {
  double cost = 0.0;
  Eigen::VectorXd r;
  for (const ResidualBlock& b : problem.blocks) {
    b.evaluate(poses, r, nullptr);
    whiten(b.cov, r, nullptr);
    cost += 0.5 * r.squaredNorm();
  }
  return cost;
}

Solution solve(const EstimationProblem& problem) {
  std::vector<Pose2> poses = problem.initial;
  const SolverSettings& s = problem.settings;
  Solution sol;
  double lambda = s.initial_damping;

  double cost = evaluate_cost(problem, poses);
  if (!std::isfinite(cost)) throw NonFiniteCost("initial cost is not finite");
  sol.report.initial_cost = cost;
  sol.report.cost_trace.push_back(cost);
  sol.report.convergence_reason = "max_iterations";

  for (int it = 0; it < s.max_iterations; ++it) {
    NormalEquations ne = linearize(problem, poses);
    check_constrained(ne.H, static_cast<int>(poses.size()));

    bool accepted = false;
    while (true) {
      Eigen::SparseMatrix<double> A = ne.H;
      if (lambda > 0.0) {
        for (int k = 0; k < A.rows(); ++k) A.coeffRef(k, k) += lambda;
      }
      Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(A);
      if (ldlt.info() != Eigen::Success) {
        if (lambda >= s.max_damping) {
          throw SingularNormalEquations("factorization failed at max damping");
        }
        lambda = std::max(1e-10, lambda * s.damping_increase);
        continue;
      }
      if (lambda == 0.0) {
        // undamped system: a vanishing pivot means a gauge direction is
        // unconstrained (e.g. no prior block)
        const Eigen::VectorXd d = ldlt.vectorD().cwiseAbs();
        if (d.minCoeff() < 1e-12 * d.maxCoeff()) {
          throw SingularNormalEquations(
              "normal equations singular: unconstrained gauge direction "
              "(missing prior?)");
        }
      }
      const Eigen::VectorXd dx = ldlt.solve(-ne.g);
      if (!dx.allFinite()) {
        if (lambda >= s.max_damping) {
          throw SingularNormalEquations("non-finite step at max damping");
        }
        lambda = std::max(1e-10, lambda * s.damping_increase);
        continue;
      }

      const double step_max = dx.lpNorm<Eigen::Infinity>();
      std::vector<Pose2> trial = apply_step(poses, dx);
      const double trial_cost = evaluate_cost(problem, trial);
      if (!std::isfinite(trial_cost)) throw NonFiniteCost("cost became non-finite");

      if (trial_cost <= cost) {
        const double rel_decrease = (cost - trial_cost) / std::max(cost, 1e-300);
        poses = std::move(trial);
        cost = trial_cost;
        sol.report.cost_trace.push_back(cost);
        sol.report.iterations = it + 1;
        lambda *= s.damping_decrease;
        accepted = true;
        if (step_max < s.step_tolerance) {
          sol.report.convergence_reason = "step_tolerance";
          it = s.max_iterations;  // break outer
        } else if (cost < 1e-16) {
          sol.report.convergence_reason = "cost_tolerance";
          it = s.max_iterations;
        } else if (rel_decrease < s.cost_tolerance) {
          sol.report.convergence_reason = "cost_tolerance";
          it = s.max_iterations;
        }
        break;
      }
      if (lambda >= s.max_damping) {
        // cannot decrease further; already at a minimum within tolerance
        sol.report.convergence_reason = "damping_limit";
        accepted = false;
        it = s.max_iterations;
        break;
      }
      lambda = std::max(1e-10, lambda * s.damping_increase);
    }
    if (!accepted && sol.report.convergence_reason == "damping_limit") break;
    if (sol.report.convergence_reason != "max_iterations") break;
  }

  sol.report.final_cost = cost;
  sol.trajectory = std::move(poses);
  return sol;
}

MarginalCovariance::MarginalCovariance(const EstimationProblem& problem,
                                       const std::vector<Pose2>& solution)
    : poses_(solution), dim_(3 * static_cast<int>(solution.size())) {
  NormalEquations ne = linearize(problem, solution);
  ldlt_.compute(ne.H);
  if (ldlt_.info() != Eigen::Success) {
    throw SingularInformation("information matrix factorization failed");
  }
}

Eigen::Matrix3d MarginalCovariance::marginal(int i) const {
  Eigen::Matrix3d P;
  Eigen::VectorXd e = Eigen::VectorXd::Zero(dim_);
  for (int c = 0; c < 3; ++c) {
    e[3 * i + c] = 1.0;
    const Eigen::VectorXd col = ldlt_.solve(e);
    P.col(c) = col.segment<3>(3 * i);
    e[3 * i + c] = 0.0;
  }
  return 0.5 * (P + P.transpose());
}

Eigen::Matrix<double, 6, 6> MarginalCovariance::joint(int i, int j) const {
  Eigen::Matrix<double, 6, 6> P;
  Eigen::VectorXd e = Eigen::VectorXd::Zero(dim_);
  const int rows[2] = {i, j};
  for (int c = 0; c < 6; ++c) {
    const int pose = rows[c / 3];
    e[3 * pose + c % 3] = 1.0;
    const Eigen::VectorXd col = ldlt_.solve(e);
    P.block<3, 1>(0, c) = col.segment<3>(3 * i);
    P.block<3, 1>(3, c) = col.segment<3>(3 * j);
    e[3 * pose + c % 3] = 0.0;
  }
  return 0.5 * (P + P.transpose());
}

Eigen::Matrix3d MarginalCovariance::relative(int i, int j) const {
  const Twist2 e = se2_log(poses_[i].inverse() * poses_[j]);
  // T_i exp(di), T_j exp(dj):
  // log(exp(-di) exp(e) exp(dj)) ~ e - Jl^-1(e) di + Jr^-1(e) dj
  Eigen::Matrix<double, 3, 6> A;
  A.leftCols<3>() = -se2_left_jacobian_inv(e);
  A.rightCols<3>() = se2_right_jacobian_inv(e);
  const Eigen::Matrix<double, 6, 6> P = joint(i, j);
  Eigen::Matrix3d S = A * P * A.transpose();
  return 0.5 * (S + S.transpose());
}

}  // namespace magodom
