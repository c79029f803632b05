#pragma once

#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "magodom/residuals.hpp"

namespace magodom {

struct SolverSettings {
  int max_iterations = 100;
  double step_tolerance = 1e-8;       // max |dxi| component
  double cost_tolerance = 1e-10;      // relative cost decrease
  double initial_damping = 0.0;       // Levenberg diagonal, raised on rejection
  double damping_increase = 10.0;
  double damping_decrease = 0.1;
  double max_damping = 1e12;
};

struct SolveReport {
  int iterations = 0;
  double initial_cost = 0.0;
  double final_cost = 0.0;
  std::string convergence_reason;
  std::vector<double> cost_trace;
};

/// Batch on-manifold weighted least squares over an ordered pose chain.
struct EstimationProblem {
  std::vector<Pose2> initial;         // T_0 .. T_K initial guess
  std::vector<ResidualBlock> blocks;
  SolverSettings settings;
};

struct Solution {
  std::vector<Pose2> trajectory;
  SolveReport report;
};

/// Total cost 0.5 * sum e' * cov^-1 * e at the given states.
double evaluate_cost(const EstimationProblem& problem,
                     const std::vector<Pose2>& poses);

/// Gauss-Newton with Levenberg damping on rejection; accepted iterations
/// never increase the cost. Throws SingularNormalEquations (naming the
/// first unconstrained pose block) or NonFiniteCost.
Solution solve(const EstimationProblem& problem);

/// Marginal and relative covariances at a solution, extracted from the
/// factorized Gauss-Newton information matrix. Only requested blocks are
/// computed.
class MarginalCovariance {
 public:
  MarginalCovariance(const EstimationProblem& problem,
                     const std::vector<Pose2>& solution);

  Eigen::Matrix3d marginal(int i) const;

  /// 6x6 joint covariance of poses (i, j), order (dxi_i, dxi_j).
  Eigen::Matrix<double, 6, 6> joint(int i, int j) const;

  /// Covariance of dxi_ij = log(T_i^-1 T_j)^v by first-order propagation.
  Eigen::Matrix3d relative(int i, int j) const;

 private:
  std::vector<Pose2> poses_;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt_;
  int dim_;
};

}  // namespace magodom
