#pragma once

#include <Eigen/Core>
#include <functional>
#include <vector>

namespace surroundgeo {

// Small dense block Levenberg-Marquardt solver. Parameter blocks may live
// on a manifold (local_dim <= global_dim) via a user plus(). Jacobians are
// either supplied analytically per residual block or obtained by forward
// differences restricted to the blocks a residual actually depends on.
class LeastSquaresProblem {
 public:
  using PlusFn = std::function<Eigen::VectorXd(const Eigen::VectorXd& x,
                                               const Eigen::VectorXd& delta)>;
  // Fills r (pre-sized); params are the current block values. Returning
  // false marks the residual invalid for this evaluation (contributes 0).
  using EvalFn = std::function<bool(const std::vector<const Eigen::VectorXd*>&,
                                    Eigen::VectorXd&)>;
  // Optional analytic Jacobians, one matrix (dim x local_dim) per dependency.
  using JacFn = std::function<void(const std::vector<const Eigen::VectorXd*>&,
                                   std::vector<Eigen::MatrixXd>&)>;

  int add_parameter_block(const Eigen::VectorXd& value, int local_dim,
                          PlusFn plus = nullptr, bool fixed = false);
  // Euclidean block.
  int add_parameter_block(const Eigen::VectorXd& value, bool fixed = false);

  int add_residual_block(std::vector<int> params, int dim, EvalFn eval,
                         JacFn jac = nullptr);

  void set_robust_delta(int residual_block, double delta);
  void set_sqrt_weight(int residual_block, double w);
  void set_block_value(int param_block, const Eigen::VectorXd& v);
  const Eigen::VectorXd& block_value(int param_block) const;

  struct Options {
    int max_iterations = 100;
    double relative_decrease_tol = 1e-9;
    double numeric_diff_step = 1e-7;
    double initial_mu = 1e-6;
    int max_inner_retries = 12;
    // Called at the start of each outer iteration (e.g. to refresh robust
    // scales from the current residual distribution).
    std::function<void(LeastSquaresProblem&)> outer_hook;
    // Called after each accepted step with the iteration index and cost.
    std::function<void(int, double)> iteration_hook;
  };

  struct Summary {
    bool converged = false;
    int iterations = 0;
    double initial_cost = 0.0;
    double final_cost = 0.0;
  };

  Summary solve(const Options& options);

  // Robustified total cost at the current state.
  double cost() const;

  // Residual vector of a single block at the current state (unweighted).
  Eigen::VectorXd evaluate_block(int residual_block) const;

  int num_residual_blocks() const { return static_cast<int>(residuals_.size()); }

 private:
  struct Param {
    Eigen::VectorXd value;
    int local_dim;
    PlusFn plus;
    bool fixed;
    int offset = -1;  // column offset in the reduced Jacobian, -1 if fixed
  };
  struct Residual {
    std::vector<int> params;
    int dim;
    EvalFn eval;
    JacFn jac;
    double robust_delta = 0.0;  // 0 disables the Huber loss
    double sqrt_weight = 1.0;
  };

  double block_cost(const Eigen::VectorXd& r, const Residual& res) const;
  bool eval_residual(const Residual& res,
                     const std::vector<Eigen::VectorXd>& values,
                     Eigen::VectorXd& r) const;
  double total_cost(const std::vector<Eigen::VectorXd>& values) const;

  std::vector<Param> params_;
  std::vector<Residual> residuals_;
};

// plus() for rotation blocks stored as row-major 9-vectors with 3-DoF
// right-multiplied Rodrigues increments.
LeastSquaresProblem::PlusFn rotation_plus();
Eigen::VectorXd rotation_to_vec9(const Eigen::Matrix3d& R);
Eigen::Matrix3d vec9_to_rotation(const Eigen::VectorXd& v);

}  // namespace surroundgeo
