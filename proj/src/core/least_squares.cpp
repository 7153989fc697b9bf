#include "surroundgeo/core/least_squares.hpp"

#include <Eigen/Dense>
#include <cmath>

#include "surroundgeo/core/error.hpp"
#include "surroundgeo/core/rotation.hpp"

namespace surroundgeo {

int LeastSquaresProblem::add_parameter_block(const Eigen::VectorXd& value,
                                             int local_dim, PlusFn plus,
                                             bool fixed) {
  Param p;
  p.value = value;
  p.local_dim = local_dim;
  p.plus = std::move(plus);
  p.fixed = fixed;
  params_.push_back(std::move(p));
  return static_cast<int>(params_.size()) - 1;
}

int LeastSquaresProblem::add_parameter_block(const Eigen::VectorXd& value,
                                             bool fixed) {
  return add_parameter_block(value, static_cast<int>(value.size()), nullptr,
                             fixed);
}

int LeastSquaresProblem::add_residual_block(std::vector<int> params, int dim,
                                            EvalFn eval, JacFn jac) {
  Residual r;
  r.params = std::move(params);
  r.dim = dim;
  r.eval = std::move(eval);
  r.jac = std::move(jac);
  residuals_.push_back(std::move(r));
  return static_cast<int>(residuals_.size()) - 1;
}

void LeastSquaresProblem::set_robust_delta(int residual_block, double delta) {
  residuals_.at(residual_block).robust_delta = delta;
}

void LeastSquaresProblem::set_sqrt_weight(int residual_block, double w) {
  residuals_.at(residual_block).sqrt_weight = w;
}

void LeastSquaresProblem::set_block_value(int param_block,
                                          const Eigen::VectorXd& v) {
  params_.at(param_block).value = v;
}

const Eigen::VectorXd& LeastSquaresProblem::block_value(int param_block) const {
  return params_.at(param_block).value;
}

bool LeastSquaresProblem::eval_residual(
    const Residual& res, const std::vector<Eigen::VectorXd>& values,
    Eigen::VectorXd& r) const {
  std::vector<const Eigen::VectorXd*> args(res.params.size());
  for (size_t i = 0; i < res.params.size(); ++i)
    args[i] = &values[res.params[i]];
  r.setZero(res.dim);
  return res.eval(args, r);
}

double LeastSquaresProblem::block_cost(const Eigen::VectorXd& r,
                                       const Residual& res) const {
  const double norm = res.sqrt_weight * r.norm();
  const double d = res.robust_delta;
  if (d <= 0.0 || norm <= d) return norm * norm;
  return 2.0 * d * norm - d * d;  // Huber: linear branch, C1 at d
}

double LeastSquaresProblem::total_cost(
    const std::vector<Eigen::VectorXd>& values) const {
  double cost = 0.0;
  Eigen::VectorXd r;
  for (const Residual& res : residuals_) {
    if (eval_residual(res, values, r)) cost += block_cost(r, res);
  }
  return cost;
}

double LeastSquaresProblem::cost() const {
  std::vector<Eigen::VectorXd> values;
  values.reserve(params_.size());
  for (const Param& p : params_) values.push_back(p.value);
  return total_cost(values);
}

Eigen::VectorXd LeastSquaresProblem::evaluate_block(int residual_block) const {
  std::vector<Eigen::VectorXd> values;
  values.reserve(params_.size());
  for (const Param& p : params_) values.push_back(p.value);
  Eigen::VectorXd r;
  eval_residual(residuals_.at(residual_block), values, r);
  return r;
}

LeastSquaresProblem::Summary LeastSquaresProblem::solve(
    const Options& options) {
  Summary summary;

  int total_local = 0;
  for (Param& p : params_) {
    p.offset = p.fixed ? -1 : total_local;
    if (!p.fixed) total_local += p.local_dim;
  }
  if (total_local == 0 || residuals_.empty()) {
    summary.converged = true;
    return summary;
  }

  std::vector<Eigen::VectorXd> values;
  values.reserve(params_.size());
  for (const Param& p : params_) values.push_back(p.value);

  auto apply_plus = [&](const Param& p, const Eigen::VectorXd& x,
                        const Eigen::VectorXd& delta) -> Eigen::VectorXd {
    if (p.plus) return p.plus(x, delta);
    return x + delta;
  };

  Eigen::MatrixXd JtJ(total_local, total_local);
  Eigen::VectorXd g(total_local);
  Eigen::VectorXd r_tmp, r_pert;
  std::vector<Eigen::MatrixXd> jacs;

  double mu = options.initial_mu;
  double cost = 0.0;

  for (int iter = 0; iter < options.max_iterations; ++iter) {
    if (options.outer_hook) options.outer_hook(*this);
    // outer_hook may change robust scales, so refresh the reference cost.
    cost = total_cost(values);
    if (iter == 0) summary.initial_cost = cost;
    if (!std::isfinite(cost))
      fail(ErrorCode::NumericFailure, "least squares cost is not finite");

    // Blockwise normal equations with IRLS scaling.
    JtJ.setZero();
    g.setZero();
    for (const Residual& res : residuals_) {
      if (!eval_residual(res, values, r_tmp)) continue;
      double w = res.sqrt_weight;
      const double norm = w * r_tmp.norm();
      if (res.robust_delta > 0.0 && norm > res.robust_delta)
        w *= std::sqrt(res.robust_delta / norm);
      const double w2 = w * w;

      jacs.assign(res.params.size(), Eigen::MatrixXd());
      if (res.jac) {
        std::vector<const Eigen::VectorXd*> args(res.params.size());
        for (size_t i = 0; i < res.params.size(); ++i)
          args[i] = &values[res.params[i]];
        res.jac(args, jacs);
      } else {
        // Forward differences on the local coordinates of each dependency.
        for (size_t i = 0; i < res.params.size(); ++i) {
          Param& p = params_[res.params[i]];
          if (p.fixed) continue;
          jacs[i].setZero(res.dim, p.local_dim);
          const Eigen::VectorXd saved = values[res.params[i]];
          for (int k = 0; k < p.local_dim; ++k) {
            Eigen::VectorXd delta = Eigen::VectorXd::Zero(p.local_dim);
            delta(k) = options.numeric_diff_step;
            values[res.params[i]] = apply_plus(p, saved, delta);
            if (eval_residual(res, values, r_pert))
              jacs[i].col(k) = (r_pert - r_tmp) / options.numeric_diff_step;
            values[res.params[i]] = saved;
          }
        }
      }

      for (size_t i = 0; i < res.params.size(); ++i) {
        const Param& pi = params_[res.params[i]];
        if (pi.fixed || jacs[i].size() == 0) continue;
        g.segment(pi.offset, pi.local_dim).noalias() +=
            w2 * jacs[i].transpose() * r_tmp;
        for (size_t j = 0; j < res.params.size(); ++j) {
          const Param& pj = params_[res.params[j]];
          if (pj.fixed || jacs[j].size() == 0) continue;
          JtJ.block(pi.offset, pj.offset, pi.local_dim, pj.local_dim)
              .noalias() += w2 * jacs[i].transpose() * jacs[j];
        }
      }
    }

    bool accepted = false;
    double trial_cost = cost;
    std::vector<Eigen::VectorXd> trial = values;
    for (int retry = 0; retry < options.max_inner_retries; ++retry) {
      Eigen::MatrixXd H = JtJ;
      for (int k = 0; k < total_local; ++k)
        H(k, k) += mu * std::max(JtJ(k, k), 1e-12);
      const Eigen::VectorXd step = H.ldlt().solve(-g);
      if (!step.allFinite()) {
        mu *= 4.0;
        continue;
      }
      for (size_t pi = 0; pi < params_.size(); ++pi) {
        const Param& p = params_[pi];
        if (p.fixed) continue;
        trial[pi] = apply_plus(p, values[pi], step.segment(p.offset, p.local_dim));
      }
      trial_cost = total_cost(trial);
      if (std::isfinite(trial_cost) && trial_cost < cost) {
        accepted = true;
        mu = std::max(mu / 3.0, 1e-12);
        break;
      }
      trial = values;
      mu *= 4.0;
    }

    if (!accepted) {
      summary.converged = true;  // damping exhausted at a stationary point
      break;
    }

    values = trial;
    summary.iterations = iter + 1;
    if (options.iteration_hook) options.iteration_hook(iter + 1, trial_cost);

    const double decrease = cost - trial_cost;
    cost = trial_cost;
    if (decrease < options.relative_decrease_tol * std::max(cost, 1e-300)) {
      summary.converged = true;
      break;
    }
  }

  for (size_t pi = 0; pi < params_.size(); ++pi) params_[pi].value = values[pi];
  summary.final_cost = cost;
  return summary;
}

LeastSquaresProblem::PlusFn rotation_plus() {
  return [](const Eigen::VectorXd& x, const Eigen::VectorXd& delta) {
    const Eigen::Matrix3d R = vec9_to_rotation(x);
    return rotation_to_vec9(R * exp_so3(delta));
  };
}

Eigen::VectorXd rotation_to_vec9(const Eigen::Matrix3d& R) {
  Eigen::VectorXd v(9);
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) v(3 * r + c) = R(r, c);
  return v;
}

Eigen::Matrix3d vec9_to_rotation(const Eigen::VectorXd& v) {
  Eigen::Matrix3d R;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) R(r, c) = v(3 * r + c);
  return R;
}

}  // namespace surroundgeo
