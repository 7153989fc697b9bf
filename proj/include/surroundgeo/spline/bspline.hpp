#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

namespace surroundgeo::spline {

// Clamped knot vector: first and last knot repeated degree+1 times,
// non-decreasing, interior multiplicity at most the degree.
using KnotVector = std::vector<double>;

void validate_knot_vector(const KnotVector& knots, int degree);

// Cox-de Boor basis function N_{i,p}(t). Reference recursion; evaluation
// inside curves uses the banded support routine below.
double basis(int i, int p, double t, const KnotVector& knots);

// Non-zero basis values and first derivatives at t: indices
// span-p .. span over a clamped knot vector.
struct BasisSupport {
  int first = 0;                // index of the first non-zero function
  std::vector<double> value;    // p+1 entries
  std::vector<double> deriv;    // p+1 entries, per second
};
BasisSupport basis_support(const KnotVector& knots, int p, double t);

class SplineCurve {
 public:
  SplineCurve() = default;
  SplineCurve(int degree, KnotVector knots, Eigen::MatrixXd control_points);

  int degree() const { return degree_; }
  int dim() const { return static_cast<int>(control_.rows()); }
  int num_control() const { return static_cast<int>(control_.cols()); }
  const KnotVector& knots() const { return knots_; }
  const Eigen::MatrixXd& control() const { return control_; }
  Eigen::MatrixXd& control() { return control_; }

  double domain_start() const { return knots_[degree_]; }
  double domain_end() const { return knots_[knots_.size() - degree_ - 1]; }

  Eigen::VectorXd eval(double t) const;
  void eval_with_derivative(double t, Eigen::VectorXd* value,
                            Eigen::VectorXd* derivative) const;

 private:
  int degree_ = 3;
  KnotVector knots_;
  Eigen::MatrixXd control_;  // dim x (n+1)
};

// Interior knots as strided averages of p consecutive parameter values
// (plain averaging when the control count matches the sample count), with a
// Schoenberg-Whitney feasibility check.
KnotVector knots_by_averaging(const std::vector<double>& timestamps, int n,
                              int p);

// Global linear least-squares fit of the control points for fixed knots.
SplineCurve fit_curve(const std::vector<double>& timestamps,
                      const Eigen::MatrixXd& samples, int n, int p);
SplineCurve fit_curve(const std::vector<double>& timestamps,
                      const Eigen::MatrixXd& samples, const KnotVector& knots,
                      int p);

// Curve file: JSON {degree, knots[], dim, control_points[][]}.
void save_curve(const SplineCurve& curve, const std::string& path);
SplineCurve load_curve(const std::string& path);

}  // namespace surroundgeo::spline
