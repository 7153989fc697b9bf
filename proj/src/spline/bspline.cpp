#include "surroundgeo/spline/bspline.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <fstream>

#include <json.hpp>

#include "surroundgeo/core/error.hpp"

namespace surroundgeo::spline {

void validate_knot_vector(const KnotVector& knots, int degree) {
  const int p = degree;
  if (static_cast<int>(knots.size()) < 2 * (p + 1))
    fail(ErrorCode::DomainError, "knot vector too short for the degree");
  for (size_t i = 0; i + 1 < knots.size(); ++i)
    if (knots[i] > knots[i + 1])
      fail(ErrorCode::DomainError, "knot vector must be non-decreasing");
  for (int i = 0; i < p; ++i) {
    if (knots[i] != knots[i + 1] ||
        knots[knots.size() - 1 - i] != knots[knots.size() - 2 - i])
      fail(ErrorCode::DomainError,
           "clamped knot vector needs multiplicity degree+1 at both ends");
  }
  if (knots[p] == knots[p + 1] && knots[p + 1] == knots[p + 2])
    fail(ErrorCode::DomainError, "interior multiplicity exceeds the degree");
  int mult = 1;
  for (size_t i = p + 2; i + p + 1 < knots.size(); ++i) {
    mult = knots[i] == knots[i - 1] ? mult + 1 : 1;
    if (mult > p)
      fail(ErrorCode::DomainError, "interior multiplicity exceeds the degree");
  }
}

namespace {

void check_domain(const KnotVector& knots, int p, double t) {
  const double a = knots[p];
  const double b = knots[knots.size() - p - 1];
  if (!(t >= a && t <= b))
    fail(ErrorCode::DomainError,
         "parameter " + std::to_string(t) + " outside the curve domain [" +
             std::to_string(a) + ", " + std::to_string(b) + "]");
}

// Index of the knot span containing t; the final span is closed on the
// right so the domain end evaluates to the last control point.
int find_span(const KnotVector& knots, int p, double t) {
  const int n = static_cast<int>(knots.size()) - p - 2;
  if (t >= knots[n + 1]) return n;
  const auto it = std::upper_bound(knots.begin() + p, knots.begin() + n + 1, t);
  return static_cast<int>(it - knots.begin()) - 1;
}

}  // namespace

double basis(int i, int p, double t, const KnotVector& knots) {
  check_domain(knots, p, t);
  if (i < 0 || i + p + 1 >= static_cast<int>(knots.size()))
    fail(ErrorCode::DomainError, "basis index out of range");
  const double b = knots[knots.size() - p - 1];
  if (p == 0) {
    const bool closing = knots[i + 1] == b && t == b;
    return (t >= knots[i] && (t < knots[i + 1] || closing)) ? 1.0 : 0.0;
  }
  double left = 0.0, right = 0.0;
  const double denom_l = knots[i + p] - knots[i];
  const double denom_r = knots[i + p + 1] - knots[i + 1];
  if (denom_l > 0.0) left = (t - knots[i]) / denom_l * basis(i, p - 1, t, knots);
  if (denom_r > 0.0)
    right = (knots[i + p + 1] - t) / denom_r * basis(i + 1, p - 1, t, knots);
  return left + right;
}

BasisSupport basis_support(const KnotVector& knots, int p, double t) {
  check_domain(knots, p, t);
  const int span = find_span(knots, p, t);

  // Triangular scheme for the non-zero functions of degrees 0..p; the
  // degree p-1 row feeds the derivative formula.
  std::vector<double> N(p + 1, 0.0), left(p + 1, 0.0), right(p + 1, 0.0);
  std::vector<double> Nprev(p + 1, 0.0);
  N[0] = 1.0;
  for (int j = 1; j <= p; ++j) {
    if (j == p) Nprev = N;
    left[j] = t - knots[span + 1 - j];
    right[j] = knots[span + j] - t;
    double saved = 0.0;
    for (int r = 0; r < j; ++r) {
      const double temp = N[r] / (right[r + 1] + left[j - r]);
      N[r] = saved + right[r + 1] * temp;
      saved = left[j - r] * temp;
    }
    N[j] = saved;
  }

  BasisSupport out;
  out.first = span - p;
  out.value.assign(N.begin(), N.end());
  out.deriv.assign(p + 1, 0.0);
  if (p > 0) {
    // N'_{i,p}(t) = p * ( N_{i,p-1}/(u_{i+p}-u_i) - N_{i+1,p-1}/(u_{i+p+1}-u_{i+1}) ).
    for (int r = 0; r <= p; ++r) {
      const int i = span - p + r;
      double d = 0.0;
      if (r > 0) {
        const double denom = knots[i + p] - knots[i];
        if (denom > 0.0) d += Nprev[r - 1] / denom;
      }
      if (r < p) {
        const double denom = knots[i + p + 1] - knots[i + 1];
        if (denom > 0.0) d -= Nprev[r] / denom;
      }
      out.deriv[r] = p * d;
    }
  }
  return out;
}

SplineCurve::SplineCurve(int degree, KnotVector knots,
                         Eigen::MatrixXd control_points)
    : degree_(degree), knots_(std::move(knots)), control_(std::move(control_points)) {
  validate_knot_vector(knots_, degree_);
  if (static_cast<int>(knots_.size()) != control_.cols() + degree_ + 1)
    fail(ErrorCode::DomainError,
         "knot count must equal control count + degree + 1");
}

Eigen::VectorXd SplineCurve::eval(double t) const {
  const BasisSupport s = basis_support(knots_, degree_, t);
  Eigen::VectorXd value = Eigen::VectorXd::Zero(dim());
  for (int r = 0; r <= degree_; ++r)
    value += s.value[r] * control_.col(s.first + r);
  return value;
}

void SplineCurve::eval_with_derivative(double t, Eigen::VectorXd* value,
                                       Eigen::VectorXd* derivative) const {
  const BasisSupport s = basis_support(knots_, degree_, t);
  value->setZero(dim());
  derivative->setZero(dim());
  for (int r = 0; r <= degree_; ++r) {
    *value += s.value[r] * control_.col(s.first + r);
    *derivative += s.deriv[r] * control_.col(s.first + r);
  }
}

KnotVector knots_by_averaging(const std::vector<double>& timestamps, int n,
                              int p) {
  const int m = static_cast<int>(timestamps.size()) - 1;
  if (n + 1 > m + 1)
    fail(ErrorCode::InfeasibleKnots,
         "more control points than samples requested");
  if (n < p)
    fail(ErrorCode::InfeasibleKnots, "need at least degree+1 control points");
  for (int i = 0; i < m; ++i)
    if (!(timestamps[i] < timestamps[i + 1]))
      fail(ErrorCode::DomainError, "timestamps must be strictly increasing");

  KnotVector knots(n + p + 2);
  for (int i = 0; i <= p; ++i) {
    knots[i] = timestamps.front();
    knots[n + 1 + i] = timestamps.back();
  }
  // Interior knot j is the mean of p consecutive parameter values, strided
  // so that the windows spread evenly over the samples.
  const double stride = static_cast<double>(m + 1) / (n + 1);
  for (int j = 1; j <= n - p; ++j) {
    int s = static_cast<int>(std::floor(j * stride));
    s = std::clamp(s, 1, m - p + 1);
    double sum = 0.0;
    for (int i = s; i < s + p; ++i) sum += timestamps[i];
    knots[p + j] = sum / p;
  }
  validate_knot_vector(knots, p);

  // Schoenberg-Whitney: every basis function must see a sample.
  for (int i = 0; i <= n; ++i) {
    bool seen = false;
    for (double t : timestamps)
      if (t > knots[i] && t < knots[i + p + 1]) {
        seen = true;
        break;
      }
    if (!seen && !(timestamps.front() == knots[i] && i == 0) &&
        !(timestamps.back() == knots[i + p + 1] && i == n))
      fail(ErrorCode::InfeasibleKnots,
           "empty basis support at control index " + std::to_string(i));
  }
  return knots;
}

SplineCurve fit_curve(const std::vector<double>& timestamps,
                      const Eigen::MatrixXd& samples, const KnotVector& knots,
                      int p) {
  const int m = static_cast<int>(timestamps.size());
  const int n1 = static_cast<int>(knots.size()) - p - 1;  // control count
  if (samples.cols() != m)
    fail(ErrorCode::DomainError, "one sample column per timestamp required");

  Eigen::MatrixXd B = Eigen::MatrixXd::Zero(m, n1);
  for (int k = 0; k < m; ++k) {
    const BasisSupport s = basis_support(knots, p, timestamps[k]);
    for (int r = 0; r <= p; ++r) B(k, s.first + r) = s.value[r];
  }
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(B);
  if (cod.rank() < n1)
    fail(ErrorCode::InfeasibleKnots,
         "singular collocation matrix: knots infeasible for these samples");
  const Eigen::MatrixXd P = cod.solve(samples.transpose()).transpose();
  return SplineCurve(p, knots, P);
}

SplineCurve fit_curve(const std::vector<double>& timestamps,
                      const Eigen::MatrixXd& samples, int n, int p) {
  return fit_curve(timestamps, samples, knots_by_averaging(timestamps, n, p), p);
}

void save_curve(const SplineCurve& curve, const std::string& path) {
  nlohmann::json root;
  root["degree"] = curve.degree();
  root["knots"] = curve.knots();
  root["dim"] = curve.dim();
  nlohmann::json cp = nlohmann::json::array();
  for (int c = 0; c < curve.num_control(); ++c) {
    nlohmann::json col = nlohmann::json::array();
    for (int r = 0; r < curve.dim(); ++r) col.push_back(curve.control()(r, c));
    cp.push_back(col);
  }
  root["control_points"] = cp;
  std::ofstream out(path);
  if (!out) fail(ErrorCode::IoError, "cannot write curve file " + path);
  out << root.dump() << "\n";
}

SplineCurve load_curve(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::IoError, "cannot open curve file " + path);
  nlohmann::json root;
  try {
    in >> root;
    const int degree = root.at("degree").get<int>();
    const KnotVector knots = root.at("knots").get<std::vector<double>>();
    const int dim = root.at("dim").get<int>();
    const auto& cp = root.at("control_points");
    Eigen::MatrixXd control(dim, cp.size());
    for (size_t c = 0; c < cp.size(); ++c)
      for (int r = 0; r < dim; ++r) control(r, c) = cp[c][r].get<double>();
    return SplineCurve(degree, knots, control);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::IoError, std::string("curve JSON failure: ") + e.what());
  }
}

}  // namespace surroundgeo::spline
