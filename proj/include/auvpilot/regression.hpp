#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "auvpilot/actuators.hpp"
#include "auvpilot/csv.hpp"
#include "auvpilot/types.hpp"

namespace auvpilot {

/// Thrown when the regression design matrix loses rank.
class RankDeficientError : public std::runtime_error {
 public:
  RankDeficientError(const std::string& what, int column)
      : std::runtime_error(what), dependent_column(column) {}
  int dependent_column;
};

/// Thrown when a variance needed by the coefficient of determination is zero.
class DegenerateVarianceError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Coefficient of determination of a prediction: explained variance over
/// total variance. Throws DegenerateVarianceError when either the data or
/// the prediction is constant.
inline double determination(const std::vector<double>& y_hat, const std::vector<double>& y) {
  if (y_hat.size() != y.size() || y.empty()) {
    throw std::invalid_argument("determination: size mismatch");
  }
  const auto n = static_cast<double>(y.size());
  double mean_y = 0.0, mean_h = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    mean_y += y[i];
    mean_h += y_hat[i];
  }
  mean_y /= n;
  mean_h /= n;
  double ss_tot = 0.0, ss_exp = 0.0, ss_hat = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    ss_tot += (y[i] - mean_y) * (y[i] - mean_y);
    ss_exp += (y_hat[i] - mean_y) * (y_hat[i] - mean_y);
    ss_hat += (y_hat[i] - mean_h) * (y_hat[i] - mean_h);
  }
  if (ss_tot == 0.0 || ss_hat == 0.0) {
    throw DegenerateVarianceError("determination: constant data or prediction");
  }
  return ss_exp / ss_tot;
}

/// Least-squares fit F = a0 + a1 n + a2 n^2 to one direction of a static
/// surge test.
struct QuadraticFit {
  Vec3 a = Vec3::Zero();                                     ///< a0, a1, a2
  double b_det = std::numeric_limits<double>::quiet_NaN();   ///< NaN when y is constant
  bool origin_forced = false;                                ///< a0 dropped as noise
};

/// Fits the quadratic through an orthogonal decomposition of the design
/// matrix [1, n, n^2] (numerically equivalent to the normal equations).
/// Samples must come from one sign region (no mixing across n = 0).
/// When |a0| falls below origin_threshold the constant term is treated as
/// measurement noise and the curve is refitted through the origin.
inline QuadraticFit fit_quadratic(const std::vector<SurgeSample>& samples,
                                  double origin_threshold = 0.0) {
  if (samples.size() < 3) {
    throw std::invalid_argument("fit_quadratic: need at least 3 samples");
  }
  bool has_pos = false, has_neg = false;
  for (const auto& s : samples) {
    has_pos = has_pos || s.n_rpm > 0.0;
    has_neg = has_neg || s.n_rpm < 0.0;
  }
  if (has_pos && has_neg) {
    throw std::invalid_argument("fit_quadratic: samples mix both sign regions");
  }

  const auto rows = static_cast<Eigen::Index>(samples.size());
  Eigen::MatrixXd u(rows, 3);
  Eigen::VectorXd y(rows);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const double n = samples[static_cast<std::size_t>(i)].n_rpm;
    u(i, 0) = 1.0;
    u(i, 1) = n;
    u(i, 2) = n * n;
    y(i) = samples[static_cast<std::size_t>(i)].force_N;
  }

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(u);
  qr.setThreshold(1e-10);
  if (qr.rank() < 3) {
    const int dependent = static_cast<int>(qr.colsPermutation().indices()(2));
    throw RankDeficientError(
        "fit_quadratic: design matrix rank " + std::to_string(qr.rank()) +
            " < 3 (need at least 3 distinct revolution speeds); dependent column " +
            std::to_string(dependent),
        dependent);
  }

  QuadraticFit fit;
  Eigen::Vector3d a = qr.solve(y);
  if (std::abs(a(0)) < origin_threshold) {
    Eigen::MatrixXd u2 = u.rightCols(2);
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr2(u2);
    const Eigen::Vector2d a2 = qr2.solve(y);
    a << 0.0, a2(0), a2(1);
    fit.origin_forced = true;
  }
  fit.a = a;

  std::vector<double> y_hat(samples.size());
  std::vector<double> y_vec(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double n = samples[i].n_rpm;
    y_hat[i] = a(0) + a(1) * n + a(2) * n * n;
    y_vec[i] = samples[i].force_N;
  }
  try {
    fit.b_det = determination(y_hat, y_vec);
  } catch (const DegenerateVarianceError&) {
    // Constant data: coefficients are still meaningful, B_det is not.
  }
  return fit;
}

/// Splits a measured group force into the axial per-actuator share:
/// measured = count * cosine * per_actuator. Throws when the direction
/// cosine is (numerically) zero.
inline double separate_components(double group_force, int count, double direction_cosine) {
  if (count <= 0) throw std::invalid_argument("separate_components: count must be positive");
  if (std::abs(direction_cosine) < 1e-12) {
    throw std::domain_error("separate_components: direction cosine is zero");
  }
  return group_force / (static_cast<double>(count) * direction_cosine);
}

/// Updates the sign-specific quadratic curve constants from per-direction
/// fits: the forward fit's curvature maps directly, the backward fit's
/// enters negated because F = p1 |n| n = -p1 n^2 for n < 0.
inline PropellerCurve curve_from_fits(const PropellerCurve& base, const QuadraticFit& forward,
                                      const QuadraticFit& backward) {
  PropellerCurve c = base;
  c.p1_pos = forward.a(2);
  c.p1_neg = -backward.a(2);
  return c;
}

}  // namespace auvpilot
