#pragma once

#include <vector>

#include "portwatch/types.hpp"

namespace portwatch {

// Chi-square baseline: Q = (x - mean)^T precision (x - mean), rejecting H0
// when Q exceeds the chi-square quantile at 1 - alpha.  Immutable after fit.
struct QDetector {
  Matrix<double> precision;  // symmetric positive definite
  Index dof = 0;             // p
  double alpha = 0.05;
  Vector<double> mean;       // warm-up mean, used for centering throughout
  double ridge = 0.0;        // regularizer actually applied
};

// Centered warm-up covariance inverted through a ridge ladder {0, 1e-8,
// 1e-6, ...}: the smallest entry that brings the condition number under 1e12
// wins.  Throws if even the largest ridge leaves the matrix unusable.
QDetector fit_q_detector(const Eigen::Ref<const Matrix<double>>& x_warmup, double alpha);

double q_statistic(const QDetector& q, const Eigen::Ref<const Vector<double>>& x_centered);

// Q_t for each post-warm-up column, centered by the warm-up mean.
Vector<double> q_values_stream(const Eigen::Ref<const Matrix<double>>& x, const QDetector& q,
                               Index warmup_len);

// Rejection indicators: Q_t > chi2_quantile(p, 1 - alpha).
std::vector<bool> q_detect_stream(const Eigen::Ref<const Matrix<double>>& x, const QDetector& q,
                                  Index warmup_len);

}  // namespace portwatch
