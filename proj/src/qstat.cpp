#include "portwatch/qstat.hpp"

#include <stdexcept>
#include <string>

#include <Eigen/Dense>

#include "portwatch/special.hpp"
#include "portwatch/subspace.hpp"

namespace portwatch {

QDetector fit_q_detector(const Eigen::Ref<const Matrix<double>>& x_warmup, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("fit_q_detector: alpha must lie in (0, 1)");
  const Index p = x_warmup.rows();
  const CovarianceEstimate cov = sample_covariance(x_warmup, /*center=*/true);

  Eigen::SelfAdjointEigenSolver<Matrix<double>> eig(cov.matrix, Eigen::EigenvaluesOnly);
  if (eig.info() != Eigen::Success) throw std::runtime_error("fit_q_detector: eigendecomposition failed");
  const double lo = eig.eigenvalues().minCoeff();
  const double hi = eig.eigenvalues().maxCoeff();

  constexpr double kCondLimit = 1e12;
  double chosen = -1.0;
  for (double ridge = 0.0;;) {
    // Adding ridge*I shifts every eigenvalue by ridge, so the ladder is
    // evaluated without re-decomposing.
    if (lo + ridge > 0.0 && (hi + ridge) / (lo + ridge) < kCondLimit) {
      chosen = ridge;
      break;
    }
    ridge = (ridge == 0.0) ? 1e-8 : ridge * 100.0;
    if (ridge > 1e12) break;
  }
  if (chosen < 0.0)
    throw std::runtime_error("fit_q_detector: warm-up covariance unusable even at maximum ridge (p=" +
                             std::to_string(p) + ", n=" + std::to_string(x_warmup.cols()) + ")");

  Matrix<double> regularized = cov.matrix;
  regularized.diagonal().array() += chosen;
  Eigen::LLT<Matrix<double>> llt(regularized);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error("fit_q_detector: Cholesky failed after ridge selection");

  QDetector q;
  q.precision = llt.solve(Matrix<double>::Identity(p, p));
  // Symmetrize against solve round-off so the SPD invariant is exact.
  q.precision = ((q.precision + q.precision.transpose()) * 0.5).eval();
  q.dof = p;
  q.alpha = alpha;
  q.mean = x_warmup.rowwise().mean();
  q.ridge = chosen;
  return q;
}

double q_statistic(const QDetector& q, const Eigen::Ref<const Vector<double>>& x_centered) {
  if (x_centered.size() != q.dof) throw std::invalid_argument("q_statistic: dimension mismatch");
  return x_centered.dot(q.precision * x_centered);
}

Vector<double> q_values_stream(const Eigen::Ref<const Matrix<double>>& x, const QDetector& q,
                               Index warmup_len) {
  if (x.rows() != q.dof) throw std::invalid_argument("q_values_stream: dimension mismatch");
  if (warmup_len < 0 || warmup_len >= x.cols())
    throw std::invalid_argument("q_values_stream: warmup_len out of range");
  const Index n = x.cols() - warmup_len;
  Vector<double> out(n);
  Vector<double> centered(x.rows());
  for (Index t = 0; t < n; ++t) {
    centered = x.col(warmup_len + t) - q.mean;
    out[t] = centered.dot(q.precision * centered);
  }
  return out;
}

std::vector<bool> q_detect_stream(const Eigen::Ref<const Matrix<double>>& x, const QDetector& q,
                                  Index warmup_len) {
  const Vector<double> values = q_values_stream(x, q, warmup_len);
  const double threshold = chi2_quantile(static_cast<double>(q.dof), 1.0 - q.alpha);
  std::vector<bool> out(static_cast<std::size_t>(values.size()));
  for (Index t = 0; t < values.size(); ++t) out[static_cast<std::size_t>(t)] = values[t] > threshold;
  return out;
}

}  // namespace portwatch
