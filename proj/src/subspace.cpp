#include "portwatch/subspace.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace portwatch {

CovarianceEstimate sample_covariance(const Eigen::Ref<const Matrix<double>>& x, bool center) {
  const Index p = x.rows();
  const Index n = x.cols();
  if (p < 1 || n < 1) throw std::invalid_argument("sample_covariance: need non-empty data");
  CovarianceEstimate out;
  out.n_samples = n;
  out.matrix.setZero(p, p);
  if (center) {
    const Vector<double> mean = x.rowwise().mean();
    const Matrix<double> centered = x.colwise() - mean;
    out.matrix.selfadjointView<Eigen::Lower>().rankUpdate(centered, 1.0 / static_cast<double>(n));
  } else {
    out.matrix.selfadjointView<Eigen::Lower>().rankUpdate(x, 1.0 / static_cast<double>(n));
  }
  out.matrix.triangularView<Eigen::StrictlyUpper>() = out.matrix.transpose();
  return out;
}

namespace {

// Flip each column so its largest-magnitude entry is positive; first such
// entry wins ties.
void fix_column_signs(Matrix<double>& basis) {
  for (Index j = 0; j < basis.cols(); ++j) {
    Index arg = 0;
    basis.col(j).cwiseAbs().maxCoeff(&arg);
    if (basis(arg, j) < 0.0) basis.col(j) = -basis.col(j);
  }
}

}  // namespace

SubspaceEstimate batch_pca(const Eigen::Ref<const Matrix<double>>& x, double var_fraction, Index forced_k) {
  const Index p = x.rows();
  if (forced_k > p) throw std::invalid_argument("batch_pca: forced_k must not exceed p");
  if (forced_k < 0 && !(var_fraction > 0.0 && var_fraction <= 1.0))
    throw std::invalid_argument("batch_pca: var_fraction must lie in (0, 1]");

  const CovarianceEstimate cov = sample_covariance(x, /*center=*/true);
  Eigen::SelfAdjointEigenSolver<Matrix<double>> eig(cov.matrix);
  if (eig.info() != Eigen::Success) throw std::runtime_error("batch_pca: eigendecomposition failed");

  // Eigen returns ascending order; view descending.  Eigenvalues below the
  // standard relative rank tolerance are rounding residue of rank-deficient
  // data, not retainable variance: clamp them so var_fraction = 1 stops at
  // the last genuinely nonzero direction (the clamped cumulative sum hits
  // the clamped total exactly, both being the same additions in the same
  // order).
  const Vector<double> lambda_desc = eig.eigenvalues().reverse();
  const double tol =
      static_cast<double>(p) * std::numeric_limits<double>::epsilon() * std::max(lambda_desc[0], 0.0);
  const Vector<double> lambda_clamped = (lambda_desc.array() > tol).select(lambda_desc, 0.0);
  const double total = lambda_clamped.sum();
  if (!(total > 0.0)) throw std::invalid_argument("batch_pca: data has zero variance");

  Index k = forced_k;
  if (k < 0) {
    double cum = 0.0;
    k = p;
    for (Index j = 0; j < p; ++j) {
      cum += lambda_clamped[j];
      if (cum / total >= var_fraction) {
        k = j + 1;
        break;
      }
    }
  }

  SubspaceEstimate out;
  out.basis.resize(p, k);
  out.eigenvalues.resize(k);
  for (Index j = 0; j < k; ++j) {
    out.basis.col(j) = eig.eigenvectors().col(p - 1 - j);
    out.eigenvalues[j] = lambda_desc[j];
  }
  fix_column_signs(out.basis);
  return out;
}

void orthonormalize_columns(Matrix<double>& basis) {
  const Index k = basis.cols();
  for (Index j = 0; j < k; ++j) {
    auto col = basis.col(j);
    const double before = col.norm();
    for (Index i = 0; i < j; ++i) col.noalias() -= basis.col(i).dot(col) * basis.col(i);
    double after = col.norm();
    // "Twice is enough" (Kahan/Parlett): heavy cancellation means the first
    // pass may have left a non-negligible component in the earlier columns.
    if (after < 0.5 * before) {
      for (Index i = 0; i < j; ++i) col.noalias() -= basis.col(i).dot(col) * basis.col(i);
      after = col.norm();
    }
    if (!(after > 1e-150 * std::max(1.0, before)))
      throw std::runtime_error("orthonormalize_columns: rank-deficient basis at column " + std::to_string(j));
    col /= after;
  }
}

SubspaceEstimate ipca_update(const SubspaceEstimate& estimate, const Eigen::Ref<const Vector<double>>& x,
                             const Eigen::Ref<const Vector<double>>& mean, double eta) {
  if (x.size() != estimate.p() || mean.size() != estimate.p())
    throw std::invalid_argument("ipca_update: dimension mismatch");
  if (!(eta >= 0.0)) throw std::invalid_argument("ipca_update: eta must be >= 0");
  SubspaceEstimate out = estimate;
  if (out.k() == 0) return out;
  const Vector<double> centered = x - mean;
  const Vector<double> w = out.basis.transpose() * centered;  // k
  out.basis.noalias() += eta * centered * w.transpose();
  orthonormalize_columns(out.basis);
  return out;
}

Vector<double> project_residual(const Eigen::Ref<const Vector<double>>& x,
                                const Eigen::Ref<const Vector<double>>& mean,
                                const SubspaceEstimate& estimate) {
  if (x.size() != estimate.p() || mean.size() != estimate.p())
    throw std::invalid_argument("project_residual: dimension mismatch");
  Vector<double> centered = x - mean;
  if (estimate.k() == 0) return centered;
  const Matrix<double> gram = estimate.basis.transpose() * estimate.basis;
  Eigen::LDLT<Matrix<double>> ldlt(gram);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive() ||
      ldlt.vectorD().minCoeff() < 1e-12 * ldlt.vectorD().maxCoeff())
    throw std::invalid_argument("project_residual: basis Gram matrix is singular");
  const Vector<double> coeffs = ldlt.solve(estimate.basis.transpose() * centered);
  centered.noalias() -= estimate.basis * coeffs;
  return centered;
}

namespace {

// Thin orthonormal factor of the column span; throws on rank deficiency.
Matrix<double> thin_q(const Eigen::Ref<const Matrix<double>>& w) {
  if (w.rows() < 1 || w.cols() < 1) throw std::invalid_argument("principal angles: empty basis");
  if (w.cols() > w.rows()) throw std::invalid_argument("principal angles: more columns than rows");
  Eigen::ColPivHouseholderQR<Matrix<double>> qr(w);
  if (qr.rank() < w.cols()) throw std::invalid_argument("principal angles: basis is rank-deficient");
  Matrix<double> q = qr.householderQ() * Matrix<double>::Identity(w.rows(), w.cols());
  return q;
}

Eigen::JacobiSVD<Matrix<double>> cross_svd(const Eigen::Ref<const Matrix<double>>& w_hat,
                                           const Eigen::Ref<const Matrix<double>>& w) {
  const Matrix<double> q1 = thin_q(w_hat);
  const Matrix<double> q2 = thin_q(w);
  return Eigen::JacobiSVD<Matrix<double>>(q1.transpose() * q2);
}

double clamp01(double v) { return std::min(1.0, std::max(0.0, v)); }

}  // namespace

double largest_principal_angle(const Eigen::Ref<const Matrix<double>>& w_hat,
                               const Eigen::Ref<const Matrix<double>>& w) {
  const auto svd = cross_svd(w_hat, w);
  return std::acos(clamp01(svd.singularValues().minCoeff()));
}

double smallest_principal_angle(const Eigen::Ref<const Matrix<double>>& w_hat,
                                const Eigen::Ref<const Matrix<double>>& w) {
  const auto svd = cross_svd(w_hat, w);
  return std::acos(clamp01(svd.singularValues().maxCoeff()));
}

double projector_distance(const Eigen::Ref<const Matrix<double>>& w_hat,
                          const Eigen::Ref<const Matrix<double>>& w) {
  if (w_hat.cols() == w.cols()) {
    // Equal dimensions: ||P1 - P2||_op = sin(largest principal angle);
    // computed as sqrt((1-s)(1+s)) from the smallest cross singular value,
    // which is better conditioned than sin(acos(s)) near s = 1.
    const auto svd = cross_svd(w_hat, w);
    const double s = clamp01(svd.singularValues().minCoeff());
    return std::sqrt((1.0 - s) * (1.0 + s));
  }
  const Matrix<double> q1 = thin_q(w_hat);
  const Matrix<double> q2 = thin_q(w);
  Matrix<double> diff = q1 * q1.transpose() - q2 * q2.transpose();
  return diff.selfadjointView<Eigen::Lower>().operatorNorm();
}

DavisKahanResult davis_kahan_bound(const CovarianceEstimate& estimated, const CovarianceEstimate& reference,
                                   Index k) {
  const Index p = reference.matrix.rows();
  if (k < 1 || k > p) throw std::invalid_argument("davis_kahan_bound: k must lie in [1, p]");
  if (estimated.matrix.rows() != p || estimated.matrix.cols() != p || reference.matrix.cols() != p)
    throw std::invalid_argument("davis_kahan_bound: covariance shape mismatch");

  Eigen::SelfAdjointEigenSolver<Matrix<double>> eig_ref(reference.matrix);
  Eigen::SelfAdjointEigenSolver<Matrix<double>> eig_est(estimated.matrix);
  if (eig_ref.info() != Eigen::Success || eig_est.info() != Eigen::Success)
    throw std::runtime_error("davis_kahan_bound: eigendecomposition failed");

  const double lambda_k = eig_ref.eigenvalues()[p - k];
  if (!(lambda_k > 0.0))
    throw std::invalid_argument("davis_kahan_bound: lambda_k(reference) must be positive");

  Matrix<double> diff = estimated.matrix - reference.matrix;
  const double op_norm = diff.selfadjointView<Eigen::Lower>().operatorNorm();

  Matrix<double> top_ref(p, k);
  Matrix<double> top_est(p, k);
  for (Index j = 0; j < k; ++j) {
    top_ref.col(j) = eig_ref.eigenvectors().col(p - 1 - j);
    top_est.col(j) = eig_est.eigenvectors().col(p - 1 - j);
  }

  DavisKahanResult out;
  out.bound = 2.0 * std::sqrt(static_cast<double>(k)) * op_norm / lambda_k;
  out.empirical = projector_distance(top_est, top_ref);
  out.holds = out.empirical <= out.bound + 1e-9;
  return out;
}

}  // namespace portwatch
