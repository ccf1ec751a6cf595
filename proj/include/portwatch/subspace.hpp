#pragma once

#include "portwatch/types.hpp"

namespace portwatch {

struct CovarianceEstimate {
  Matrix<double> matrix;  // p x p, symmetric
  Index n_samples = 0;
};

// Orthonormal basis of the tracked principal subspace.  eigenvalues holds the
// batch eigenvalues at initialization time (descending); the streaming update
// does not maintain them.  k = 0 (empty basis) is legal and makes the
// projector the identity.
struct SubspaceEstimate {
  Matrix<double> basis;        // p x k, orthonormal columns
  Vector<double> eigenvalues;  // k, descending, from the last batch fit

  Index p() const { return basis.rows(); }
  Index k() const { return basis.cols(); }
};

// (1/n) sum of (x_t - m)(x_t - m)^T over columns, with m the column mean if
// center is set and zero otherwise.  Population (1/n) convention.
CovarianceEstimate sample_covariance(const Eigen::Ref<const Matrix<double>>& x, bool center);

// Batch PCA on p x n data (columns are samples): center, eigendecompose the
// sample covariance, keep the smallest k whose cumulative eigenvalue fraction
// reaches var_fraction.  forced_k >= 0 overrides the fraction rule (forced_k
// = 0 gives an empty basis).  Sign convention: each column's
// largest-magnitude entry is positive.
SubspaceEstimate batch_pca(const Eigen::Ref<const Matrix<double>>& x, double var_fraction,
                           Index forced_k = -1);

// In-place modified Gram-Schmidt with selective re-orthogonalization.
// Preserves each column's direction (no sign flips), so a no-op update leaves
// an orthonormal basis bit-unchanged up to rounding.  Throws on rank
// deficiency.
void orthonormalize_columns(Matrix<double>& basis);

// One Oja step: basis <- orth(basis + eta * c c^T basis) with c = x - mean.
// eta = 0 re-orthonormalizes only (a no-op for an already-orthonormal basis).
SubspaceEstimate ipca_update(const SubspaceEstimate& estimate, const Eigen::Ref<const Vector<double>>& x,
                             const Eigen::Ref<const Vector<double>>& mean, double eta);

// r = (I - B (B^T B)^{-1} B^T)(x - mean).  General (non-orthonormal) basis is
// accepted; a singular Gram matrix throws.
Vector<double> project_residual(const Eigen::Ref<const Vector<double>>& x,
                                const Eigen::Ref<const Vector<double>>& mean,
                                const SubspaceEstimate& estimate);

// Principal angles between the column spans (inputs need full column rank,
// not orthonormality).  Largest angle = acos of the smallest singular value
// of Q1^T Q2; smallest angle = acos of the largest.
double largest_principal_angle(const Eigen::Ref<const Matrix<double>>& w_hat,
                               const Eigen::Ref<const Matrix<double>>& w);
double smallest_principal_angle(const Eigen::Ref<const Matrix<double>>& w_hat,
                                const Eigen::Ref<const Matrix<double>>& w);

// Operator-norm distance between the orthogonal projectors onto the two
// spans.  Equals sin(largest principal angle) when dimensions match.
double projector_distance(const Eigen::Ref<const Matrix<double>>& w_hat,
                          const Eigen::Ref<const Matrix<double>>& w);

struct DavisKahanResult {
  double bound = 0.0;      // 2 sqrt(k) ||Sigma_hat - Sigma||_op / lambda_k(Sigma)
  double empirical = 0.0;  // projector distance between top-k eigenspaces
  bool holds = false;
};

// Rank-gap Davis-Kahan check for a reference covariance whose (k+1)-th
// eigenvalue is zero.  Throws if lambda_k(Sigma) is not positive.
DavisKahanResult davis_kahan_bound(const CovarianceEstimate& estimated, const CovarianceEstimate& reference,
                                   Index k);

}  // namespace portwatch
