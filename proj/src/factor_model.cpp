#include "portwatch/factor_model.hpp"

#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

#include "portwatch/rng.hpp"

namespace portwatch {

void TrendSpec::validate() const {
  if (period < 1) throw std::invalid_argument("TrendSpec: period must be >= 1 tick");
  if (!(amplitude >= 0.0)) throw std::invalid_argument("TrendSpec: amplitude must be >= 0");
  if (!std::isfinite(phase_offset)) throw std::invalid_argument("TrendSpec: phase_offset must be finite");
}

void FactorModel::validate() const {
  if (loadings.rows() < 1 || loadings.cols() < 1)
    throw std::invalid_argument("FactorModel: loadings must be non-empty");
  if (static_cast<Index>(trends.size()) != loadings.cols())
    throw std::invalid_argument("FactorModel: need one TrendSpec per factor column");
  for (const auto& t : trends) t.validate();
  noise.validate();
}

Matrix<double> build_factor_matrix(Index p, Index k, std::uint64_t seed) {
  if (p < 1 || k < 1) throw std::invalid_argument("build_factor_matrix: need p >= 1, k >= 1");
  if (k > p) throw std::invalid_argument("build_factor_matrix: k must not exceed p");

  std::vector<Index> rows(static_cast<std::size_t>(p));
  std::iota(rows.begin(), rows.end(), Index{0});

  constexpr int kMaxAttempts = 32;
  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    GaussianStream rng(derive_seed(seed, 0xfacULL, static_cast<std::uint64_t>(attempt)));
    Matrix<double> b = Matrix<double>::Zero(p, k);
    b.col(0).setOnes();
    for (Index j = 1; j < k; ++j) {
      // floor((1 - j/k) * p) in exact integer arithmetic; the floating-point
      // route rounds (1 - 4/5) * 10 down to 1.
      const Index count = (k - j) * p / k;
      // Partial Fisher-Yates: the first `count` entries of rows become a
      // uniform sample without replacement.
      for (Index i = 0; i < count; ++i) {
        const Index pick = i + static_cast<Index>(rng.next_below(static_cast<std::uint64_t>(p - i)));
        std::swap(rows[static_cast<std::size_t>(i)], rows[static_cast<std::size_t>(pick)]);
        b(rows[static_cast<std::size_t>(i)], j) = 1.0;
      }
    }
    if (Eigen::ColPivHouseholderQR<Matrix<double>>(b).rank() == k) return b;
  }
  throw std::runtime_error("build_factor_matrix: no full-column-rank draw in " + std::to_string(kMaxAttempts) +
                           " attempts (p=" + std::to_string(p) + ", k=" + std::to_string(k) + ")");
}

Matrix<double> generate_trends(const std::vector<TrendSpec>& trends, Index T) {
  if (trends.empty()) throw std::invalid_argument("generate_trends: need at least one trend");
  if (T < 1) throw std::invalid_argument("generate_trends: T must be >= 1");
  for (const auto& t : trends) t.validate();
  const auto k = static_cast<Index>(trends.size());
  Matrix<double> f(k, T);
  for (Index j = 0; j < k; ++j) {
    const auto& spec = trends[static_cast<std::size_t>(j)];
    const double omega = 2.0 * std::numbers::pi / static_cast<double>(spec.period);
    for (Index t = 0; t < T; ++t) {
      f(j, t) = spec.amplitude * std::sin(omega * static_cast<double>(t) + spec.phase_offset);
    }
  }
  return f;
}

std::pair<double, double> incoherence_check(const Matrix<double>& loadings) {
  if (loadings.rows() < 1 || loadings.cols() < 1)
    throw std::invalid_argument("incoherence_check: loadings must be non-empty");
  const Matrix<double> gram = loadings.transpose() * loadings;
  Eigen::SelfAdjointEigenSolver<Matrix<double>> eig(gram, Eigen::EigenvaluesOnly);
  return {eig.eigenvalues().minCoeff(), loadings.cwiseAbs().maxCoeff()};
}

std::vector<Index> default_trend_periods() { return {720, 720, 5040, 180, 144}; }

FactorModel default_factor_model(Index p, Index k, std::uint64_t seed, double amplitude, double hurst,
                                 double noise_variance) {
  const std::vector<Index> periods = default_trend_periods();
  if (k < 1 || k > static_cast<Index>(periods.size()))
    throw std::invalid_argument("default_factor_model: k must lie in [1, 5]");
  FactorModel model;
  model.loadings = build_factor_matrix(p, k, derive_seed(seed, 0x10adULL));
  GaussianStream phase_rng(derive_seed(seed, 0x9a5eULL));
  model.trends.reserve(static_cast<std::size_t>(k));
  for (Index j = 0; j < k; ++j) {
    TrendSpec spec;
    spec.period = periods[static_cast<std::size_t>(j)];
    spec.amplitude = amplitude;
    spec.phase_offset = 2.0 * std::numbers::pi * phase_rng.next_uniform();
    model.trends.push_back(spec);
  }
  model.noise = NoiseSpec{hurst, noise_variance};
  model.validate();
  return model;
}

}  // namespace portwatch
