#include "portwatch/theory.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>

#include <Eigen/Dense>

#include "portwatch/factor_model.hpp"
#include "portwatch/fgn.hpp"
#include "portwatch/rng.hpp"
#include "portwatch/special.hpp"
#include "portwatch/subspace.hpp"

namespace portwatch {

Index SparseSignalSpec::support_size() const {
  return static_cast<Index>(std::floor(std::pow(static_cast<double>(p), 1.0 - beta)));
}

double SparseSignalSpec::amplitude() const { return std::sqrt(2.0 * r * std::log(static_cast<double>(p))); }

void SparseSignalSpec::validate() const {
  if (p < 2) throw std::invalid_argument("SparseSignalSpec: p must be >= 2");
  if (!(beta > 0.0 && beta <= 1.0)) throw std::invalid_argument("SparseSignalSpec: beta must lie in (0, 1]");
  if (!(r > 0.0)) throw std::invalid_argument("SparseSignalSpec: r must be > 0");
  if (support_size() < 1) throw std::invalid_argument("SparseSignalSpec: empty support for this (p, beta)");
}

double recovery_boundary(double beta) {
  if (!(beta >= 0.0 && beta <= 1.0)) throw std::invalid_argument("recovery_boundary: beta must lie in [0, 1]");
  const double s = std::sqrt(1.0 - beta);
  return (1.0 + s) * (1.0 + s);
}

double threshold_tp(Index p, double alpha_of_p) {
  if (p < 1) throw std::invalid_argument("threshold_tp: p must be >= 1");
  const double tail = alpha_of_p / static_cast<double>(p);
  if (!(tail > 0.0 && tail < 1.0)) throw std::invalid_argument("threshold_tp: alpha/p must lie in (0, 1)");
  return normal_quantile(1.0 - tail);
}

double default_alpha(Index p) {
  if (p < 2) throw std::invalid_argument("default_alpha: p must be >= 2");
  return 1.0 / std::log(static_cast<double>(p));
}

double alpha_for_rule(Index p, AlphaRule rule) {
  const double l = std::log(static_cast<double>(p));
  if (p < 2 || !(l > 0.0)) throw std::invalid_argument("alpha_for_rule: p must be >= 2");
  return rule == AlphaRule::kLogInverse ? 1.0 / l : 1.0 / (l * l);
}

std::vector<Index> support_estimator(const Eigen::Ref<const Vector<double>>& x, double t_p) {
  std::vector<Index> out;
  for (Index j = 0; j < x.size(); ++j) {
    if (x[j] > t_p) out.push_back(j);
  }
  return out;
}

std::vector<PhaseCell> phase_transition_experiment(const std::vector<Index>& p_list, double beta,
                                                   const std::vector<double>& r_list, int n_trials,
                                                   std::uint64_t seed, AlphaRule rule) {
  if (p_list.empty() || r_list.empty()) throw std::invalid_argument("phase_transition_experiment: empty grid");
  if (n_trials < 1) throw std::invalid_argument("phase_transition_experiment: n_trials must be >= 1");

  std::vector<PhaseCell> cells;
  cells.reserve(p_list.size() * r_list.size());
  std::uint64_t cell_index = 0;
  for (const Index p : p_list) {
    for (const double r : r_list) {
      SparseSignalSpec spec{p, beta, r};
      spec.validate();
      const Index s = spec.support_size();
      const double amplitude = spec.amplitude();
      const double t_p = threshold_tp(p, alpha_for_rule(p, rule));

      int successes = 0;
      std::vector<Index> indices(static_cast<std::size_t>(p));
      for (int trial = 0; trial < n_trials; ++trial) {
        GaussianStream rng(derive_seed(seed, cell_index, static_cast<std::uint64_t>(trial)));
        // Uniform support of size s via partial Fisher-Yates.
        std::iota(indices.begin(), indices.end(), Index{0});
        for (Index i = 0; i < s; ++i) {
          const Index pick = i + static_cast<Index>(rng.next_below(static_cast<std::uint64_t>(p - i)));
          std::swap(indices[static_cast<std::size_t>(i)], indices[static_cast<std::size_t>(pick)]);
        }
        // Exact recovery == every support coordinate clears t_p and no noise
        // coordinate does; checked without materializing x.
        bool exact = true;
        for (Index i = 0; i < p && exact; ++i) {
          const double value = (i < s ? amplitude : 0.0) + rng.next();
          const bool in_hat = value > t_p;
          exact = (in_hat == (i < s));
        }
        // Keep the draw count per trial independent of the early exit so
        // seeds stay aligned if the loop above ever changes: nothing more to
        // draw -- the stream is per-trial, so early exit is safe.
        if (exact) ++successes;
      }
      cells.push_back(PhaseCell{p, beta, r, n_trials,
                                static_cast<double>(successes) / static_cast<double>(n_trials)});
      ++cell_index;
    }
  }
  return cells;
}

void CorrelationSpec::require_square_summable() const {
  switch (kind) {
    case Kind::kIid:
      return;
    case Kind::kAr1:
      if (!(std::abs(phi) < 1.0))
        throw std::invalid_argument(
            "CorrelationSpec: AR(1) needs |phi| < 1 for square-summable correlations");
      return;
    case Kind::kFgn:
      if (!(hurst > 0.0 && hurst < 0.75))
        throw std::invalid_argument(
            "CorrelationSpec: fGn correlations are square-summable only for H < 3/4 "
            "(rho_t ~ t^{2H-2} gives sum rho_t^2 ~ t^{4H-3})");
      return;
  }
  throw std::invalid_argument("CorrelationSpec: unknown kind");
}

std::vector<ConsistencyRow> ewma_variance_consistency_experiment(const CorrelationSpec& corr,
                                                                 const std::vector<double>& lambda_list,
                                                                 Index n, int n_reps, std::uint64_t seed,
                                                                 double sigma2_init) {
  corr.require_square_summable();
  if (lambda_list.empty()) throw std::invalid_argument("consistency experiment: empty lambda list");
  if (n < 1 || n_reps < 1) throw std::invalid_argument("consistency experiment: need n >= 1, n_reps >= 1");

  std::vector<ConsistencyRow> rows;
  rows.reserve(lambda_list.size());
  std::vector<double> series(static_cast<std::size_t>(n));
  // terminal[rep][lambda]: one simulated series feeds every lambda, so the
  // comparison across lambdas is paired.
  std::vector<std::vector<double>> terminal(lambda_list.size(),
                                            std::vector<double>(static_cast<std::size_t>(n_reps)));
  for (int rep = 0; rep < n_reps; ++rep) {
    const std::uint64_t rep_seed = derive_seed(seed, 0xc0515ULL, static_cast<std::uint64_t>(rep));
    switch (corr.kind) {
      case CorrelationSpec::Kind::kIid: {
        GaussianStream rng(rep_seed);
        for (auto& v : series) v = rng.next();
        break;
      }
      case CorrelationSpec::Kind::kAr1: {
        GaussianStream rng(rep_seed);
        const double scale = std::sqrt(1.0 - corr.phi * corr.phi);
        double x = rng.next();  // stationary start
        series[0] = x;
        for (Index t = 1; t < n; ++t) {
          x = corr.phi * x + scale * rng.next();
          series[static_cast<std::size_t>(t)] = x;
        }
        break;
      }
      case CorrelationSpec::Kind::kFgn: {
        const Vector<double> path = generate_fgn(NoiseSpec{corr.hurst, 1.0}, n, rep_seed);
        for (Index t = 0; t < n; ++t) series[static_cast<std::size_t>(t)] = path[t];
        break;
      }
    }
    for (std::size_t li = 0; li < lambda_list.size(); ++li) {
      const double lam = lambda_list[li];
      if (!(lam > 0.0 && lam < 1.0))
        throw std::invalid_argument("consistency experiment: lambda must lie in (0, 1)");
      double sigma2 = sigma2_init;
      for (const double v : series) sigma2 += lam * (v * v - sigma2);
      terminal[li][static_cast<std::size_t>(rep)] = sigma2;
    }
  }

  for (std::size_t li = 0; li < lambda_list.size(); ++li) {
    const auto& vals = terminal[li];
    const double mean = std::accumulate(vals.begin(), vals.end(), 0.0) / static_cast<double>(n_reps);
    double var = 0.0;
    for (const double v : vals) var += (v - mean) * (v - mean);
    var /= static_cast<double>(n_reps);
    rows.push_back(ConsistencyRow{lambda_list[li], mean - 1.0, var});
  }
  return rows;
}

std::vector<FidelityRow> residual_fidelity_experiment(const std::vector<Index>& p_list, Index k, Index n,
                                                      double snr, std::uint64_t seed) {
  if (p_list.empty()) throw std::invalid_argument("fidelity experiment: empty p list");
  if (k < 1 || n < 2) throw std::invalid_argument("fidelity experiment: need k >= 1, n >= 2");
  if (!(snr >= 0.0)) throw std::invalid_argument("fidelity experiment: snr must be >= 0");

  constexpr Index kTestTicks = 2000;
  constexpr Index kAnomalousStreams = 3;

  std::vector<FidelityRow> rows;
  rows.reserve(p_list.size());
  for (std::size_t pi = 0; pi < p_list.size(); ++pi) {
    const Index p = p_list[pi];
    if (p < k || p < kAnomalousStreams)
      throw std::invalid_argument("fidelity experiment: p too small for k or the anomalous streams");
    const std::uint64_t model_seed = derive_seed(seed, 0xf1de1ULL, static_cast<std::uint64_t>(pi));
    // Unit-power trends (amplitude sqrt(2)) match the theory's E f f^T = I_k
    // normalization; noise is white so Sigma_eps = I exactly.
    const FactorModel model = default_factor_model(p, k, model_seed, std::numbers::sqrt2, 0.5, 1.0);
    const Matrix<double>& b = model.loadings;

    // Anomaly-free fit window.
    const Matrix<double> factors_fit = generate_trends(model.trends, n);
    Matrix<double> noise_fit(p, n);
    for (Index j = 0; j < p; ++j) {
      noise_fit.row(j) =
          generate_fgn(model.noise, n, derive_seed(model_seed, 0x0e95ULL, static_cast<std::uint64_t>(j)))
              .transpose();
    }
    const Matrix<double> x_fit = b * factors_fit + noise_fit;
    const CovarianceEstimate cov_hat = sample_covariance(x_fit, /*center=*/false);

    // Top-k eigenvectors of the uncentered second-moment matrix.
    Eigen::SelfAdjointEigenSolver<Matrix<double>> eig(cov_hat.matrix);
    if (eig.info() != Eigen::Success) throw std::runtime_error("fidelity experiment: eigensolver failed");
    Matrix<double> basis_hat(p, k);
    for (Index j = 0; j < k; ++j) basis_hat.col(j) = eig.eigenvectors().col(p - 1 - j);

    // Constant anomaly:  u_i = snr * warm-up sd on the first three streams.
    Vector<double> shift = Vector<double>::Zero(p);
    for (Index j = 0; j < kAnomalousStreams; ++j) {
      const auto row = x_fit.row(j);
      const double mean = row.mean();
      shift[j] = snr * std::sqrt((row.array() - mean).square().mean());
    }

    // Anomalous continuation: fresh trends/noise, same model.
    const Index t0 = n;
    Matrix<double> factors_test(k, kTestTicks);
    {
      const Matrix<double> full = generate_trends(model.trends, t0 + kTestTicks);
      factors_test = full.rightCols(kTestTicks);
    }
    Matrix<double> noise_test(p, kTestTicks);
    for (Index j = 0; j < p; ++j) {
      noise_test.row(j) =
          generate_fgn(model.noise, kTestTicks,
                       derive_seed(model_seed, 0x7e57ULL, static_cast<std::uint64_t>(j)))
              .transpose();
    }
    Matrix<double> x_test = b * factors_test + noise_test;
    x_test.colwise() += shift;

    // r = (I - P_hat) x; gap_i = mean_t (r(i) - eps(i) - u(i))^2.
    Matrix<double> residual = x_test;
    residual.noalias() -= basis_hat * (basis_hat.transpose() * x_test);
    Matrix<double> gap_matrix = residual - noise_test;
    gap_matrix.colwise() -= shift;
    const Vector<double> per_coord = gap_matrix.rowwise().squaredNorm() / static_cast<double>(kTestTicks);

    // Plug-in bound ingredients.
    const auto [lambda_min, c_max] = incoherence_check(b);
    const Matrix<double> f_bar =
        factors_fit * factors_fit.transpose() / static_cast<double>(n);
    Matrix<double> sigma_true = b * f_bar * b.transpose();
    sigma_true.diagonal().array() += model.noise.variance;
    Matrix<double> diff = cov_hat.matrix - sigma_true;
    const double dn = diff.selfadjointView<Eigen::Lower>().operatorNorm();
    const double c_f = factors_fit.colwise().norm().maxCoeff() / std::sqrt(static_cast<double>(k));
    const double tr_sigma_u = shift.squaredNorm();       // Sigma_u = u u^T
    const double norm_sigma_u = shift.squaredNorm();
    const double kd = static_cast<double>(k);
    const double pd = static_cast<double>(p);
    const double term1 =
        dn * (2.0 * std::sqrt(kd * pd) / lambda_min) * (c_f * c_max * kd + 1.0 + std::sqrt(tr_sigma_u / pd));
    const double term2 =
        (std::sqrt(kd) * c_max / lambda_min) * (1.0 + std::sqrt(kd * pd) * c_max * std::sqrt(norm_sigma_u));
    const double bound = (term1 + term2) * (term1 + term2);

    rows.push_back(FidelityRow{p, per_coord.mean(), per_coord.maxCoeff(), bound, lambda_min});
  }
  return rows;
}

}  // namespace portwatch
