#include "portwatch/fgn.hpp"

#include <cmath>
#include <complex>
#include <iostream>
#include <vector>

#include <unsupported/Eigen/FFT>

#include "portwatch/rng.hpp"

namespace portwatch {

double fgn_autocovariance(const NoiseSpec& noise, Index lag) {
  noise.validate();
  if (lag < 0) throw std::invalid_argument("fgn_autocovariance: lag must be >= 0");
  const double h = static_cast<double>(lag);
  const double e = 2.0 * noise.hurst;
  return 0.5 * noise.variance * (std::pow(h + 1.0, e) - 2.0 * std::pow(h, e) + std::pow(std::abs(h - 1.0), e));
}

Vector<double> generate_fgn(const NoiseSpec& noise, Index n, std::uint64_t seed) {
  noise.validate();
  if (n < 1) throw std::invalid_argument("generate_fgn: n must be >= 1");
  GaussianStream gauss(seed);
  if (n == 1) {
    Vector<double> out(1);
    out[0] = std::sqrt(noise.variance) * gauss.next();
    return out;
  }

  const Index m = 2 * n;
  // First row of the circulant embedding: gamma(0..n), then gamma(n-1..1).
  std::vector<std::complex<double>> row(static_cast<std::size_t>(m));
  for (Index j = 0; j <= n; ++j) row[static_cast<std::size_t>(j)] = fgn_autocovariance(noise, j);
  for (Index j = n + 1; j < m; ++j) row[static_cast<std::size_t>(j)] = fgn_autocovariance(noise, m - j);

  Eigen::FFT<double> fft;
  std::vector<std::complex<double>> spectrum(static_cast<std::size_t>(m));
  fft.fwd(spectrum, row);

  // The row is symmetric, so the spectrum is real up to rounding; tiny
  // negative eigenvalues are clipped (spec'd fallback for non-embeddable
  // cases, which fGn itself does not hit for H in (0,1)).
  double min_lambda = 0.0;
  Vector<double> lambda(m);
  for (Index k = 0; k < m; ++k) {
    const double v = spectrum[static_cast<std::size_t>(k)].real();
    min_lambda = std::min(min_lambda, v);
    lambda[k] = std::max(v, 0.0);
  }
  if (min_lambda < -1e-8 * lambda.maxCoeff()) {
    std::cerr << "generate_fgn: clipped negative circulant eigenvalue " << min_lambda << " to zero\n";
  }

  // Hermitian-symmetric Gaussian spectrum: W_0, W_{m/2} real N(0,1);
  // W_k = (U + iV)/sqrt(2) for 0 < k < m/2; W_{m-k} = conj(W_k).
  // Draw order is fixed (k ascending) for replayability.
  std::vector<std::complex<double>> xi(static_cast<std::size_t>(m));
  xi[0] = std::sqrt(lambda[0]) * gauss.next();
  for (Index k = 1; k < n; ++k) {
    const double scale = std::sqrt(0.5 * lambda[k]);
    const std::complex<double> w(scale * gauss.next(), scale * gauss.next());
    xi[static_cast<std::size_t>(k)] = w;
    xi[static_cast<std::size_t>(m - k)] = std::conj(w);
  }
  xi[static_cast<std::size_t>(n)] = std::sqrt(lambda[n]) * gauss.next();

  // X_j = (1/sqrt(m)) sum_k xi_k e^{2*pi*i*jk/m}; Eigen's inv() includes the
  // 1/m normalization, so rescale by sqrt(m).
  std::vector<std::complex<double>> path(static_cast<std::size_t>(m));
  fft.inv(path, xi);
  const double rescale = std::sqrt(static_cast<double>(m));
  Vector<double> out(n);
  for (Index j = 0; j < n; ++j) out[j] = rescale * path[static_cast<std::size_t>(j)].real();
  return out;
}

}  // namespace portwatch
