#pragma once

#include <cstdint>
#include <stdexcept>

#include "portwatch/types.hpp"

namespace portwatch {

// Long-range-dependent background noise: fractional Gaussian noise with Hurst
// index H and marginal variance sigma2.  H = 0.5 degenerates to white noise.
struct NoiseSpec {
  double hurst = 0.9;
  double variance = 1.0;

  void validate() const {
    if (!(hurst > 0.0 && hurst < 1.0))
      throw std::invalid_argument("NoiseSpec: hurst must lie in (0, 1)");
    if (!(variance > 0.0))
      throw std::invalid_argument("NoiseSpec: variance must be positive");
  }
};

// Exact autocovariance of fGn at integer lag h >= 0:
//   gamma(h) = sigma2/2 * (|h+1|^{2H} - 2|h|^{2H} + |h-1|^{2H}).
double fgn_autocovariance(const NoiseSpec& noise, Index lag);

// Length-n sample path via Davies-Harte circulant embedding (M = 2n).
// The n = 1 path is a single N(0, sigma2) draw.  Negative circulant
// eigenvalues (possible only through rounding at these H) are clipped to
// zero with a one-line warning on stderr.  Deterministic in (spec, n, seed).
Vector<double> generate_fgn(const NoiseSpec& noise, Index n, std::uint64_t seed);

}  // namespace portwatch
