#pragma once

// Scalar special functions backing the chi-square baseline and the
// thresholding theory: regularized incomplete gamma, chi-square quantile,
// standard-normal quantile/cdf.  Classic series/continued-fraction ports;
// no external dependency.

namespace portwatch {

// P(a, x) = gamma(a, x) / Gamma(a), the lower regularized incomplete gamma.
double regularized_gamma_p(double a, double x);

// Q(a, x) = 1 - P(a, x).
double regularized_gamma_q(double a, double x);

// Inverse of P(a, .) on [0, 1).
double inverse_gamma_p(double a, double p);

// Quantile of the chi-square distribution with `dof` degrees of freedom.
// Throws std::invalid_argument for dof < 1 or prob outside (0, 1).
double chi2_quantile(double dof, double prob);

// Phi(x) for the standard normal.
double normal_cdf(double x);

// Phi^{-1}(p), Wichura's AS241 rational approximation (double precision),
// refined by one Halley step against std::erfc.
double normal_quantile(double p);

}  // namespace portwatch
