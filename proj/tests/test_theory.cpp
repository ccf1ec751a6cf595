#include <cmath>
#include <stdexcept>
#include <vector>

#include <doctest.h>

#include "portwatch/detector.hpp"
#include "portwatch/theory.hpp"

namespace pw = portwatch;

TEST_SUITE("theory") {

TEST_CASE("recovery boundary endpoints and shape") {
  CHECK(pw::recovery_boundary(0.0) == doctest::Approx(4.0));
  CHECK(pw::recovery_boundary(1.0) == doctest::Approx(1.0));
  CHECK(pw::recovery_boundary(0.75) == doctest::Approx(2.25));
  double prev = 5.0;
  for (double beta = 0.0; beta <= 1.0; beta += 0.05) {
    const double g = pw::recovery_boundary(beta);
    CHECK(g < prev);
    CHECK(g >= 1.0);
    CHECK(g <= 4.0);
    prev = g;
  }
  CHECK_THROWS_AS(pw::recovery_boundary(-0.1), std::invalid_argument);
  CHECK_THROWS_AS(pw::recovery_boundary(1.1), std::invalid_argument);
}

TEST_CASE("threshold matches frozen quantile references") {
  // Frozen from an independent high-precision quantile evaluation.
  CHECK(pw::threshold_tp(100, pw::default_alpha(100)) ==
        doctest::Approx(2.8521145427229597).epsilon(1e-13));
  CHECK(pw::alpha_for_rule(5000, pw::AlphaRule::kLogSquaredInverse) ==
        doctest::Approx(0.01378500739746479).epsilon(1e-14));
  CHECK(pw::threshold_tp(5000, pw::alpha_for_rule(5000, pw::AlphaRule::kLogSquaredInverse)) ==
        doctest::Approx(4.544216245255379).epsilon(1e-13));
  CHECK(pw::default_alpha(100) == doctest::Approx(1.0 / std::log(100.0)).epsilon(1e-15));
  CHECK(pw::alpha_for_rule(100, pw::AlphaRule::kLogInverse) == pw::default_alpha(100));

  // A tail mass of one half sits at the median.
  CHECK(pw::threshold_tp(2, 1.0) == doctest::Approx(0.0));

  // Strictly increasing in p under the default rule.
  double prev = -1e9;
  for (pw::Index p : {10, 100, 1000, 10000, 100000}) {
    const double t = pw::threshold_tp(p, pw::default_alpha(p));
    CHECK(t > prev);
    prev = t;
  }
  CHECK_THROWS_AS(pw::threshold_tp(2, 3.0), std::invalid_argument);
}

TEST_CASE("support estimator is a strict threshold") {
  pw::Vector<double> x(4);
  x << 0.5, 2.0, 1.0, 3.0;
  CHECK(pw::support_estimator(x, 5.0).empty());
  const auto s = pw::support_estimator(x, 1.0);  // 1.0 itself excluded
  REQUIRE(s.size() == 2);
  CHECK(s[0] == 1);
  CHECK(s[1] == 3);
}

TEST_CASE("sparse signal arithmetic") {
  pw::SparseSignalSpec spec{5000, 0.75, 2.0};
  CHECK(spec.support_size() == 8);  // floor(5000^0.25)
  CHECK(spec.amplitude() == doctest::Approx(std::sqrt(4.0 * std::log(5000.0))).epsilon(1e-14));
  CHECK_NOTHROW(spec.validate());
  CHECK(pw::SparseSignalSpec{100, 0.75, 1.0}.support_size() == 3);
  CHECK(pw::SparseSignalSpec{500, 0.75, 1.0}.support_size() == 4);
  CHECK_THROWS_AS((pw::SparseSignalSpec{100, 0.0, 1.0}.validate()), std::invalid_argument);
  CHECK_THROWS_AS((pw::SparseSignalSpec{100, 0.75, 0.0}.validate()), std::invalid_argument);
}

TEST_CASE("square-summability screening") {
  CHECK_NOTHROW(pw::CorrelationSpec{pw::CorrelationSpec::Kind::kIid, 0.0, 0.5}.require_square_summable());
  CHECK_NOTHROW(pw::CorrelationSpec{pw::CorrelationSpec::Kind::kAr1, 0.5, 0.5}.require_square_summable());
  CHECK_THROWS_AS((pw::CorrelationSpec{pw::CorrelationSpec::Kind::kAr1, 1.0, 0.5}.require_square_summable()),
                  std::invalid_argument);
  CHECK_NOTHROW(pw::CorrelationSpec{pw::CorrelationSpec::Kind::kFgn, 0.0, 0.6}.require_square_summable());
  CHECK_THROWS_AS((pw::CorrelationSpec{pw::CorrelationSpec::Kind::kFgn, 0.0, 0.8}.require_square_summable()),
                  std::invalid_argument);
}

TEST_CASE("variance recursion decays geometrically on a silent series") {
  const double lambda = 0.01;
  double sigma2 = 2.0;
  for (int i = 0; i < 100; ++i) sigma2 = pw::ewma(sigma2, 0.0, lambda);
  CHECK(sigma2 == doctest::Approx(2.0 * std::pow(1.0 - lambda, 100)).epsilon(1e-10));
}

TEST_CASE("consistency experiment: small-scale bias and variance ordering") {
  const pw::CorrelationSpec iid{pw::CorrelationSpec::Kind::kIid, 0.0, 0.5};
  const auto rows = pw::ewma_variance_consistency_experiment(iid, {1e-2, 1e-3, 1e-4}, 20000, 20, 17);
  REQUIRE(rows.size() == 3);
  // At lambda = 1e-4 the cold-start transient still carries e^{-2} of the
  // initial deficit at this n, so the near-zero-bias check sits at 1e-3.
  CHECK(std::abs(rows[1].bias) < 0.05);
  CHECK(rows[0].variance > rows[2].variance);   // noisier at the larger memory

  const pw::CorrelationSpec bad{pw::CorrelationSpec::Kind::kFgn, 0.0, 0.9};
  CHECK_THROWS_AS(pw::ewma_variance_consistency_experiment(bad, {1e-3}, 100, 2, 1),
                  std::invalid_argument);
}

TEST_CASE("phase experiment: far-regime smoke at a small dimension") {
  const auto cells = pw::phase_transition_experiment({200}, 0.75, {0.1, 9.0}, 60, 5);
  REQUIRE(cells.size() == 2);
  CHECK(cells[0].exact_recovery_rate <= 0.2);
  CHECK(cells[1].exact_recovery_rate >= 0.6);
  CHECK(cells[0].p == 200);
  CHECK(cells[0].n_trials == 60);
}

TEST_CASE("fidelity experiment: gap stays under the plug-in bound") {
  const auto rows = pw::residual_fidelity_experiment({30}, 3, 2000, 7.0, 9);
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].p == 30);
  CHECK(rows[0].mean_sq_gap >= 0.0);
  CHECK(rows[0].max_sq_gap >= rows[0].mean_sq_gap);
  CHECK(rows[0].lambda_min > 0.0);
  CHECK(rows[0].mean_sq_gap <= rows[0].bound * 1.05);
}

TEST_CASE("fidelity bound tightens with a longer fit window") {
  // The empirical gap has an n-independent floor (the injected shift is not
  // orthogonal to the loading span), but the plug-in bound is driven by
  // ||Sigma_hat - Sigma||, which does shrink as the fit window grows.
  double short_fit = 0.0, long_fit = 0.0;
  for (std::uint64_t seed = 21; seed < 26; ++seed) {
    const auto short_row = pw::residual_fidelity_experiment({40}, 3, 500, 7.0, seed)[0];
    const auto long_row = pw::residual_fidelity_experiment({40}, 3, 8000, 7.0, seed)[0];
    short_fit += short_row.bound;
    long_fit += long_row.bound;
    CHECK(short_row.mean_sq_gap <= short_row.bound * 1.05);
    CHECK(long_row.mean_sq_gap <= long_row.bound * 1.05);
  }
  CHECK(long_fit < short_fit);
}

}  // TEST_SUITE
