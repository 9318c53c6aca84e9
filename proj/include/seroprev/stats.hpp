#pragma once

// Special functions used by diagnostics, calibration tests, and oracles.

#include <algorithm>
#include <cmath>
#include <vector>

namespace seroprev::stats {

/// Regularized lower incomplete gamma P(a, x).
double gamma_p(double a, double x);
/// Regularized upper incomplete gamma Q(a, x) = 1 - P(a, x).
double gamma_q(double a, double x);

/// Regularized incomplete beta I_x(a, b).
double beta_inc(double a, double b, double x);

double normal_cdf(double x);

/// Survival function of the chi-square distribution.
double chi_square_sf(double x, double df);

/// CDF of Beta(a, b) at x.
inline double beta_cdf(double x, double a, double b) {
  return beta_inc(a, b, x);
}

/// Pearson chi-square uniformity test over integer values in 0..n_bins-1;
/// returns the p-value.
double uniformity_pvalue(const std::vector<int>& values, int n_bins);

/// One-sample Kolmogorov-Smirnov distance between `draws` and a CDF.
template <typename Cdf>
double ks_distance(std::vector<double> draws, Cdf&& cdf) {
  std::sort(draws.begin(), draws.end());
  const double n = static_cast<double>(draws.size());
  double d = 0.0;
  for (std::size_t i = 0; i < draws.size(); ++i) {
    const double f = cdf(draws[i]);
    d = std::max(d, std::max(f - static_cast<double>(i) / n,
                             static_cast<double>(i + 1) / n - f));
  }
  return d;
}

}  // namespace seroprev::stats
