#include "seroprev/testmodel.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

namespace seroprev {

double covariance_upper_bound(double p1, double p2) {
  if (!(p1 > 0.0 && p1 < 1.0 && p2 > 0.0 && p2 < 1.0))
    throw std::domain_error("covariance_upper_bound: marginals must be in (0,1)");
  return std::min(p1, p2) - p1 * p2;
}

double joint_igg_prob(int t1, int t2, int d, const TestParams& params) {
  params.require_valid();
  const double sign = ((t1 + t2) % 2 == 0) ? 1.0 : -1.0;
  if (d == 1) {
    const double s1 = params.sensitivity[0], s2 = params.sensitivity[1];
    const double base = (t1 ? s1 : 1.0 - s1) * (t2 ? s2 : 1.0 - s2);
    return base + sign * params.cov_pos;
  }
  const double c1 = params.specificity[0], c2 = params.specificity[1];
  const double base = (t1 ? 1.0 - c1 : c1) * (t2 ? 1.0 - c2 : c2);
  return base + sign * params.cov_neg;
}

double single_test_prob(int t, int d, double s, double c) {
  if (!(s > 0.0 && s <= 1.0 && c > 0.0 && c <= 1.0))
    throw std::domain_error("single_test_prob: s, c must be in (0,1]");
  return d == 1 ? (t ? s : 1.0 - s) : (t ? 1.0 - c : c);
}

namespace {

// Probability of a compressed observed pattern (first observed test highest
// bit) given status d under the mask.
double masked_pattern_prob(unsigned pat, unsigned mask, int d,
                           const TestParams& params) {
  // Expand compressed pattern bits back to per-test results.
  int t[kNumTests] = {0, 0, 0};
  int k = std::popcount(mask);
  for (int j = 0; j < kNumTests; ++j) {
    if (mask & (4u >> j)) {
      --k;
      t[j] = static_cast<int>((pat >> k) & 1u);
    }
  }
  const bool both_igg = (mask & 4u) && (mask & 2u);
  double prob = 1.0;
  if (both_igg) {
    prob *= joint_igg_prob(t[0], t[1], d, params);
  } else {
    for (int j = 0; j < 2; ++j) {
      if (mask & (4u >> j))
        prob *= single_test_prob(t[j], d, params.sensitivity[j],
                                 params.specificity[j]);
    }
  }
  if (mask & 1u)
    prob *= single_test_prob(t[2], d, params.sensitivity[2],
                             params.specificity[2]);
  return prob;
}

}  // namespace

std::vector<double> pattern_prob_vector(int d, const TestParams& params,
                                        unsigned mask) {
  if ((mask & 7u) == 0)
    throw std::domain_error("pattern_prob_vector: empty mask");
  const auto pats = observable_patterns(mask);
  std::vector<double> probs;
  probs.reserve(pats.size());
  for (unsigned pat : pats)
    probs.push_back(masked_pattern_prob(pat, mask, d, params));
  return probs;
}

double panel_likelihood(const TestPanel& panel, int d,
                        const TestParams& params) {
  const unsigned mask = panel.mask();
  unsigned pat = 0;
  for (int j = 0; j < kNumTests; ++j) {
    if (auto r = panel.result(j)) pat = (pat << 1) | static_cast<unsigned>(*r);
  }
  return masked_pattern_prob(pat, mask, d, params);
}

double latent_full_conditional(const TestPanel& panel, double pi,
                               const TestParams& params) {
  if (!(pi >= 0.0 && pi <= 1.0))
    throw std::domain_error("latent_full_conditional: pi outside [0,1]");
  const double l1 = panel_likelihood(panel, 1, params);
  const double l0 = panel_likelihood(panel, 0, params);
  const double num = pi * l1;
  const double den = num + (1.0 - pi) * l0;
  if (den <= 0.0) return 0.0;  // impossible observation; no mass either way
  return num / den;
}

}  // namespace seroprev
