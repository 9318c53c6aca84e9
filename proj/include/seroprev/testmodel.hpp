#pragma once

// Diagnostic-test likelihood: correlated IgG pair probabilities, single-test
// probabilities, pattern probability vectors under missingness masks, and the
// exact full conditional of the latent infection indicator.

#include <vector>

#include "seroprev/domain.hpp"

namespace seroprev {

/// min(p1,p2) - p1*p2; the largest admissible conditional covariance between
/// two positive-dependent binary tests with marginals p1, p2.
double covariance_upper_bound(double p1, double p2);

/// Joint probability of the IgG pair result (t1,t2) given infection status d.
double joint_igg_prob(int t1, int t2, int d, const TestParams& params);

/// Probability of a single test result t given status d for a test with
/// sensitivity s and specificity c.
double single_test_prob(int t, int d, double s, double c);

/// Probabilities over all observable patterns under `mask` given status d,
/// ordered as observable_patterns(mask). The IgG covariance enters only when
/// both IgG tests are observed.
std::vector<double> pattern_prob_vector(int d, const TestParams& params,
                                        unsigned mask);

/// Likelihood of the observed panel given status d (the panel's own pattern
/// probability under its missingness mask).
double panel_likelihood(const TestPanel& panel, int d,
                        const TestParams& params);

/// Pr(D_i = 1 | T_i, pi_i, params) = pi L1 / (pi L1 + (1-pi) L0). Exact
/// Bernoulli full conditional; also the per-participant posterior probability
/// of past infection at fixed parameters.
double latent_full_conditional(const TestPanel& panel, double pi,
                               const TestParams& params);

}  // namespace seroprev
