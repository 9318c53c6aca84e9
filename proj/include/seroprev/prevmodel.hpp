#pragma once

// Multilevel logistic regression for the latent prevalence: design rows with
// sum-to-zero contrasts, log-population standardization, and the log
// prior/joint density of the full model.

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "seroprev/domain.hpp"

namespace seroprev {

inline double log_normal_pdf(double x, double mean, double var) {
  const double d = x - mean;
  return -0.5 * (std::log(2.0 * M_PI * var) + d * d / var);
}

inline double log_beta_pdf(double x, double a, double b) {
  if (!(x > 0.0 && x < 1.0))
    return -std::numeric_limits<double>::infinity();
  return (a - 1.0) * std::log(x) + (b - 1.0) * std::log1p(-x) -
         (std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b));
}

/// Affine map z = (log p - m)/s fitted over all statewide tract populations.
struct LogPopStandardizer {
  double mean = 0.0;
  double sd = 1.0;

  /// Fits over every tract in the state. `population_sd` selects the
  /// divide-by-N standard deviation (the default and documented choice).
  static LogPopStandardizer fit(const std::vector<double>& populations,
                                bool population_sd = true);
  double z(double population) const {
    return (std::log(population) - mean) / sd;
  }
};

struct DesignRow {
  std::array<double, 3> x_s{};  // two age contrasts + one sex contrast
  double x_t = 0.0;             // standardized log tract population
};

/// Frozen contrast coding: 18-44 -> (1,0), 45-64 -> (0,1), 65+ -> (-1,-1).
std::array<double, 2> age_contrast(AgeGroup g);
/// male -> +1, female -> -1.
double sex_contrast(Sex s);

DesignRow design_row(AgeGroup g, Sex s, double log_pop_z);

/// logit(pi) = alpha_r + x_s . beta_s + x_t beta_t + b; b taken from the
/// state's tract effects at `b_index`.
double linear_predictor(const RegressionState& state, const DesignRow& row,
                        int region, int b_index);
/// Same with an explicitly supplied tract effect (unsampled tracts).
double linear_predictor_with_b(const RegressionState& state,
                               const DesignRow& row, int region, double b);

/// Log prior density of all parameters; -inf encodes support violations.
/// The covariance prior contributes -log(range) inside its allowable range.
double log_prior(const TestParams& params, const RegressionState& state,
                 const PriorSpec& priors);

/// Regression-only part of the prior (everything except the S, C, R terms);
/// the sampler uses this when test parameters are held fixed.
double log_prior_regression(const RegressionState& state,
                            const PriorSpec& priors);

/// Design rows and region/tract lookups precomputed per participant.
struct ModelWorkspace {
  LogPopStandardizer standardizer;
  std::vector<DesignRow> rows;        // per participant
  std::vector<int> region;            // per participant
  std::vector<int> b_index;           // per participant, into state.b_t
  std::vector<int> tract_to_b_index;  // per tract, -1 if unsampled

  static ModelWorkspace build(const Dataset& data);
};

double participant_logit(const RegressionState& state,
                         const ModelWorkspace& ws, int i);

/// Sum_i log Pr(T_i | params, D_i) + Sum_i log Pr(D_i | pi_i) + log_prior.
double log_joint(const Dataset& data, const std::vector<std::uint8_t>& latent,
                 const TestParams& params, const RegressionState& state,
                 const PriorSpec& priors);

}  // namespace seroprev
