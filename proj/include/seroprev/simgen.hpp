#pragma once

// Generative simulator of the survey pipeline (stratified two-stage cluster
// design with systematic PPS tract selection, non-response thinning, latent
// infection, imperfect correlated tests, missingness) plus brute-force
// oracles for sampler validation and simulation-based calibration.

#include <array>
#include <map>
#include <string>
#include <vector>

#include "seroprev/domain.hpp"
#include "seroprev/rng.hpp"
#include "seroprev/sampler.hpp"

namespace seroprev::simgen {

struct TruthConfig {
  TestParams test_params;
  double alpha = -3.476;  // logit(0.03)
  double sigma = 0.3;     // sd of region intercepts around alpha
  double tau = 0.3;       // sd of tract effects
  std::array<double, 3> beta_s{};
  double beta_t = 0.0;

  // Synthetic state geography.
  int n_regions = 8;
  int tracts_per_region = 40;       // tracts existing in each region
  double pop_log_mean = 8.0;        // tract total population ~ lognormal
  double pop_log_sd = 0.6;
  double adult_fraction = 0.75;

  // Sample sizes per the two-stage design.
  int sample_tracts_per_region = 30;
  int households_per_tract = 5;

  std::vector<double> nonresponse;  // per region; resized/cycled to n_regions
  std::array<double, 3> missing_prob{0.0, 0.0, 0.0};

  // Demographic cell distribution (defaults echo the survey's margins:
  // older and more female than the population).
  std::array<double, 3> age_probs{0.262, 0.358, 0.379};
  std::array<double, 2> sex_probs{0.412, 0.588};

  void validate() const;

  static TruthConfig defaults();
};

struct TruthRecord {
  TestParams test_params;
  double alpha = 0.0, sigma = 0.0, tau = 0.0;
  std::array<double, 3> beta_s{};
  double beta_t = 0.0;
  std::vector<double> alpha_r;                // per region
  std::map<std::string, double> b_t;          // per tract id
  std::vector<int> latent;                    // D per emitted participant
};

struct SimulatedSurvey {
  RawTables tables;
  TruthRecord truth;
};

/// Draws the full survey: geography, PPS tract sample, household response
/// thinning, demographics, latent infection, correlated test panels, and
/// per-test missingness. Deterministic in the stream.
SimulatedSurvey simulate_survey(const TruthConfig& truth, rng::Stream& stream);

/// Systematic PPS sample of `k` indices without replacement, inclusion
/// probability proportional to `sizes` (order randomized first).
std::vector<int> pps_systematic(const std::vector<double>& sizes, int k,
                                rng::Stream& stream);

struct ExactPosterior {
  std::vector<double> prob_infected;  // Pr(D_i = 1 | T) per participant
  double marginal_likelihood = 1.0;
};

/// Enumerates all 2^n latent configurations at fixed parameters (n <= 12) and
/// cross-checks against the conditional-independence closed form.
ExactPosterior exact_small_posterior(const std::vector<TestPanel>& panels,
                                     const std::vector<double>& pi,
                                     const TestParams& params);

struct SbcOptions {
  int n_replications = 200;
  int n_ranks = 19;                 // ranks in 0..n_ranks (L+1 bins)
  SamplerConfig fit;                // desk-scale profile
  TruthConfig survey;               // geography and sample sizes
  PriorSpec priors;
  double rhat_threshold = 1.2;      // replications above this are excluded
  std::uint64_t seed = 1;
  bool mutate_drop_covariance = false;  // fit with the R term removed
};

struct SbcResult {
  std::map<std::string, std::vector<int>> ranks;  // param -> rank per rep
  int n_excluded = 0;
  int n_bins = 0;  // n_ranks + 1
};

/// Draws truth from the priors, simulates a survey, fits it, and records the
/// rank of each true parameter within the thinned posterior draws.
SbcResult run_sbc(const SbcOptions& options);

}  // namespace seroprev::simgen
