#pragma once

// Posterior summaries: poststratified prevalence, HPD intervals, convergence
// diagnostics, per-participant infection probabilities, and the non-response
// sensitivity sweep.

#include <utility>
#include <vector>

#include "seroprev/domain.hpp"
#include "seroprev/sampler.hpp"

namespace seroprev {

double posterior_mean(const std::vector<double>& draws);

/// Chen-Shao empirical HPD: shortest order-statistic window containing
/// ceil(level * n) draws; ties broken by the smallest starting index.
std::pair<double, double> hpd_interval(std::vector<double> draws,
                                       double level);

std::pair<double, double> equal_tailed_interval(std::vector<double> draws,
                                                double level);

/// Effective sample size of one sequence via the initial monotone positive
/// sequence estimator.
double ess(const std::vector<double>& draws);
double ess_multi(const std::vector<std::vector<double>>& chains);

/// Split rank-normalized potential scale reduction. Needs >= 2 chains;
/// defined as 1 when all draws are identical.
double rhat(const std::vector<std::vector<double>>& chains);

struct PrevalenceSummary {
  double mean = 0.0;
  double hpd_lower = 0.0;
  double hpd_upper = 0.0;
  double implied_adults = 0.0;  // mean prevalence * poststrat total
  std::vector<double> region_mean;
  std::vector<double> region_hpd_lower;
  std::vector<double> region_hpd_upper;
};

PrevalenceSummary summarize_prevalence(
    const std::vector<double>& statewide_draws,
    const std::vector<std::vector<double>>& region_draws,  // [draw][region]
    double total_population, double level);

/// Statewide + regional summary straight from chain output.
PrevalenceSummary summarize_chains(const std::vector<ChainDraws>& chains,
                                   const Dataset& data, double level);

struct ParticipantProbs {
  std::vector<double> prob;  // Rao-Blackwellized, one per participant
  int count_above_1pct = 0;
};

ParticipantProbs participant_infection_probs(
    const std::vector<ChainDraws>& chains, const Dataset& data);

struct SensitivityGrid {
  std::vector<double> lambda;
  std::vector<PrevalenceSummary> summary;  // parallel to lambda
};

/// Adjusts each cell prevalence draw to
/// pi_rst = pi^R (1 - p^N_r) + lambda pi^R p^N_r, clamped at 1, then
/// poststratifies and summarizes per lambda. `field_draws` holds one cell
/// field (aligned to data.poststrat.rows) per kept draw.
SensitivityGrid sensitivity_sweep(
    const Dataset& data, const std::vector<std::vector<double>>& field_draws,
    const std::vector<double>& lambdas, double level);

}  // namespace seroprev
