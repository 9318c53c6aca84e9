#pragma once

// Adaptive Metropolis-within-Gibbs sampler for the full model: exact Gibbs
// updates of the latent infection indicators, random-walk Metropolis on
// transformed scales for everything else. Deterministic given (seed, chain).

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "seroprev/domain.hpp"
#include "seroprev/poststrat.hpp"
#include "seroprev/prevmodel.hpp"

namespace seroprev {

/// Raised when the sampler reaches a state with non-finite target density;
/// indicates an invariant bug, not a statistical event.
struct SamplerFault : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SamplerConfig {
  long n_iterations = 500000;
  long n_burnin = 250000;
  long thin_every = 20;
  int n_chains = 4;
  std::uint64_t rng_seed = 20200709;

  long adapt_window = 50;
  double target_accept_scalar = 0.44;
  double target_accept_joint = 0.234;
  double initial_step = 0.5;
  bool adapt_during_burnin = true;

  // Reduced-model switches, used by validation harnesses.
  bool sample_test_params = true;   // when false, S/C/R stay at fixed values
  TestParams fixed_test_params;
  bool flat_intercept = false;      // single intercept, no region level
  bool no_tract_effects = false;    // b_t pinned at 0, tau not sampled
  bool mask_all_tests = false;      // drop the test likelihood entirely
  bool drop_igg_covariance = false; // likelihood evaluated with R = 0

  PoststratOptions poststrat;
  bool compute_poststrat = true;

  void validate() const {
    if (n_burnin >= n_iterations)
      throw std::invalid_argument("SamplerConfig: n_burnin must be < n_iterations");
    if (thin_every < 1) throw std::invalid_argument("SamplerConfig: thin_every >= 1");
    if (n_chains < 1) throw std::invalid_argument("SamplerConfig: n_chains >= 1");
    if (adapt_window < 1)
      throw std::invalid_argument("SamplerConfig: adapt_window >= 1");
  }
  long n_kept() const { return (n_iterations - n_burnin) / thin_every; }
};

struct BlockStats {
  std::string name;
  long proposed = 0;
  long accepted = 0;
  double step_size = 0.0;
  double rate() const {
    return proposed > 0 ? static_cast<double>(accepted) / proposed : 0.0;
  }
};

/// Ordered post-thinning draws of one chain plus derived quantities.
struct ChainDraws {
  int chain_index = 0;
  std::vector<std::string> param_names;
  std::vector<std::vector<double>> draws;          // [kept][param]
  std::vector<std::vector<std::uint8_t>> latent;   // [kept][participant]
  std::vector<double> pi_statewide;                // per kept draw
  std::vector<std::vector<double>> pi_region;      // [kept][region]
  std::vector<double> infection_prob_sum;          // Rao-Blackwell sums
  long infection_prob_count = 0;
  std::vector<BlockStats> acceptance;
};

/// Initial state policy: prior means for S and C, covariance at the midpoint
/// of its range, intercept at the prior mean, deviations at 0, sigma = tau = 1,
/// latent indicators by thresholding their full conditional at the prior-mean
/// prevalence.
void init_state(const SamplerConfig& config, const Dataset& data,
                const PriorSpec& priors, TestParams& params,
                RegressionState& state, std::vector<std::uint8_t>& latent);

/// Window-based Robbins-Monro step scaling toward the target acceptance rate;
/// returns the new step size. `window_count` is the number of completed
/// adaptation windows (decays the learning rate).
double adapt_step(double step, double observed_rate, double target_rate,
                  long window_count);

ChainDraws run_chain(const SamplerConfig& config, const Dataset& data,
                     const PriorSpec& priors, int chain_index);

/// Runs config.n_chains chains (concurrently when OpenMP is enabled).
std::vector<ChainDraws> run_chains(const SamplerConfig& config,
                                   const Dataset& data,
                                   const PriorSpec& priors);

}  // namespace seroprev
