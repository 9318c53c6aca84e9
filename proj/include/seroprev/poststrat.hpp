#pragma once

// Poststratification of a parameter draw over the census cell table.

#include <cstdint>
#include <vector>

#include "seroprev/domain.hpp"
#include "seroprev/prevmodel.hpp"

namespace seroprev {

struct PoststratOptions {
  // When true, every tract gets a fresh N(0, tau^2) effect during
  // poststratification; otherwise sampled tracts reuse their posterior b_t.
  bool fresh_b_for_all_tracts = false;
};

struct PoststratResult {
  double statewide = 0.0;
  std::vector<double> by_region;  // indexed like Dataset::regions
};

/// Key for the unsampled-tract random effects of one kept draw; summaries and
/// the sensitivity sweep rebuild the same field from (seed, chain, draw).
std::uint64_t poststrat_key(std::uint64_t seed, int chain, long kept_index);

/// Cell prevalences pi_rst = expit(alpha_r + X_s beta_s + X_t beta_t + b_t),
/// one per poststrat row. Tracts without a sampled effect receive a
/// N(0, tau^2) draw keyed by (b_key, tract id), shared across the tract's
/// strata cells.
std::vector<double> poststrat_field(const Dataset& data,
                                    const ModelWorkspace& ws,
                                    const RegressionState& state,
                                    std::uint64_t b_key,
                                    const PoststratOptions& opt = {});

/// Population-weighted aggregation of a cell field to statewide and
/// per-region prevalence.
PoststratResult aggregate_field(const Dataset& data,
                                const std::vector<double>& field);

/// Field + aggregation in one step (the per-draw path inside the sampler).
PoststratResult poststratify(const Dataset& data, const ModelWorkspace& ws,
                             const RegressionState& state, std::uint64_t b_key,
                             const PoststratOptions& opt = {});

}  // namespace seroprev
