#include "seroprev/poststrat.hpp"

#include <cmath>
#include <stdexcept>

#include "seroprev/rng.hpp"

namespace seroprev {

std::uint64_t poststrat_key(std::uint64_t seed, int chain, long kept_index) {
  return rng::mix_keys(seed ^ 0x706f737473747261ULL,
                       static_cast<std::uint64_t>(chain),
                       static_cast<std::uint64_t>(kept_index));
}

std::vector<double> poststrat_field(const Dataset& data,
                                    const ModelWorkspace& ws,
                                    const RegressionState& state,
                                    std::uint64_t b_key,
                                    const PoststratOptions& opt) {
  if (data.poststrat.rows.empty())
    throw std::invalid_argument("poststratify: empty table");
  const double tau = std::sqrt(state.tau2);

  // One effect per tract per draw, shared across that tract's strata cells.
  std::vector<double> tract_b(data.tracts.size());
  for (std::size_t t = 0; t < data.tracts.size(); ++t) {
    const int bi = ws.tract_to_b_index[t];
    if (bi >= 0 && !opt.fresh_b_for_all_tracts) {
      tract_b[t] = state.b_t[bi];
    } else {
      tract_b[t] =
          tau * rng::keyed_normal(b_key, rng::hash_string(data.tracts[t]));
    }
  }

  const auto& rows = data.poststrat.rows;
  std::vector<double> field(rows.size());
#pragma omp parallel for schedule(static)
  for (long long k = 0; k < static_cast<long long>(rows.size()); ++k) {
    const auto& cell = rows[static_cast<std::size_t>(k)];
    const DesignRow dr =
        design_row(cell.age_group, cell.sex,
                   ws.standardizer.z(data.tract_population[cell.tract]));
    field[static_cast<std::size_t>(k)] = expit(
        linear_predictor_with_b(state, dr, cell.region, tract_b[cell.tract]));
  }
  return field;
}

PoststratResult aggregate_field(const Dataset& data,
                                const std::vector<double>& field) {
  const auto& rows = data.poststrat.rows;
  if (field.size() != rows.size())
    throw std::invalid_argument("aggregate_field: field/table size mismatch");
  PoststratResult out;
  out.by_region.assign(data.regions.size(), 0.0);
  std::vector<double> region_pop(data.regions.size(), 0.0);
  double num = 0.0, den = 0.0;
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const double w = rows[k].adult_population;
    num += field[k] * w;
    den += w;
    out.by_region[rows[k].region] += field[k] * w;
    region_pop[rows[k].region] += w;
  }
  if (!(den > 0.0))
    throw std::invalid_argument("aggregate_field: zero total population");
  out.statewide = num / den;
  for (std::size_t r = 0; r < out.by_region.size(); ++r)
    out.by_region[r] = region_pop[r] > 0.0 ? out.by_region[r] / region_pop[r]
                                           : 0.0;
  return out;
}

PoststratResult poststratify(const Dataset& data, const ModelWorkspace& ws,
                             const RegressionState& state, std::uint64_t b_key,
                             const PoststratOptions& opt) {
  return aggregate_field(data, poststrat_field(data, ws, state, b_key, opt));
}

}  // namespace seroprev
