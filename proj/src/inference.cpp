#include "seroprev/inference.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "seroprev/rng.hpp"

namespace seroprev {

double posterior_mean(const std::vector<double>& draws) {
  if (draws.empty()) throw std::invalid_argument("posterior_mean: no draws");
  double s = 0.0;
  for (double d : draws) s += d;
  return s / static_cast<double>(draws.size());
}

std::pair<double, double> hpd_interval(std::vector<double> draws,
                                       double level) {
  if (!(level > 0.0 && level < 1.0))
    throw std::invalid_argument("hpd_interval: level outside (0,1)");
  const std::size_t n = draws.size();
  const std::size_t m = static_cast<std::size_t>(
      std::ceil(level * static_cast<double>(n)));
  if (n < m + 1)
    throw std::invalid_argument("hpd_interval: not enough draws for level");
  std::sort(draws.begin(), draws.end());
  std::size_t best_j = 0;
  double best_width = draws[m - 1] - draws[0];
  for (std::size_t j = 1; j + m <= n; ++j) {
    const double width = draws[j + m - 1] - draws[j];
    if (width < best_width) {
      best_width = width;
      best_j = j;
    }
  }
  return {draws[best_j], draws[best_j + m - 1]};
}

std::pair<double, double> equal_tailed_interval(std::vector<double> draws,
                                                double level) {
  if (draws.empty())
    throw std::invalid_argument("equal_tailed_interval: no draws");
  std::sort(draws.begin(), draws.end());
  auto quantile = [&](double p) {
    const double h = p * static_cast<double>(draws.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, draws.size() - 1);
    return draws[lo] + (h - std::floor(h)) * (draws[hi] - draws[lo]);
  };
  const double tail = (1.0 - level) / 2.0;
  return {quantile(tail), quantile(1.0 - tail)};
}

double ess(const std::vector<double>& draws) {
  const std::size_t n = draws.size();
  if (n < 4) throw std::invalid_argument("ess: need at least 4 draws");
  const double mean = posterior_mean(draws);
  std::vector<double> centered(n);
  for (std::size_t i = 0; i < n; ++i) centered[i] = draws[i] - mean;
  auto gamma = [&](std::size_t lag) {
    double s = 0.0;
    for (std::size_t i = 0; i + lag < n; ++i)
      s += centered[i] * centered[i + lag];
    return s / static_cast<double>(n);
  };
  const double g0 = gamma(0);
  if (!(g0 > 0.0)) return static_cast<double>(n);  // constant sequence
  double var = -g0;
  double prev_pair = std::numeric_limits<double>::infinity();
  for (std::size_t m = 0; 2 * m + 1 < n; ++m) {
    double pair = gamma(2 * m) + gamma(2 * m + 1);
    if (pair <= 0.0) break;
    pair = std::min(pair, prev_pair);  // enforce monotone sequence
    prev_pair = pair;
    var += 2.0 * pair;
  }
  if (!(var > 0.0)) return static_cast<double>(n);
  return std::min(static_cast<double>(n) * g0 / var, static_cast<double>(n));
}

double ess_multi(const std::vector<std::vector<double>>& chains) {
  double total = 0.0;
  for (const auto& c : chains) total += ess(c);
  return total;
}

double rhat(const std::vector<std::vector<double>>& chains) {
  if (chains.size() < 2)
    throw std::invalid_argument("rhat: need at least 2 chains");
  // Split each chain in half.
  std::vector<std::vector<double>> split;
  for (const auto& c : chains) {
    if (c.size() < 4) throw std::invalid_argument("rhat: chains too short");
    const std::size_t half = c.size() / 2;
    split.emplace_back(c.begin(), c.begin() + half);
    split.emplace_back(c.begin() + half, c.begin() + 2 * half);
  }
  const std::size_t m = split.size();
  const std::size_t n = split[0].size();
  for (const auto& s : split)
    if (s.size() != n) throw std::invalid_argument("rhat: unequal chain lengths");

  // Rank-normalize pooled draws (midranks for ties).
  struct Tag {
    double v;
    std::size_t chain, pos;
  };
  std::vector<Tag> pooled;
  pooled.reserve(m * n);
  for (std::size_t j = 0; j < m; ++j)
    for (std::size_t i = 0; i < n; ++i) pooled.push_back({split[j][i], j, i});
  std::sort(pooled.begin(), pooled.end(),
            [](const Tag& a, const Tag& b) { return a.v < b.v; });
  const double total = static_cast<double>(pooled.size());
  std::vector<std::vector<double>> z(m, std::vector<double>(n));
  std::size_t k = 0;
  bool any_spread = false;
  while (k < pooled.size()) {
    std::size_t k2 = k;
    while (k2 + 1 < pooled.size() && pooled[k2 + 1].v == pooled[k].v) ++k2;
    const double midrank = (static_cast<double>(k) + static_cast<double>(k2)) /
                               2.0 +
                           1.0;
    const double zval = rng::norm_inv((midrank - 0.375) / (total + 0.25));
    for (std::size_t q = k; q <= k2; ++q)
      z[pooled[q].chain][pooled[q].pos] = zval;
    if (k2 != pooled.size() - 1 || k != 0) any_spread = true;
    k = k2 + 1;
  }
  if (!any_spread) return 1.0;  // all draws identical

  std::vector<double> means(m);
  double grand = 0.0;
  for (std::size_t j = 0; j < m; ++j) {
    means[j] = posterior_mean(z[j]);
    grand += means[j];
  }
  grand /= static_cast<double>(m);
  double b = 0.0;
  for (double mu : means) b += (mu - grand) * (mu - grand);
  b *= static_cast<double>(n) / static_cast<double>(m - 1);
  double w = 0.0;
  for (std::size_t j = 0; j < m; ++j) {
    double ss = 0.0;
    for (double v : z[j]) ss += (v - means[j]) * (v - means[j]);
    w += ss / static_cast<double>(n - 1);
  }
  w /= static_cast<double>(m);
  if (!(w > 0.0)) return 1.0;
  const double var_plus = (static_cast<double>(n - 1) / n) * w + b / n;
  return std::sqrt(var_plus / w);
}

PrevalenceSummary summarize_prevalence(
    const std::vector<double>& statewide_draws,
    const std::vector<std::vector<double>>& region_draws,
    double total_population, double level) {
  PrevalenceSummary out;
  out.mean = posterior_mean(statewide_draws);
  const auto hpd = hpd_interval(statewide_draws, level);
  out.hpd_lower = hpd.first;
  out.hpd_upper = hpd.second;
  out.implied_adults = out.mean * total_population;
  if (!region_draws.empty()) {
    const std::size_t nregion = region_draws.front().size();
    for (std::size_t r = 0; r < nregion; ++r) {
      std::vector<double> col;
      col.reserve(region_draws.size());
      for (const auto& row : region_draws) col.push_back(row[r]);
      out.region_mean.push_back(posterior_mean(col));
      const auto rh = hpd_interval(col, level);
      out.region_hpd_lower.push_back(rh.first);
      out.region_hpd_upper.push_back(rh.second);
    }
  }
  return out;
}

PrevalenceSummary summarize_chains(const std::vector<ChainDraws>& chains,
                                   const Dataset& data, double level) {
  std::vector<double> statewide;
  std::vector<std::vector<double>> by_region;
  for (const auto& c : chains) {
    statewide.insert(statewide.end(), c.pi_statewide.begin(),
                     c.pi_statewide.end());
    by_region.insert(by_region.end(), c.pi_region.begin(), c.pi_region.end());
  }
  return summarize_prevalence(statewide, by_region,
                              data.poststrat.total_population(), level);
}

ParticipantProbs participant_infection_probs(
    const std::vector<ChainDraws>& chains, const Dataset& data) {
  ParticipantProbs out;
  out.prob.assign(data.participants.size(), 0.0);
  long count = 0;
  for (const auto& c : chains) {
    if (c.infection_prob_sum.size() != out.prob.size())
      throw std::invalid_argument(
          "participant_infection_probs: chain/data size mismatch");
    for (std::size_t i = 0; i < out.prob.size(); ++i)
      out.prob[i] += c.infection_prob_sum[i];
    count += c.infection_prob_count;
  }
  if (count == 0)
    throw std::invalid_argument("participant_infection_probs: no kept draws");
  for (auto& p : out.prob) p /= static_cast<double>(count);
  for (double p : out.prob)
    if (p > 0.01) ++out.count_above_1pct;
  return out;
}

SensitivityGrid sensitivity_sweep(
    const Dataset& data, const std::vector<std::vector<double>>& field_draws,
    const std::vector<double>& lambdas, double level) {
  if (lambdas.empty())
    throw std::invalid_argument("sensitivity_sweep: empty lambda grid");
  for (double l : lambdas)
    if (!(l > 0.0) && l != 0.0)
      throw std::invalid_argument("sensitivity_sweep: lambda must be >= 0");
  const auto& rows = data.poststrat.rows;
  SensitivityGrid grid;
  for (double lambda : lambdas) {
    std::vector<double> statewide;
    std::vector<std::vector<double>> by_region;
    statewide.reserve(field_draws.size());
    std::vector<double> adjusted(rows.size());
    for (const auto& field : field_draws) {
      if (field.size() != rows.size())
        throw std::invalid_argument("sensitivity_sweep: field size mismatch");
      for (std::size_t k = 0; k < rows.size(); ++k) {
        const double p_nr = data.nonresponse_rate[rows[k].region];
        // pi^R (1-p) + lambda pi^R p, written so lambda = 1 is exact.
        const double adj = field[k] + (lambda - 1.0) * field[k] * p_nr;
        adjusted[k] = std::min(adj, 1.0);
      }
      const auto agg = aggregate_field(data, adjusted);
      statewide.push_back(agg.statewide);
      by_region.push_back(agg.by_region);
    }
    grid.lambda.push_back(lambda);
    grid.summary.push_back(summarize_prevalence(
        statewide, by_region, data.poststrat.total_population(), level));
  }
  return grid;
}

}  // namespace seroprev
