#include "seroprev/simgen.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <stdexcept>

#include "seroprev/inference.hpp"
#include "seroprev/prevmodel.hpp"
#include "seroprev/testmodel.hpp"

namespace seroprev::simgen {

TruthConfig TruthConfig::defaults() {
  TruthConfig t;
  t.test_params.sensitivity = {0.893, 0.711, 0.45};
  t.test_params.specificity = {0.996, 0.985, 0.998};
  t.test_params.cov_pos =
      0.5 * covariance_upper_bound(0.893, 0.711);
  t.test_params.cov_neg =
      0.5 * covariance_upper_bound(0.996, 0.985);
  t.nonresponse = {0.783, 0.841, 0.840, 0.832, 0.752, 0.790, 0.810, 0.818};
  return t;
}

void TruthConfig::validate() const {
  test_params.require_valid();
  if (n_regions < 1 || tracts_per_region < 1)
    throw std::invalid_argument("TruthConfig: geography must be nonempty");
  if (sample_tracts_per_region > tracts_per_region)
    throw std::invalid_argument(
        "TruthConfig: sampled tracts exceed available tracts");
  if (sample_tracts_per_region < 1 || households_per_tract < 1)
    throw std::invalid_argument("TruthConfig: sample sizes must be >= 1");
  auto prob_ok = [](double p) { return p >= 0.0 && p <= 1.0; };
  for (double p : nonresponse)
    if (!prob_ok(p))
      throw std::invalid_argument("TruthConfig: non-response outside [0,1]");
  for (double p : missing_prob)
    if (!prob_ok(p))
      throw std::invalid_argument("TruthConfig: missingness outside [0,1]");
  if (!(sigma >= 0.0 && tau >= 0.0))
    throw std::invalid_argument("TruthConfig: sigma, tau must be >= 0");
  double asum = 0.0, ssum = 0.0;
  for (double p : age_probs) asum += p;
  for (double p : sex_probs) ssum += p;
  if (!(asum > 0.0 && ssum > 0.0))
    throw std::invalid_argument("TruthConfig: demographic weights are zero");
}

std::vector<int> pps_systematic(const std::vector<double>& sizes, int k,
                                rng::Stream& stream) {
  const int n = static_cast<int>(sizes.size());
  if (k < 1 || k > n)
    throw std::invalid_argument("pps_systematic: requested sample exceeds frame");
  std::vector<int> order(sizes.size());
  std::iota(order.begin(), order.end(), 0);
  for (int i = n - 1; i > 0; --i) {
    const int j = static_cast<int>(stream.uniform() * (i + 1));
    std::swap(order[i], order[std::min(j, i)]);
  }

  std::vector<int> selected;
  std::vector<int> pool(order);
  int remaining = k;
  // Certainty units first, so the systematic pass stays without replacement.
  for (;;) {
    double total = 0.0;
    for (int i : pool) total += sizes[i];
    if (!(total > 0.0))
      throw std::invalid_argument("pps_systematic: zero total size");
    std::vector<int> next_pool;
    bool found = false;
    for (int i : pool) {
      if (remaining > 0 && sizes[i] * remaining >= total) {
        selected.push_back(i);
        --remaining;
        found = true;
      } else {
        next_pool.push_back(i);
      }
    }
    pool.swap(next_pool);
    if (!found || remaining == 0 || pool.empty()) break;
  }
  if (remaining > 0) {
    double total = 0.0;
    for (int i : pool) total += sizes[i];
    const double step = total / remaining;
    double point = stream.uniform() * step;
    double cum = 0.0;
    std::size_t idx = 0;
    for (int j = 0; j < remaining; ++j) {
      const double target = point + j * step;
      while (idx < pool.size() && cum + sizes[pool[idx]] <= target) {
        cum += sizes[pool[idx]];
        ++idx;
      }
      selected.push_back(pool[std::min(idx, pool.size() - 1)]);
    }
  }
  std::sort(selected.begin(), selected.end());
  selected.erase(std::unique(selected.begin(), selected.end()),
                 selected.end());
  return selected;
}

SimulatedSurvey simulate_survey(const TruthConfig& truth, rng::Stream& stream) {
  truth.validate();
  SimulatedSurvey out;
  out.truth.test_params = truth.test_params;
  out.truth.alpha = truth.alpha;
  out.truth.sigma = truth.sigma;
  out.truth.tau = truth.tau;
  out.truth.beta_s = truth.beta_s;
  out.truth.beta_t = truth.beta_t;

  char buf[64];
  std::vector<std::string> regions;
  for (int r = 0; r < truth.n_regions; ++r) {
    std::snprintf(buf, sizeof buf, "R%02d", r + 1);
    regions.emplace_back(buf);
  }

  // Geography with lognormal tract populations.
  std::vector<std::string> tract_ids;
  std::vector<int> tract_region;
  std::vector<double> tract_pop;
  for (int r = 0; r < truth.n_regions; ++r) {
    for (int t = 0; t < truth.tracts_per_region; ++t) {
      std::snprintf(buf, sizeof buf, "%s-T%03d", regions[r].c_str(), t + 1);
      tract_ids.emplace_back(buf);
      tract_region.push_back(r);
      const double pop = std::max(
          50.0, std::round(std::exp(
                    stream.normal(truth.pop_log_mean, truth.pop_log_sd))));
      tract_pop.push_back(pop);
      out.tables.tracts.push_back(
          {tract_ids.back(), regions[r], pop,
           static_cast<long>(out.tables.tracts.size() + 1)});
    }
  }

  // Poststratification cells from the demographic distribution.
  for (std::size_t ti = 0; ti < tract_ids.size(); ++ti) {
    for (int a = 0; a < kNumAgeGroups; ++a) {
      for (int s = 0; s < kNumSexes; ++s) {
        const double cell = std::round(tract_pop[ti] * truth.adult_fraction *
                                       truth.age_probs[a] *
                                       truth.sex_probs[s]);
        out.tables.poststrat.push_back(
            {regions[tract_region[ti]], tract_ids[ti],
             to_string(static_cast<AgeGroup>(a)),
             to_string(static_cast<Sex>(s)), cell,
             static_cast<long>(out.tables.poststrat.size() + 1)});
      }
    }
  }

  std::vector<double> nonresponse(truth.n_regions, 0.0);
  for (int r = 0; r < truth.n_regions; ++r) {
    if (!truth.nonresponse.empty())
      nonresponse[r] = truth.nonresponse[r % truth.nonresponse.size()];
    out.tables.nonresponse.push_back(
        {regions[r], nonresponse[r], static_cast<long>(r + 1)});
  }

  // Latent regression effects across the whole state.
  std::vector<double> alpha_r(truth.n_regions);
  for (int r = 0; r < truth.n_regions; ++r)
    alpha_r[r] = stream.normal(truth.alpha, truth.sigma);
  out.truth.alpha_r = alpha_r;
  std::vector<double> b_t(tract_ids.size());
  for (std::size_t ti = 0; ti < tract_ids.size(); ++ti) {
    b_t[ti] = stream.normal(0.0, truth.tau);
    out.truth.b_t[tract_ids[ti]] = b_t[ti];
  }

  const LogPopStandardizer standardizer = LogPopStandardizer::fit(tract_pop);
  const auto full_patterns = observable_patterns(0b111);

  long participant_row = 0;
  for (int r = 0; r < truth.n_regions; ++r) {
    std::vector<double> sizes;
    std::vector<int> local;
    for (std::size_t ti = 0; ti < tract_ids.size(); ++ti) {
      if (tract_region[ti] == r) {
        sizes.push_back(tract_pop[ti]);
        local.push_back(static_cast<int>(ti));
      }
    }
    const auto chosen =
        pps_systematic(sizes, truth.sample_tracts_per_region, stream);
    for (int ci : chosen) {
      const int ti = local[ci];
      for (int h = 0; h < truth.households_per_tract; ++h) {
        if (stream.bernoulli(nonresponse[r])) continue;  // non-responding
        const auto age =
            static_cast<AgeGroup>(stream.categorical(truth.age_probs));
        const auto sex = static_cast<Sex>(stream.categorical(truth.sex_probs));
        const DesignRow dr =
            design_row(age, sex, standardizer.z(tract_pop[ti]));
        double eta = alpha_r[r] + b_t[ti] + dr.x_t * truth.beta_t;
        for (int kk = 0; kk < 3; ++kk) eta += dr.x_s[kk] * truth.beta_s[kk];
        const int d = stream.bernoulli(expit(eta)) ? 1 : 0;

        const auto probs = pattern_prob_vector(d, truth.test_params, 0b111);
        const unsigned pat = full_patterns[stream.categorical(probs)];
        std::array<std::optional<int>, 3> results{
            static_cast<int>((pat >> 2) & 1u),
            static_cast<int>((pat >> 1) & 1u), static_cast<int>(pat & 1u)};
        for (int j = 0; j < kNumTests; ++j)
          if (truth.missing_prob[j] > 0.0 &&
              stream.bernoulli(truth.missing_prob[j]))
            results[j].reset();

        std::snprintf(buf, sizeof buf, "P%05ld", ++participant_row);
        out.tables.participants.push_back(
            {buf, regions[r], tract_ids[ti], to_string(age), to_string(sex),
             results[0], results[1], results[2], participant_row});
        out.truth.latent.push_back(d);
      }
    }
  }
  return out;
}

ExactPosterior exact_small_posterior(const std::vector<TestPanel>& panels,
                                     const std::vector<double>& pi,
                                     const TestParams& params) {
  const std::size_t n = panels.size();
  if (n > 12)
    throw std::invalid_argument("exact_small_posterior: n must be <= 12");
  if (pi.size() != n)
    throw std::invalid_argument("exact_small_posterior: size mismatch");
  ExactPosterior out;
  out.prob_infected.assign(n, 0.0);
  out.marginal_likelihood = 0.0;
  if (n == 0) {
    out.marginal_likelihood = 1.0;  // empty product
    return out;
  }
  std::vector<double> l1(n), l0(n);
  for (std::size_t i = 0; i < n; ++i) {
    l1[i] = panel_likelihood(panels[i], 1, params);
    l0[i] = panel_likelihood(panels[i], 0, params);
  }
  std::vector<double> mass(n, 0.0);
  for (std::uint32_t config = 0; config < (1u << n); ++config) {
    double p = 1.0;
    for (std::size_t i = 0; i < n; ++i) {
      const bool d = (config >> i) & 1u;
      p *= d ? pi[i] * l1[i] : (1.0 - pi[i]) * l0[i];
    }
    out.marginal_likelihood += p;
    for (std::size_t i = 0; i < n; ++i)
      if ((config >> i) & 1u) mass[i] += p;
  }
  for (std::size_t i = 0; i < n; ++i) {
    out.prob_infected[i] = mass[i] / out.marginal_likelihood;
    // Conditional independence given parameters: must match the closed form.
    const double closed =
        pi[i] * l1[i] / (pi[i] * l1[i] + (1.0 - pi[i]) * l0[i]);
    if (std::fabs(out.prob_infected[i] - closed) > 1e-10)
      throw std::logic_error(
          "exact_small_posterior: enumeration disagrees with closed form");
  }
  return out;
}

SbcResult run_sbc(const SbcOptions& options) {
  if (options.n_replications < 1)
    throw std::invalid_argument("run_sbc: need at least 1 replication");
  options.priors.require_valid();
  const std::vector<std::string> tracked = {
      "S1", "S2", "S3",        "C1",        "C2",       "C3",
      "R1", "R0", "alpha",     "beta_age1", "beta_age2", "beta_sex",
      "beta_logpop", "sigma", "tau"};
  const int L = options.n_ranks;

  SbcResult result;
  result.n_bins = L + 1;
  for (const auto& name : tracked) result.ranks[name] = {};

  std::vector<std::map<std::string, int>> rep_ranks(options.n_replications);
  std::vector<int> rep_ok(options.n_replications, 0);

#pragma omp parallel for schedule(dynamic, 1)
  for (int rep = 0; rep < options.n_replications; ++rep) {
    rng::Stream truth_stream =
        rng::Stream::substream(options.seed, 0x736263ULL, rep);

    // Truth drawn from the fitting priors.
    TruthConfig t = options.survey;
    const PriorSpec& pr = options.priors;
    for (int j = 0; j < kNumTests; ++j) {
      t.test_params.sensitivity[j] =
          truth_stream.beta(pr.s_prior[j].a, pr.s_prior[j].b);
      t.test_params.specificity[j] =
          truth_stream.beta(pr.c_prior[j].a, pr.c_prior[j].b);
    }
    const double f1 = truth_stream.uniform();
    const double f0 = truth_stream.uniform();
    t.test_params.cov_pos =
        f1 * covariance_upper_bound(t.test_params.sensitivity[0],
                                    t.test_params.sensitivity[1]);
    t.test_params.cov_neg =
        f0 * covariance_upper_bound(t.test_params.specificity[0],
                                    t.test_params.specificity[1]);
    t.alpha = truth_stream.normal(pr.alpha_mean, std::sqrt(pr.alpha_var));
    for (auto& b : t.beta_s)
      b = truth_stream.normal(0.0, std::sqrt(pr.beta_var));
    t.beta_t = truth_stream.normal(0.0, std::sqrt(pr.beta_var));
    t.sigma = truth_stream.uniform(0.0, pr.sigma_max);
    t.tau = truth_stream.uniform(0.0, pr.tau_max);

    const auto sim = simulate_survey(t, truth_stream);
    const auto validated = validate_dataset(sim.tables);
    if (!validated.ok() || validated.dataset->n() == 0) continue;

    SamplerConfig cfg = options.fit;
    cfg.rng_seed = rng::mix_keys(options.seed, 0x666974ULL, rep);
    cfg.compute_poststrat = false;
    cfg.drop_igg_covariance = options.mutate_drop_covariance;
    std::vector<ChainDraws> chains;
    try {
      chains = run_chains(cfg, *validated.dataset, options.priors);
    } catch (const SamplerFault&) {
      continue;
    }

    const std::vector<double> truths = {
        t.test_params.sensitivity[0], t.test_params.sensitivity[1],
        t.test_params.sensitivity[2], t.test_params.specificity[0],
        t.test_params.specificity[1], t.test_params.specificity[2],
        t.test_params.cov_pos,        t.test_params.cov_neg,
        t.alpha,                      t.beta_s[0],
        t.beta_s[1],                  t.beta_s[2],
        t.beta_t,                     t.sigma,
        t.tau};

    bool converged = true;
    std::map<std::string, int> local;
    for (std::size_t p = 0; p < tracked.size(); ++p) {
      const auto& names = chains.front().param_names;
      const auto it = std::find(names.begin(), names.end(), tracked[p]);
      const std::size_t col = static_cast<std::size_t>(it - names.begin());
      std::vector<std::vector<double>> per_chain;
      std::vector<double> pooled;
      for (const auto& c : chains) {
        std::vector<double> v;
        v.reserve(c.draws.size());
        for (const auto& row : c.draws) v.push_back(row[col]);
        pooled.insert(pooled.end(), v.begin(), v.end());
        per_chain.push_back(std::move(v));
      }
      if (per_chain.size() >= 2 &&
          rhat(per_chain) > options.rhat_threshold) {
        converged = false;
        break;
      }
      // Evenly thinned subset of L draws; rank of truth in 0..L.
      int rank = 0;
      const std::size_t total = pooled.size();
      for (int j = 0; j < L; ++j) {
        const std::size_t idx = static_cast<std::size_t>(
            (static_cast<double>(j) + 0.5) * static_cast<double>(total) / L);
        if (pooled[std::min(idx, total - 1)] < truths[p]) ++rank;
      }
      local[tracked[p]] = rank;
    }
    if (!converged) continue;
    rep_ranks[rep] = std::move(local);
    rep_ok[rep] = 1;
  }

  for (int rep = 0; rep < options.n_replications; ++rep) {
    if (!rep_ok[rep]) {
      result.n_excluded++;
      continue;
    }
    for (const auto& [name, rank] : rep_ranks[rep])
      result.ranks[name].push_back(rank);
  }
  if (result.n_excluded == options.n_replications)
    throw std::runtime_error("run_sbc: every replication was excluded");
  return result;
}

}  // namespace seroprev::simgen
