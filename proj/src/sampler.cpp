#include "seroprev/sampler.hpp"

#include <algorithm>
#include <cmath>

#include "seroprev/kernels.hpp"
#include "seroprev/rng.hpp"
#include "seroprev/testmodel.hpp"

namespace seroprev {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double logit_or_throw(double p) {
  if (!(p > 0.0 && p < 1.0))
    throw std::invalid_argument("logit: argument outside (0,1)");
  return logit(p);
}
}  // namespace

void init_state(const SamplerConfig& config, const Dataset& data,
                const PriorSpec& priors, TestParams& params,
                RegressionState& state, std::vector<std::uint8_t>& latent) {
  if (config.sample_test_params) {
    for (int j = 0; j < kNumTests; ++j) {
      params.sensitivity[j] = priors.s_prior[j].mean();
      params.specificity[j] = priors.c_prior[j].mean();
    }
    params.cov_pos = 0.5 * covariance_upper_bound(params.sensitivity[0],
                                                  params.sensitivity[1]);
    params.cov_neg = 0.5 * covariance_upper_bound(params.specificity[0],
                                                  params.specificity[1]);
  } else {
    params = config.fixed_test_params;
  }

  state.alpha = priors.alpha_prior_kind == PriorSpec::AlphaPriorKind::normal
                    ? priors.alpha_mean
                    : logit_or_throw(priors.alpha_beta.mean());
  state.alpha_r.assign(config.flat_intercept ? 0 : data.regions.size(),
                       state.alpha);
  state.beta_s = {0.0, 0.0, 0.0};
  state.beta_t = 0.0;
  state.b_t.assign(data.sampled_tracts.size(), 0.0);
  state.sigma2 = 1.0;
  state.tau2 = 1.0;

  latent.assign(data.participants.size(), 0);
  const double pi0 = expit(state.alpha);
  for (std::size_t i = 0; i < data.participants.size(); ++i) {
    const double p = config.mask_all_tests
                         ? pi0
                         : latent_full_conditional(data.participants[i].panel,
                                                   pi0, params);
    latent[i] = p > 0.5 ? 1 : 0;
  }
}

double adapt_step(double step, double observed_rate, double target_rate,
                  long window_count) {
  const double gamma = 1.0 / std::sqrt(static_cast<double>(
                                 std::max<long>(1, window_count)));
  double log_step = std::log(step) + gamma * (observed_rate - target_rate);
  log_step = std::clamp(log_step, -12.0, 6.0);
  return std::exp(log_step);
}

namespace {

struct Chain {
  const SamplerConfig& cfg;
  const Dataset& data;
  const PriorSpec& priors;
  int chain_index;

  ModelWorkspace ws;
  std::vector<TestPanel> panels;
  std::vector<std::vector<int>> region_members;
  std::vector<std::vector<int>> tract_members;

  // Parameter state. Covariances live as fractions of their allowable range
  // so every (S, C, f) combination is in support by construction.
  std::array<double, kNumTests> S{}, C{};
  double f_pos = 0.5, f_neg = 0.5;
  RegressionState reg;
  std::vector<std::uint8_t> latent;

  std::vector<double> eta;  // cached per-participant logits
  double test_ll = 0.0;     // cached test log likelihood
  rng::Stream stream;

  struct Block {
    std::string name;
    double step;
    double target;
    long proposed = 0, accepted = 0;
    long win_proposed = 0, win_accepted = 0, windows = 0;
  };
  std::vector<Block> blocks;

  Chain(const SamplerConfig& c, const Dataset& d, const PriorSpec& p, int idx)
      : cfg(c), data(d), priors(p), chain_index(idx),
        ws(ModelWorkspace::build(d)),
        stream(rng::Stream::for_chain(c.rng_seed, idx)) {
    for (const auto& person : data.participants) panels.push_back(person.panel);
    region_members.resize(data.regions.size());
    tract_members.resize(data.sampled_tracts.size());
    for (int i = 0; i < data.n(); ++i) {
      region_members[ws.region[i]].push_back(i);
      tract_members[ws.b_index[i]].push_back(i);
    }
    TestParams params;
    init_state(cfg, data, priors, params, reg, latent);
    if (cfg.sample_test_params) {
      S = params.sensitivity;
      C = params.specificity;
      f_pos = f_neg = 0.5;
    }
    refresh_eta();
    refresh_test_ll();
    build_blocks();
  }

  TestParams current_params() const {
    if (!cfg.sample_test_params) return cfg.fixed_test_params;
    TestParams p;
    p.sensitivity = S;
    p.specificity = C;
    p.cov_pos = f_pos * covariance_upper_bound(S[0], S[1]);
    p.cov_neg = f_neg * covariance_upper_bound(C[0], C[1]);
    return p;
  }

  TestParams likelihood_params() const {
    TestParams p = current_params();
    if (cfg.drop_igg_covariance) p.cov_pos = p.cov_neg = 0.0;
    return p;
  }

  void refresh_eta() {
    eta.resize(data.n());
    for (int i = 0; i < data.n(); ++i) eta[i] = participant_logit(reg, ws, i);
  }

  void refresh_test_ll() {
    test_ll = cfg.mask_all_tests
                  ? 0.0
                  : kernels::test_loglik(panels, latent, likelihood_params());
  }

  double test_ll_at(const TestParams& p) const {
    return cfg.mask_all_tests ? 0.0 : kernels::test_loglik(panels, latent, p);
  }

  static double bern_term(double eta_i, std::uint8_t d) {
    const double pi = expit(eta_i);
    return d ? std::log(pi) : std::log1p(-pi);
  }

  double bern_subset(const std::vector<int>& members, double shift) const {
    double s = 0.0;
    for (int i : members) s += bern_term(eta[i] + shift, latent[i]);
    return s;
  }

  void build_blocks() {
    auto add = [&](std::string name, double target) {
      blocks.push_back(Block{std::move(name), cfg.initial_step, target});
    };
    if (cfg.sample_test_params) {
      for (int j = 0; j < kNumTests; ++j) add("S" + std::to_string(j + 1),
                                              cfg.target_accept_scalar);
      for (int j = 0; j < kNumTests; ++j) add("C" + std::to_string(j + 1),
                                              cfg.target_accept_scalar);
      add("R1", cfg.target_accept_scalar);
      add("R0", cfg.target_accept_scalar);
    }
    add("beta", cfg.target_accept_joint);
    if (!cfg.flat_intercept) {
      for (const auto& r : data.regions)
        add("alpha_r." + r, cfg.target_accept_scalar);
      add("alpha", cfg.target_accept_scalar);
      add("sigma", cfg.target_accept_scalar);
    } else {
      add("alpha", cfg.target_accept_scalar);
    }
    if (!cfg.no_tract_effects) {
      add("tau", cfg.target_accept_scalar);
      for (int t : data.sampled_tracts)
        add("b." + data.tracts[t], cfg.target_accept_scalar);
    }
  }

  Block& block(const std::string& name) {
    for (auto& b : blocks)
      if (b.name == name) return b;
    throw std::logic_error("unknown block " + name);
  }

  bool metropolis(Block& blk, double log_ratio, bool adapting) {
    blk.proposed++;
    blk.win_proposed++;
    bool accept = false;
    if (log_ratio >= 0.0) {
      accept = true;
    } else if (std::isfinite(log_ratio)) {
      accept = std::log(stream.uniform()) < log_ratio;
    }
    if (accept) {
      blk.accepted++;
      blk.win_accepted++;
    }
    if (adapting && blk.win_proposed >= cfg.adapt_window) {
      blk.windows++;
      blk.step = adapt_step(blk.step,
                            static_cast<double>(blk.win_accepted) /
                                blk.win_proposed,
                            blk.target, blk.windows);
      blk.win_proposed = blk.win_accepted = 0;
    }
    return accept;
  }

  // --- block updates -------------------------------------------------------

  void update_sc(Block& blk, double& value, const PriorSpec::BetaAB& prior,
                 bool adapting) {
    const double x = logit(value);
    const double xp = x + blk.step * stream.normal();
    const double vp = expit(xp);
    const double old_value = value;
    value = vp;  // temporarily; current_params() sees the proposal
    const double ll_prop = test_ll_at(likelihood_params());
    value = old_value;
    double log_ratio = ll_prop - test_ll;
    log_ratio += log_beta_pdf(vp, prior.a, prior.b) -
                 log_beta_pdf(old_value, prior.a, prior.b);
    log_ratio += std::log(vp) + std::log1p(-vp) - std::log(old_value) -
                 std::log1p(-old_value);
    if (metropolis(blk, log_ratio, adapting)) {
      value = vp;
      test_ll = ll_prop;
    }
  }

  void update_fraction(Block& blk, double& frac, bool adapting) {
    const double x = logit(frac);
    const double xp = x + blk.step * stream.normal();
    const double fp = expit(xp);
    const double old_frac = frac;
    frac = fp;
    const double ll_prop = test_ll_at(likelihood_params());
    frac = old_frac;
    double log_ratio = ll_prop - test_ll;
    log_ratio += std::log(fp) + std::log1p(-fp) - std::log(old_frac) -
                 std::log1p(-old_frac);
    if (metropolis(blk, log_ratio, adapting)) {
      frac = fp;
      test_ll = ll_prop;
    }
  }

  void update_beta(Block& blk, bool adapting) {
    std::array<double, 4> delta;
    for (auto& d : delta) d = blk.step * stream.normal();
    std::vector<double> eta_prop(eta);
    for (int i = 0; i < data.n(); ++i) {
      const auto& row = ws.rows[i];
      eta_prop[i] += row.x_s[0] * delta[0] + row.x_s[1] * delta[1] +
                     row.x_s[2] * delta[2] + row.x_t * delta[3];
    }
    double log_ratio = kernels::bernoulli_loglik(eta_prop, latent) -
                       kernels::bernoulli_loglik(eta, latent);
    for (int k = 0; k < 3; ++k)
      log_ratio += log_normal_pdf(reg.beta_s[k] + delta[k], 0.0,
                                  priors.beta_var) -
                   log_normal_pdf(reg.beta_s[k], 0.0, priors.beta_var);
    log_ratio += log_normal_pdf(reg.beta_t + delta[3], 0.0, priors.beta_var) -
                 log_normal_pdf(reg.beta_t, 0.0, priors.beta_var);
    if (metropolis(blk, log_ratio, adapting)) {
      for (int k = 0; k < 3; ++k) reg.beta_s[k] += delta[k];
      reg.beta_t += delta[3];
      eta.swap(eta_prop);
    }
  }

  void update_alpha_r(Block& blk, int r, bool adapting) {
    const double da = blk.step * stream.normal();
    double log_ratio = bern_subset(region_members[r], da) -
                       bern_subset(region_members[r], 0.0);
    log_ratio += log_normal_pdf(reg.alpha_r[r] + da, reg.alpha, reg.sigma2) -
                 log_normal_pdf(reg.alpha_r[r], reg.alpha, reg.sigma2);
    if (metropolis(blk, log_ratio, adapting)) {
      reg.alpha_r[r] += da;
      for (int i : region_members[r]) eta[i] += da;
    }
  }

  double alpha_prior_logpdf(double a) const {
    if (priors.alpha_prior_kind == PriorSpec::AlphaPriorKind::normal)
      return log_normal_pdf(a, priors.alpha_mean, priors.alpha_var);
    const double p = expit(a);
    return log_beta_pdf(p, priors.alpha_beta.a, priors.alpha_beta.b) +
           std::log(p) + std::log1p(-p);
  }

  void update_alpha(Block& blk, bool adapting) {
    const double da = blk.step * stream.normal();
    double log_ratio =
        alpha_prior_logpdf(reg.alpha + da) - alpha_prior_logpdf(reg.alpha);
    if (cfg.flat_intercept) {
      double prop = 0.0, cur = 0.0;
      for (int i = 0; i < data.n(); ++i) {
        prop += bern_term(eta[i] + da, latent[i]);
        cur += bern_term(eta[i], latent[i]);
      }
      log_ratio += prop - cur;
    } else {
      for (double ar : reg.alpha_r)
        log_ratio += log_normal_pdf(ar, reg.alpha + da, reg.sigma2) -
                     log_normal_pdf(ar, reg.alpha, reg.sigma2);
    }
    if (metropolis(blk, log_ratio, adapting)) {
      reg.alpha += da;
      if (cfg.flat_intercept)
        for (auto& e : eta) e += da;
    }
  }

  void update_sigma(Block& blk, bool adapting) {
    const double x = 0.5 * std::log(reg.sigma2);
    const double xp = x + blk.step * stream.normal();
    const double sigma_p = std::exp(xp);
    double log_ratio;
    if (sigma_p >= priors.sigma_max) {
      log_ratio = kNegInf;
    } else {
      log_ratio = xp - x;  // Jacobian of the log transform
      const double s2p = sigma_p * sigma_p;
      for (double ar : reg.alpha_r)
        log_ratio += log_normal_pdf(ar, reg.alpha, s2p) -
                     log_normal_pdf(ar, reg.alpha, reg.sigma2);
    }
    if (metropolis(blk, log_ratio, adapting)) reg.sigma2 = sigma_p * sigma_p;
  }

  void update_tau(Block& blk, bool adapting) {
    const double x = 0.5 * std::log(reg.tau2);
    const double xp = x + blk.step * stream.normal();
    const double tau_p = std::exp(xp);
    double log_ratio;
    if (tau_p >= priors.tau_max) {
      log_ratio = kNegInf;
    } else {
      log_ratio = xp - x;
      const double t2p = tau_p * tau_p;
      for (double b : reg.b_t)
        log_ratio +=
            log_normal_pdf(b, 0.0, t2p) - log_normal_pdf(b, 0.0, reg.tau2);
    }
    if (metropolis(blk, log_ratio, adapting)) reg.tau2 = tau_p * tau_p;
  }

  void update_b(Block& blk, int k, bool adapting) {
    const double db = blk.step * stream.normal();
    double log_ratio = bern_subset(tract_members[k], db) -
                       bern_subset(tract_members[k], 0.0);
    log_ratio += log_normal_pdf(reg.b_t[k] + db, 0.0, reg.tau2) -
                 log_normal_pdf(reg.b_t[k], 0.0, reg.tau2);
    if (metropolis(blk, log_ratio, adapting)) {
      reg.b_t[k] += db;
      for (int i : tract_members[k]) eta[i] += db;
    }
  }

  // --- iteration -----------------------------------------------------------

  void gibbs_latent(long iter) {
    if (data.n() == 0 || cfg.mask_all_tests) {
      if (!cfg.mask_all_tests) return;
      // With the tests masked out, D_i | pi_i is just Bernoulli(pi_i).
      const std::uint64_t key =
          rng::mix_keys(cfg.rng_seed ^ 0x6c6174656e74ULL,
                        static_cast<std::uint64_t>(chain_index),
                        static_cast<std::uint64_t>(iter));
      for (int i = 0; i < data.n(); ++i)
        latent[i] = rng::keyed_uniform(key, static_cast<std::uint64_t>(i)) <
                            expit(eta[i])
                        ? 1
                        : 0;
      return;
    }
    std::vector<double> pi(data.n());
    for (int i = 0; i < data.n(); ++i) pi[i] = expit(eta[i]);
    const std::uint64_t key =
        rng::mix_keys(cfg.rng_seed ^ 0x6c6174656e74ULL,
                      static_cast<std::uint64_t>(chain_index),
                      static_cast<std::uint64_t>(iter));
    kernels::update_latent(panels, pi, likelihood_params(), key, latent);
    refresh_test_ll();
  }

  void sweep(long iter) {
    const bool adapting = cfg.adapt_during_burnin && iter < cfg.n_burnin;
    gibbs_latent(iter);
    std::size_t bi = 0;
    if (cfg.sample_test_params) {
      for (int j = 0; j < kNumTests; ++j)
        update_sc(blocks[bi++], S[j], priors.s_prior[j], adapting);
      for (int j = 0; j < kNumTests; ++j)
        update_sc(blocks[bi++], C[j], priors.c_prior[j], adapting);
      update_fraction(blocks[bi++], f_pos, adapting);
      update_fraction(blocks[bi++], f_neg, adapting);
    }
    update_beta(blocks[bi++], adapting);
    if (!cfg.flat_intercept) {
      for (std::size_t r = 0; r < data.regions.size(); ++r)
        update_alpha_r(blocks[bi++], static_cast<int>(r), adapting);
      update_alpha(blocks[bi++], adapting);
      update_sigma(blocks[bi++], adapting);
    } else {
      update_alpha(blocks[bi++], adapting);
    }
    if (!cfg.no_tract_effects) {
      update_tau(blocks[bi++], adapting);
      for (std::size_t k = 0; k < data.sampled_tracts.size(); ++k)
        update_b(blocks[bi++], static_cast<int>(k), adapting);
    }
    check_state_finite();
  }

  void check_state_finite() const {
    double target = test_ll + log_prior_regression(reg, priors);
    if (cfg.sample_test_params) {
      const TestParams p = current_params();
      for (int j = 0; j < kNumTests; ++j)
        target += log_beta_pdf(p.sensitivity[j], priors.s_prior[j].a,
                               priors.s_prior[j].b) +
                  log_beta_pdf(p.specificity[j], priors.c_prior[j].a,
                               priors.c_prior[j].b);
    }
    for (int i = 0; i < data.n(); ++i) target += bern_term(eta[i], latent[i]);
    if (!std::isfinite(target))
      throw SamplerFault("non-finite target density at current state");
  }

  void record(ChainDraws& out, long kept_index) {
    const TestParams p = current_params();
    if ((cfg.sample_test_params && !p.in_support()) || !reg.in_support())
      throw SamplerFault("kept draw violates support constraints");
    std::vector<double> row;
    row.reserve(out.param_names.size());
    row.push_back(p.sensitivity[0]);
    row.push_back(p.sensitivity[1]);
    row.push_back(p.sensitivity[2]);
    row.push_back(p.specificity[0]);
    row.push_back(p.specificity[1]);
    row.push_back(p.specificity[2]);
    row.push_back(p.cov_pos);
    row.push_back(p.cov_neg);
    row.push_back(reg.alpha);
    for (double ar : reg.alpha_r) row.push_back(ar);
    for (double b : reg.beta_s) row.push_back(b);
    row.push_back(reg.beta_t);
    row.push_back(std::sqrt(reg.sigma2));
    row.push_back(std::sqrt(reg.tau2));
    for (double b : reg.b_t) row.push_back(b);
    out.draws.push_back(std::move(row));
    out.latent.push_back(latent);

    if (cfg.compute_poststrat && !data.poststrat.rows.empty()) {
      const auto ps = poststratify(
          data, ws, reg,
          poststrat_key(cfg.rng_seed, chain_index, kept_index), cfg.poststrat);
      out.pi_statewide.push_back(ps.statewide);
      out.pi_region.push_back(ps.by_region);
    }

    const TestParams lik = likelihood_params();
    for (int i = 0; i < data.n(); ++i) {
      const double pi = expit(eta[i]);
      out.infection_prob_sum[i] +=
          cfg.mask_all_tests ? pi
                             : latent_full_conditional(panels[i], pi, lik);
    }
    out.infection_prob_count++;
  }

  std::vector<std::string> param_names() const {
    std::vector<std::string> names = {"S1", "S2", "S3", "C1",
                                      "C2", "C3", "R1", "R0", "alpha"};
    if (!cfg.flat_intercept)
      for (const auto& r : data.regions) names.push_back("alpha_r." + r);
    names.insert(names.end(),
                 {"beta_age1", "beta_age2", "beta_sex", "beta_logpop", "sigma",
                  "tau"});
    for (int t : data.sampled_tracts) names.push_back("b." + data.tracts[t]);
    return names;
  }
};

}  // namespace

ChainDraws run_chain(const SamplerConfig& config, const Dataset& data,
                     const PriorSpec& priors, int chain_index) {
  config.validate();
  priors.require_valid();
  Chain chain(config, data, priors, chain_index);

  ChainDraws out;
  out.chain_index = chain_index;
  out.param_names = chain.param_names();
  out.infection_prob_sum.assign(data.participants.size(), 0.0);

  long kept = 0;
  for (long iter = 0; iter < config.n_iterations; ++iter) {
    chain.sweep(iter);
    if (iter >= config.n_burnin &&
        (iter - config.n_burnin) % config.thin_every == 0 &&
        kept < config.n_kept()) {
      chain.record(out, kept);
      ++kept;
    }
  }
  for (const auto& b : chain.blocks)
    out.acceptance.push_back(BlockStats{b.name, b.proposed, b.accepted, b.step});
  return out;
}

std::vector<ChainDraws> run_chains(const SamplerConfig& config,
                                   const Dataset& data,
                                   const PriorSpec& priors) {
  config.validate();
  std::vector<ChainDraws> chains(config.n_chains);
  std::exception_ptr fault;
#pragma omp parallel for schedule(dynamic, 1)
  for (int c = 0; c < config.n_chains; ++c) {
    try {
      chains[c] = run_chain(config, data, priors, c);
    } catch (...) {
#pragma omp critical
      if (!fault) fault = std::current_exception();
    }
  }
  if (fault) std::rethrow_exception(fault);
  return chains;
}

}  // namespace seroprev
