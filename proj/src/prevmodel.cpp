#include "seroprev/prevmodel.hpp"

#include <cmath>
#include <stdexcept>

#include "seroprev/testmodel.hpp"

namespace seroprev {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
}

LogPopStandardizer LogPopStandardizer::fit(
    const std::vector<double>& populations, bool population_sd) {
  if (populations.size() < 2)
    throw std::invalid_argument("standardize_log_pop: need >= 2 tracts");
  double m = 0.0;
  for (double p : populations) {
    if (!(p > 0.0))
      throw std::invalid_argument("standardize_log_pop: populations must be > 0");
    m += std::log(p);
  }
  m /= static_cast<double>(populations.size());
  double ss = 0.0;
  for (double p : populations) {
    const double d = std::log(p) - m;
    ss += d * d;
  }
  const double denom = population_sd
                           ? static_cast<double>(populations.size())
                           : static_cast<double>(populations.size() - 1);
  const double sd = std::sqrt(ss / denom);
  if (!(sd > 0.0))
    throw std::invalid_argument(
        "standardize_log_pop: degenerate spread (all tract populations equal)");
  return LogPopStandardizer{m, sd};
}

std::array<double, 2> age_contrast(AgeGroup g) {
  switch (g) {
    case AgeGroup::a18_44: return {1.0, 0.0};
    case AgeGroup::a45_64: return {0.0, 1.0};
    default: return {-1.0, -1.0};
  }
}

double sex_contrast(Sex s) { return s == Sex::male ? 1.0 : -1.0; }

DesignRow design_row(AgeGroup g, Sex s, double log_pop_z) {
  const auto ac = age_contrast(g);
  return DesignRow{{ac[0], ac[1], sex_contrast(s)}, log_pop_z};
}

double linear_predictor_with_b(const RegressionState& state,
                               const DesignRow& row, int region, double b) {
  double eta = state.alpha_r.empty() ? state.alpha : state.alpha_r.at(region);
  for (int k = 0; k < 3; ++k) eta += row.x_s[k] * state.beta_s[k];
  eta += row.x_t * state.beta_t;
  return eta + b;
}

double linear_predictor(const RegressionState& state, const DesignRow& row,
                        int region, int b_index) {
  if (b_index < 0 || b_index >= static_cast<int>(state.b_t.size()))
    throw std::out_of_range("linear_predictor: tract has no random effect");
  return linear_predictor_with_b(state, row, region, state.b_t[b_index]);
}

double log_prior_regression(const RegressionState& state,
                            const PriorSpec& priors) {
  const double sigma = std::sqrt(state.sigma2);
  const double tau = std::sqrt(state.tau2);
  if (!(sigma > 0.0 && sigma < priors.sigma_max)) return kNegInf;
  if (!(tau > 0.0 && tau < priors.tau_max)) return kNegInf;
  double lp = -std::log(priors.sigma_max) - std::log(priors.tau_max);

  if (priors.alpha_prior_kind == PriorSpec::AlphaPriorKind::normal) {
    lp += log_normal_pdf(state.alpha, priors.alpha_mean, priors.alpha_var);
  } else {
    // expit(alpha) ~ Beta(a,b); density over alpha includes the Jacobian.
    const double p = expit(state.alpha);
    lp += log_beta_pdf(p, priors.alpha_beta.a, priors.alpha_beta.b) +
          std::log(p) + std::log1p(-p);
  }
  for (double ar : state.alpha_r)
    lp += log_normal_pdf(ar, state.alpha, state.sigma2);
  for (double b : state.beta_s) lp += log_normal_pdf(b, 0.0, priors.beta_var);
  lp += log_normal_pdf(state.beta_t, 0.0, priors.beta_var);
  for (double b : state.b_t) lp += log_normal_pdf(b, 0.0, state.tau2);
  return lp;
}

double log_prior(const TestParams& params, const RegressionState& state,
                 const PriorSpec& priors) {
  double lp = 0.0;
  for (int j = 0; j < kNumTests; ++j) {
    lp += log_beta_pdf(params.sensitivity[j], priors.s_prior[j].a,
                       priors.s_prior[j].b);
    lp += log_beta_pdf(params.specificity[j], priors.c_prior[j].a,
                       priors.c_prior[j].b);
  }
  if (std::isinf(lp)) return kNegInf;
  const double bound1 =
      covariance_upper_bound(params.sensitivity[0], params.sensitivity[1]);
  const double bound0 =
      covariance_upper_bound(params.specificity[0], params.specificity[1]);
  if (!(params.cov_pos >= 0.0 && params.cov_pos <= bound1)) return kNegInf;
  if (!(params.cov_neg >= 0.0 && params.cov_neg <= bound0)) return kNegInf;
  lp += -std::log(bound1) - std::log(bound0);
  return lp + log_prior_regression(state, priors);
}

ModelWorkspace ModelWorkspace::build(const Dataset& data) {
  ModelWorkspace ws;
  ws.standardizer = LogPopStandardizer::fit(data.tract_population);
  ws.tract_to_b_index.assign(data.tracts.size(), -1);
  for (std::size_t k = 0; k < data.sampled_tracts.size(); ++k)
    ws.tract_to_b_index[data.sampled_tracts[k]] = static_cast<int>(k);
  ws.rows.reserve(data.participants.size());
  for (const auto& p : data.participants) {
    ws.rows.push_back(design_row(
        p.age_group, p.sex, ws.standardizer.z(data.tract_population[p.tract])));
    ws.region.push_back(p.region);
    ws.b_index.push_back(ws.tract_to_b_index[p.tract]);
  }
  return ws;
}

double participant_logit(const RegressionState& state,
                         const ModelWorkspace& ws, int i) {
  return linear_predictor(state, ws.rows[i], ws.region[i], ws.b_index[i]);
}

double log_joint(const Dataset& data, const std::vector<std::uint8_t>& latent,
                 const TestParams& params, const RegressionState& state,
                 const PriorSpec& priors) {
  const double lp = log_prior(params, state, priors);
  if (std::isinf(lp)) return kNegInf;
  if (latent.size() != data.participants.size())
    throw std::invalid_argument("log_joint: latent size mismatch");
  double ll = lp;
  const auto ws = ModelWorkspace::build(data);
  for (int i = 0; i < data.n(); ++i) {
    const int d = latent[i];
    const double lik = panel_likelihood(data.participants[i].panel, d, params);
    ll += std::log(lik);
    const double pi = expit(participant_logit(state, ws, i));
    ll += d ? std::log(pi) : std::log1p(-pi);
  }
  return ll;
}

}  // namespace seroprev
