#include "seroprev/domain.hpp"

#include <algorithm>
#include <bit>
#include <map>
#include <set>
#include <sstream>

namespace seroprev {

std::string to_string(AgeGroup g) {
  switch (g) {
    case AgeGroup::a18_44: return "18-44";
    case AgeGroup::a45_64: return "45-64";
    default: return "65+";
  }
}

std::string to_string(Sex s) { return s == Sex::male ? "male" : "female"; }

std::optional<AgeGroup> parse_age_group(const std::string& token) {
  if (token == "18-44") return AgeGroup::a18_44;
  if (token == "45-64") return AgeGroup::a45_64;
  if (token == "65+") return AgeGroup::a65_plus;
  return std::nullopt;
}

std::optional<Sex> parse_sex(const std::string& token) {
  if (token == "male" || token == "M" || token == "m") return Sex::male;
  if (token == "female" || token == "F" || token == "f") return Sex::female;
  return std::nullopt;
}

std::vector<unsigned> observable_patterns(unsigned mask) {
  const int k = std::popcount(mask);
  if (k == 0) throw std::invalid_argument("observable_patterns: empty mask");
  std::vector<unsigned> pats;
  for (unsigned p = 0; p < (1u << k); ++p) pats.push_back(p);
  std::sort(pats.begin(), pats.end(), [](unsigned a, unsigned b) {
    const int ca = std::popcount(a), cb = std::popcount(b);
    if (ca != cb) return ca > cb;
    return a > b;
  });
  return pats;
}

PatternCode pattern_index(const TestPanel& panel) {
  if (!panel.valid())
    throw std::invalid_argument("pattern_index: panel has no observed tests");
  const unsigned mask = panel.mask();
  // Compress observed results into a bit pattern, first observed test highest.
  unsigned pat = 0;
  for (int j = 0; j < kNumTests; ++j) {
    if (auto r = panel.result(j)) pat = (pat << 1) | static_cast<unsigned>(*r);
  }
  const auto pats = observable_patterns(mask);
  const auto it = std::find(pats.begin(), pats.end(), pat);
  return PatternCode{static_cast<int>(it - pats.begin()) + 1, mask};
}

namespace {
bool covariances_in_bounds(const TestParams& p) {
  const double bound1 = std::min(p.sensitivity[0], p.sensitivity[1]) -
                        p.sensitivity[0] * p.sensitivity[1];
  const double bound0 = std::min(p.specificity[0], p.specificity[1]) -
                        p.specificity[0] * p.specificity[1];
  return p.cov_pos >= 0.0 && p.cov_pos <= bound1 && p.cov_neg >= 0.0 &&
         p.cov_neg <= bound0;
}
}  // namespace

bool TestParams::in_support() const {
  for (int j = 0; j < kNumTests; ++j) {
    if (!(sensitivity[j] > 0.0 && sensitivity[j] < 1.0)) return false;
    if (!(specificity[j] > 0.0 && specificity[j] < 1.0)) return false;
  }
  return covariances_in_bounds(*this);
}

bool TestParams::in_closed_support() const {
  for (int j = 0; j < kNumTests; ++j) {
    if (!(sensitivity[j] > 0.0 && sensitivity[j] <= 1.0)) return false;
    if (!(specificity[j] > 0.0 && specificity[j] <= 1.0)) return false;
  }
  return covariances_in_bounds(*this);
}

void TestParams::require_valid() const {
  if (!in_closed_support())
    throw std::domain_error("TestParams outside covariance support");
}

PriorSpec PriorSpec::defaults() {
  PriorSpec p;
  p.alpha_mean = logit(0.03);
  return p;
}

void PriorSpec::require_valid() const {
  auto pos = [](double x) { return x > 0.0; };
  for (int j = 0; j < kNumTests; ++j) {
    if (!pos(s_prior[j].a) || !pos(s_prior[j].b) || !pos(c_prior[j].a) ||
        !pos(c_prior[j].b))
      throw std::invalid_argument("PriorSpec: Beta parameters must be > 0");
  }
  if (!pos(alpha_var) || !pos(beta_var) || !pos(sigma_max) || !pos(tau_max))
    throw std::invalid_argument("PriorSpec: variances and bounds must be > 0");
  if (alpha_prior_kind == AlphaPriorKind::logit_beta &&
      (!pos(alpha_beta.a) || !pos(alpha_beta.b)))
    throw std::invalid_argument("PriorSpec: alpha Beta parameters must be > 0");
}

int Dataset::region_index(const std::string& id) const {
  const auto it = std::lower_bound(regions.begin(), regions.end(), id);
  if (it == regions.end() || *it != id) return -1;
  return static_cast<int>(it - regions.begin());
}

int Dataset::tract_index(const std::string& id) const {
  const auto it = std::lower_bound(tracts.begin(), tracts.end(), id);
  if (it == tracts.end() || *it != id) return -1;
  return static_cast<int>(it - tracts.begin());
}

ValidationResult validate_dataset(const RawTables& raw) {
  ValidationResult out;
  auto err = [&](std::string msg, long row) {
    out.errors.push_back({std::move(msg), row});
  };
  auto warn = [&](std::string msg, long row) {
    out.warnings.push_back({std::move(msg), row});
  };

  Dataset d;

  // Tract frame: defines the region and tract identifier spaces.
  std::set<std::string> region_set, tract_set;
  for (const auto& t : raw.tracts) {
    if (tract_set.count(t.tract))
      err("duplicate tract '" + t.tract + "' in tract table", t.row);
    tract_set.insert(t.tract);
    region_set.insert(t.region);
    if (!(t.total_population > 0.0))
      err("tract '" + t.tract + "' has nonpositive total population", t.row);
  }
  if (raw.tracts.empty()) err("tract table is empty", 0);
  d.regions.assign(region_set.begin(), region_set.end());
  d.tracts.assign(tract_set.begin(), tract_set.end());
  d.tract_region.assign(d.tracts.size(), -1);
  d.tract_population.assign(d.tracts.size(), 0.0);
  for (const auto& t : raw.tracts) {
    const int ti = d.tract_index(t.tract);
    d.tract_region[ti] = d.region_index(t.region);
    d.tract_population[ti] = t.total_population;
  }

  // Non-response rates: one per region, all regions covered.
  d.nonresponse_rate.assign(d.regions.size(), -1.0);
  for (const auto& nr : raw.nonresponse) {
    const int ri = d.region_index(nr.region);
    if (ri < 0) {
      err("non-response row references unknown region '" + nr.region + "'",
          nr.row);
      continue;
    }
    if (d.nonresponse_rate[ri] >= 0.0)
      err("duplicate non-response rate for region '" + nr.region + "'", nr.row);
    if (!(nr.rate >= 0.0 && nr.rate <= 1.0))
      err("non-response rate for region '" + nr.region + "' outside [0,1]",
          nr.row);
    d.nonresponse_rate[ri] = nr.rate;
  }
  for (std::size_t r = 0; r < d.regions.size(); ++r) {
    if (d.nonresponse_rate[r] < 0.0)
      err("region '" + d.regions[r] + "' missing from non-response table", 0);
  }

  // Poststratification table.
  std::set<std::tuple<int, int, int, int>> keys;
  std::set<int> poststrat_tracts;
  double total_pop = 0.0;
  for (const auto& pr : raw.poststrat) {
    PostStratRow row;
    row.region = d.region_index(pr.region);
    row.tract = d.tract_index(pr.tract);
    const auto ag = parse_age_group(pr.age_group);
    const auto sx = parse_sex(pr.sex);
    bool bad = false;
    if (row.region < 0) {
      err("poststrat row references unknown region '" + pr.region + "'",
          pr.row);
      bad = true;
    }
    if (row.tract < 0) {
      err("poststrat row references unknown tract '" + pr.tract + "'", pr.row);
      bad = true;
    }
    if (!ag) {
      err("poststrat row has unknown age group '" + pr.age_group + "'", pr.row);
      bad = true;
    }
    if (!sx) {
      err("poststrat row has unknown sex '" + pr.sex + "'", pr.row);
      bad = true;
    }
    if (!(pr.adult_population >= 0.0)) {
      err("poststrat adult population must be >= 0", pr.row);
      bad = true;
    }
    if (bad) continue;
    row.age_group = *ag;
    row.sex = *sx;
    row.adult_population = pr.adult_population;
    const auto key = std::make_tuple(row.region, row.tract,
                                     static_cast<int>(row.age_group),
                                     static_cast<int>(row.sex));
    if (!keys.insert(key).second) {
      err("duplicate poststrat cell (" + pr.region + ", " + pr.tract + ", " +
              pr.age_group + ", " + pr.sex + ")",
          pr.row);
      continue;
    }
    poststrat_tracts.insert(row.tract);
    total_pop += row.adult_population;
    d.poststrat.rows.push_back(row);
  }
  if (!raw.poststrat.empty() && !(total_pop > 0.0))
    err("poststrat table has zero total population", 0);
  if (raw.poststrat.empty()) err("poststrat table is empty", 0);

  // Participants.
  std::set<int> sampled;
  std::set<std::string> participant_ids;
  for (const auto& p : raw.participants) {
    Person person;
    person.id = p.id;
    if (!participant_ids.insert(p.id).second) {
      err("duplicate participant id '" + p.id + "'", p.row);
      continue;
    }
    person.panel = TestPanel{p.abbott_igg, p.liaison_igg, p.epitope_igm};
    auto bad_value = [](const std::optional<int>& v) {
      return v && *v != 0 && *v != 1;
    };
    if (bad_value(p.abbott_igg) || bad_value(p.liaison_igg) ||
        bad_value(p.epitope_igm)) {
      err("participant '" + p.id + "' has non-binary test result", p.row);
      continue;
    }
    if (person.panel.observed_count() == 0) {
      warn("participant '" + p.id +
               "' excluded: no antibody test results available",
           p.row);
      continue;
    }
    const auto ag = parse_age_group(p.age_group);
    const auto sx = parse_sex(p.sex);
    if (!ag || !sx) {
      warn("participant '" + p.id + "' excluded: missing or unknown " +
               (!ag ? "age group '" + p.age_group + "'" : "sex '" + p.sex + "'"),
           p.row);
      continue;
    }
    person.age_group = *ag;
    person.sex = *sx;
    person.tract = d.tract_index(p.tract);
    if (person.tract < 0) {
      err("participant '" + p.id + "' references unknown tract '" + p.tract +
              "'",
          p.row);
      continue;
    }
    person.region = d.region_index(p.region);
    if (person.region < 0) {
      err("participant '" + p.id + "' references unknown region '" + p.region +
              "'",
          p.row);
      continue;
    }
    if (person.region != d.tract_region[person.tract]) {
      err("participant '" + p.id + "' region '" + p.region +
              "' disagrees with tract table region for tract '" + p.tract + "'",
          p.row);
      continue;
    }
    if (!poststrat_tracts.empty() && !poststrat_tracts.count(person.tract)) {
      err("participant tract '" + p.tract +
              "' absent from poststratification table",
          p.row);
      continue;
    }
    sampled.insert(person.tract);
    d.participants.push_back(std::move(person));
  }
  d.sampled_tracts.assign(sampled.begin(), sampled.end());

  if (!out.errors.empty()) return out;
  out.dataset = std::move(d);
  return out;
}

RawTables to_raw(const Dataset& d) {
  RawTables raw;
  for (std::size_t ti = 0; ti < d.tracts.size(); ++ti) {
    raw.tracts.push_back(
        {d.tracts[ti], d.regions[d.tract_region[ti]], d.tract_population[ti],
         static_cast<long>(ti + 1)});
  }
  long row = 0;
  for (const auto& p : d.participants) {
    raw.participants.push_back({p.id, d.regions[p.region], d.tracts[p.tract],
                                to_string(p.age_group), to_string(p.sex),
                                p.panel.abbott_igg, p.panel.liaison_igg,
                                p.panel.epitope_igm, ++row});
  }
  row = 0;
  for (const auto& r : d.poststrat.rows) {
    raw.poststrat.push_back({d.regions[r.region], d.tracts[r.tract],
                             to_string(r.age_group), to_string(r.sex),
                             r.adult_population, ++row});
  }
  for (std::size_t ri = 0; ri < d.regions.size(); ++ri) {
    raw.nonresponse.push_back(
        {d.regions[ri], d.nonresponse_rate[ri], static_cast<long>(ri + 1)});
  }
  return raw;
}

}  // namespace seroprev
