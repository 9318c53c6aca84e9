#pragma once

// Shared data types, identifier spaces, and validation for survey records,
// model parameters, and poststratification cells.

#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace seroprev {

enum class AgeGroup : int { a18_44 = 0, a45_64 = 1, a65_plus = 2 };
enum class Sex : int { male = 0, female = 1 };

constexpr int kNumAgeGroups = 3;
constexpr int kNumSexes = 2;
constexpr int kNumStrata = kNumAgeGroups * kNumSexes;
constexpr int kNumTests = 3;

std::string to_string(AgeGroup g);
std::string to_string(Sex s);
std::optional<AgeGroup> parse_age_group(const std::string& token);
std::optional<Sex> parse_sex(const std::string& token);

inline int stratum_index(AgeGroup g, Sex s) {
  return static_cast<int>(g) * kNumSexes + static_cast<int>(s);
}

/// Per-participant triple of optional binary antibody results
/// (Abbott IgG, Liaison IgG, Epitope IgM).
struct TestPanel {
  std::optional<int> abbott_igg;
  std::optional<int> liaison_igg;
  std::optional<int> epitope_igm;

  std::optional<int> result(int test) const {
    switch (test) {
      case 0: return abbott_igg;
      case 1: return liaison_igg;
      default: return epitope_igm;
    }
  }
  int observed_count() const {
    return (abbott_igg ? 1 : 0) + (liaison_igg ? 1 : 0) + (epitope_igm ? 1 : 0);
  }
  /// 3-bit mask, bit 2 = Abbott IgG, bit 1 = Liaison IgG, bit 0 = Epitope IgM,
  /// so the full panel reads as 0b111.
  unsigned mask() const {
    return (abbott_igg ? 4u : 0u) | (liaison_igg ? 2u : 0u) |
           (epitope_igm ? 1u : 0u);
  }
  bool valid() const {
    auto ok = [](const std::optional<int>& v) {
      return !v || *v == 0 || *v == 1;
    };
    return observed_count() >= 1 && ok(abbott_igg) && ok(liaison_igg) &&
           ok(epitope_igm);
  }
};

struct PatternCode {
  int index = 0;     // 1-based position within the observable patterns
  unsigned mask = 0; // which tests are observed
};

/// Maps a panel to its pattern index under the frozen pattern ordering
/// (number of positives descending, then binary value descending); a complete
/// panel yields index in 1..8 with (1,1,1) -> 1 and (0,0,0) -> 8.
PatternCode pattern_index(const TestPanel& panel);

/// Observable patterns for a mask, in frozen order. Each entry is a bit
/// pattern over the observed tests in panel order (first observed test is the
/// highest bit).
std::vector<unsigned> observable_patterns(unsigned mask);

/// Sensitivities, specificities, and conditional covariances of the battery.
struct TestParams {
  std::array<double, kNumTests> sensitivity{};
  std::array<double, kNumTests> specificity{};
  double cov_pos = 0.0;  // IgG pair covariance given infected
  double cov_neg = 0.0;  // IgG pair covariance given not infected

  bool in_support() const;         // S, C strictly inside (0,1)
  bool in_closed_support() const;  // allows S or C equal to 1 (perfect tests)
  void require_valid() const;
};

struct Person {
  std::string id;
  int region = -1;
  AgeGroup age_group = AgeGroup::a18_44;
  Sex sex = Sex::male;
  int tract = -1;  // index into Dataset::tracts
  TestPanel panel;
  int stratum() const { return stratum_index(age_group, sex); }
};

/// Multilevel-regression parameter state.
struct RegressionState {
  std::vector<double> alpha_r;   // per-region intercepts, logit scale
  double alpha = 0.0;            // global mean intercept
  double sigma2 = 1.0;           // region intercept variance
  std::array<double, 3> beta_s{};  // two age contrasts + one sex contrast
  double beta_t = 0.0;           // standardized log-population effect
  std::vector<double> b_t;       // tract random effects (indexed by tract)
  double tau2 = 1.0;             // tract random-effect variance

  bool in_support() const { return sigma2 > 0.0 && tau2 > 0.0; }
};

struct PostStratRow {
  int region = -1;
  int tract = -1;
  AgeGroup age_group = AgeGroup::a18_44;
  Sex sex = Sex::male;
  double adult_population = 0.0;
};

struct PostStratTable {
  std::vector<PostStratRow> rows;
  double total_population() const {
    double t = 0.0;
    for (const auto& r : rows) t += r.adult_population;
    return t;
  }
};

/// Beta hyperparameters and regression prior settings.
struct PriorSpec {
  struct BetaAB {
    double a = 1.0, b = 1.0;
    double mean() const { return a / (a + b); }
  };
  std::array<BetaAB, kNumTests> s_prior{BetaAB{109, 13}, BetaAB{96, 39},
                                        BetaAB{9, 11}};
  std::array<BetaAB, kNumTests> c_prior{BetaAB{1066, 4}, BetaAB{1074, 16},
                                        BetaAB{54, 0.1}};
  double alpha_mean = -3.4761;  // logit(0.03), overwritten by default()
  double alpha_var = 1.0;
  double beta_var = 9.0;
  double sigma_max = 5.0;
  double tau_max = 5.0;

  // Alternative prior on the prevalence scale: expit(alpha) ~ Beta(a,b).
  // Used by reduced-model checks; the survey analysis keeps the normal prior.
  enum class AlphaPriorKind { normal, logit_beta };
  AlphaPriorKind alpha_prior_kind = AlphaPriorKind::normal;
  BetaAB alpha_beta{1.0, 1.0};

  static PriorSpec defaults();
  void require_valid() const;
};

// --- Raw ingestion records -------------------------------------------------

struct ParticipantRecord {
  std::string id, region, tract;
  std::string age_group, sex;
  std::optional<int> abbott_igg, liaison_igg, epitope_igm;
  long row = 0;  // source row for error reporting
};

struct TractRecord {
  std::string tract, region;
  double total_population = 0.0;
  long row = 0;
};

struct PostStratRecord {
  std::string region, tract, age_group, sex;
  double adult_population = 0.0;
  long row = 0;
};

struct NonResponseRecord {
  std::string region;
  double rate = 0.0;
  long row = 0;
};

struct RawTables {
  std::vector<ParticipantRecord> participants;
  std::vector<TractRecord> tracts;
  std::vector<PostStratRecord> poststrat;
  std::vector<NonResponseRecord> nonresponse;
};

// --- Validated bundle ------------------------------------------------------

struct Dataset {
  std::vector<std::string> regions;        // sorted unique region ids
  std::vector<std::string> tracts;         // sorted statewide tract ids
  std::vector<int> tract_region;           // region index per tract
  std::vector<double> tract_population;    // total population per tract
  std::vector<Person> participants;
  PostStratTable poststrat;
  std::vector<double> nonresponse_rate;    // by region index
  std::vector<int> sampled_tracts;         // tract indices with participants

  int n() const { return static_cast<int>(participants.size()); }
  int region_index(const std::string& id) const;
  int tract_index(const std::string& id) const;
};

struct ValidationIssue {
  std::string message;
  long row = 0;
};

struct ValidationResult {
  std::optional<Dataset> dataset;
  std::vector<ValidationIssue> errors;    // any entry means failure
  std::vector<ValidationIssue> warnings;  // dropped rows etc.
  bool ok() const { return errors.empty() && dataset.has_value(); }
};

/// Cross-references all tables and resolves identifiers. Collects every
/// violation rather than stopping at the first. Participants failing the
/// at-least-one-test inclusion rule are dropped with a warning.
ValidationResult validate_dataset(const RawTables& raw);

/// Dataset back to raw form; validate(to_raw(d)) reproduces d.
RawTables to_raw(const Dataset& d);

inline double logit(double p) { return std::log(p / (1.0 - p)); }
inline double expit(double x) {
  if (x >= 0.0) {
    const double e = std::exp(-x);
    return 1.0 / (1.0 + e);
  }
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace seroprev
