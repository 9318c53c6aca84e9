#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "seroprev/domain.hpp"

using namespace seroprev;

namespace {

TestPanel panel(std::optional<int> a, std::optional<int> l,
                std::optional<int> e) {
  return TestPanel{a, l, e};
}

RawTables tiny_raw() {
  RawTables raw;
  raw.tracts = {{"T1", "north", 1000.0, 2},
                {"T2", "north", 2000.0, 3},
                {"T3", "south", 1500.0, 4}};
  raw.nonresponse = {{"north", 0.8, 2}, {"south", 0.7, 3}};
  long row = 2;
  for (const char* t : {"T1", "T2", "T3"})
    for (const char* a : {"18-44", "45-64", "65+"})
      for (const char* s : {"male", "female"}) {
        const char* r = (t[1] == '3') ? "south" : "north";
        raw.poststrat.push_back({r, t, a, s, 100.0, row++});
      }
  raw.participants = {
      {"p1", "north", "T1", "18-44", "male", 1, 1, 0, 2},
      {"p2", "north", "T2", "45-64", "female", 0, 0, std::nullopt, 3},
      {"p3", "south", "T3", "65+", "male", std::nullopt, 1, 1, 4},
  };
  return raw;
}

}  // namespace

TEST_CASE("age and sex parsing round-trips") {
  for (auto g : {AgeGroup::a18_44, AgeGroup::a45_64, AgeGroup::a65_plus})
    CHECK(parse_age_group(to_string(g)) == g);
  for (auto s : {Sex::male, Sex::female}) CHECK(parse_sex(to_string(s)) == s);
  CHECK(!parse_age_group("20-30"));
  CHECK(!parse_age_group(""));
  CHECK(!parse_sex("unknown"));
  CHECK(to_string(AgeGroup::a65_plus) == "65+");
}

TEST_CASE("stratum index covers the 3x2 grid") {
  CHECK(stratum_index(AgeGroup::a18_44, Sex::male) == 0);
  CHECK(stratum_index(AgeGroup::a18_44, Sex::female) == 1);
  CHECK(stratum_index(AgeGroup::a65_plus, Sex::female) == 5);
}

TEST_CASE("panel mask and validity") {
  CHECK(panel(1, 0, 1).mask() == 0b111u);
  CHECK(panel(1, std::nullopt, 0).mask() == 0b101u);
  CHECK(panel(std::nullopt, std::nullopt, 1).mask() == 0b001u);
  CHECK(panel(1, 0, 1).valid());
  CHECK(!panel(std::nullopt, std::nullopt, std::nullopt).valid());
  CHECK(!panel(2, 0, 1).valid());
}

TEST_CASE("pattern ordering: positives descending, then value descending") {
  // Full battery: (1,1,1) first, (0,0,0) last.
  const int expect[8][3] = {{1, 1, 1}, {1, 1, 0}, {1, 0, 1}, {0, 1, 1},
                            {1, 0, 0}, {0, 1, 0}, {0, 0, 1}, {0, 0, 0}};
  for (int k = 0; k < 8; ++k) {
    const auto code =
        pattern_index(panel(expect[k][0], expect[k][1], expect[k][2]));
    CHECK(code.index == k + 1);
    CHECK(code.mask == 0b111u);
  }
  CHECK(observable_patterns(0b111u) ==
        std::vector<unsigned>{7, 6, 5, 3, 4, 2, 1, 0});
  CHECK(observable_patterns(0b110u) == std::vector<unsigned>{3, 2, 1, 0});
  CHECK(observable_patterns(0b001u) == std::vector<unsigned>{1, 0});
  CHECK_THROWS(observable_patterns(0));
}

TEST_CASE("pattern index under missingness uses the observed sub-battery") {
  CHECK(pattern_index(panel(1, 1, std::nullopt)).index == 1);
  CHECK(pattern_index(panel(0, 0, std::nullopt)).index == 4);
  CHECK(pattern_index(panel(std::nullopt, 1, 0)).index == 2);
  CHECK(pattern_index(panel(std::nullopt, std::nullopt, 0)).index == 2);
  CHECK_THROWS(pattern_index(panel(std::nullopt, std::nullopt, std::nullopt)));
}

TEST_CASE("test parameter support enforces the covariance bounds") {
  TestParams p;
  p.sensitivity = {0.9, 0.7, 0.5};
  p.specificity = {0.95, 0.85, 0.99};
  p.cov_pos = 0.04;
  p.cov_neg = 0.01;
  CHECK(p.in_support());
  p.cov_pos = 0.08;  // above min(.9,.7) - .63 = 0.07
  CHECK(!p.in_support());
  p.cov_pos = 0.7 - 0.9 * 0.7;  // the bound itself is admissible
  CHECK(p.in_support());
  p.cov_pos = -0.01;
  CHECK(!p.in_support());
  p.cov_pos = 0.0;
  p.sensitivity[0] = 1.0;
  CHECK(!p.in_support());
  CHECK(p.in_closed_support());
  p.sensitivity[0] = 1.2;
  CHECK(!p.in_closed_support());
  CHECK_THROWS(p.require_valid());
}

TEST_CASE("prior defaults match the published battery") {
  const auto p = PriorSpec::defaults();
  CHECK(p.s_prior[0].a == 109);
  CHECK(p.s_prior[0].b == 13);
  CHECK(p.c_prior[2].a == 54);
  CHECK(p.c_prior[2].b == doctest::Approx(0.1));
  CHECK(p.alpha_mean == doctest::Approx(logit(0.03)));
  CHECK_NOTHROW(p.require_valid());
}

TEST_CASE("validation accepts a coherent survey") {
  const auto result = validate_dataset(tiny_raw());
  REQUIRE(result.ok());
  const auto& d = *result.dataset;
  CHECK(d.n() == 3);
  CHECK(d.regions == std::vector<std::string>{"north", "south"});
  CHECK(d.tracts == std::vector<std::string>{"T1", "T2", "T3"});
  CHECK(d.sampled_tracts.size() == 3);
  CHECK(d.tract_region[2] == 1);
  CHECK(d.nonresponse_rate[1] == doctest::Approx(0.7));
  CHECK(d.poststrat.total_population() == doctest::Approx(1800.0));
}

TEST_CASE("validation collects all referential errors") {
  auto raw = tiny_raw();
  raw.participants.push_back(
      {"p4", "north", "T9", "18-44", "male", 1, 0, 0, 9});
  raw.participants.push_back(
      {"p1", "north", "T1", "18-44", "male", 0, 0, 0, 10});
  raw.nonresponse.push_back({"east", 0.5, 9});
  const auto result = validate_dataset(raw);
  CHECK(!result.ok());
  CHECK(result.errors.size() == 3);  // unknown tract, dup id, unknown region
}

TEST_CASE("participants without any test result are dropped with a warning") {
  auto raw = tiny_raw();
  raw.participants.push_back({"p4", "north", "T1", "18-44", "male",
                              std::nullopt, std::nullopt, std::nullopt, 9});
  raw.participants.push_back(
      {"p5", "north", "T1", "", "male", 1, std::nullopt, std::nullopt, 10});
  const auto result = validate_dataset(raw);
  REQUIRE(result.ok());
  CHECK(result.dataset->n() == 3);
  CHECK(result.warnings.size() == 2);
}

TEST_CASE("region/tract disagreement is an error") {
  auto raw = tiny_raw();
  raw.participants.push_back({"p4", "south", "T1", "18-44", "male", 1, 0, 0, 9});
  CHECK(!validate_dataset(raw).ok());
}

TEST_CASE("missing non-response coverage is an error") {
  auto raw = tiny_raw();
  raw.nonresponse.pop_back();
  CHECK(!validate_dataset(raw).ok());
}

TEST_CASE("empty participant table is allowed (prior-only fits)") {
  auto raw = tiny_raw();
  raw.participants.clear();
  const auto result = validate_dataset(raw);
  REQUIRE(result.ok());
  CHECK(result.dataset->n() == 0);
  CHECK(result.dataset->sampled_tracts.empty());
}

TEST_CASE("to_raw then validate reproduces the dataset") {
  const auto first = validate_dataset(tiny_raw());
  REQUIRE(first.ok());
  const auto second = validate_dataset(to_raw(*first.dataset));
  REQUIRE(second.ok());
  const auto &a = *first.dataset, &b = *second.dataset;
  CHECK(a.regions == b.regions);
  CHECK(a.tracts == b.tracts);
  CHECK(a.tract_population == b.tract_population);
  CHECK(a.nonresponse_rate == b.nonresponse_rate);
  CHECK(a.n() == b.n());
  REQUIRE(a.poststrat.rows.size() == b.poststrat.rows.size());
  for (std::size_t i = 0; i < a.poststrat.rows.size(); ++i) {
    CHECK(a.poststrat.rows[i].tract == b.poststrat.rows[i].tract);
    CHECK(a.poststrat.rows[i].adult_population ==
          b.poststrat.rows[i].adult_population);
  }
  for (int i = 0; i < a.n(); ++i) {
    CHECK(a.participants[i].id == b.participants[i].id);
    CHECK(a.participants[i].tract == b.participants[i].tract);
    CHECK(a.participants[i].panel.mask() == b.participants[i].panel.mask());
  }
}
