#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <numeric>

#include "seroprev/testmodel.hpp"

using namespace seroprev;

namespace {

TestParams oracle_params() {
  TestParams p;
  p.sensitivity = {0.9, 0.7, 0.5};
  p.specificity = {0.95, 0.85, 0.99};
  p.cov_pos = 0.04;
  p.cov_neg = 0.01;
  return p;
}

constexpr double kTol = 1e-14;

void check_close(const std::vector<double>& got,
                 const std::vector<double>& want) {
  REQUIRE(got.size() == want.size());
  for (std::size_t i = 0; i < got.size(); ++i)
    CHECK(got[i] == doctest::Approx(want[i]).epsilon(kTol));
}

}  // namespace

TEST_CASE("covariance upper bound") {
  CHECK(covariance_upper_bound(0.9, 0.7) == doctest::Approx(0.07));
  CHECK(covariance_upper_bound(0.5, 0.5) == doctest::Approx(0.25));
  CHECK(covariance_upper_bound(0.95, 0.85) == doctest::Approx(0.0425));
  CHECK_THROWS(covariance_upper_bound(0.0, 0.5));
  CHECK_THROWS(covariance_upper_bound(0.5, 1.0));
}

TEST_CASE("IgG pair probabilities carry the covariance with alternating sign") {
  const auto p = oracle_params();
  // Concordant results gain the covariance, discordant results lose it.
  CHECK(joint_igg_prob(1, 1, 1, p) == doctest::Approx(0.67).epsilon(kTol));
  CHECK(joint_igg_prob(1, 0, 1, p) == doctest::Approx(0.23).epsilon(kTol));
  CHECK(joint_igg_prob(0, 1, 1, p) == doctest::Approx(0.03).epsilon(kTol));
  CHECK(joint_igg_prob(0, 0, 1, p) == doctest::Approx(0.07).epsilon(kTol));
  CHECK(joint_igg_prob(1, 1, 0, p) == doctest::Approx(0.0175).epsilon(kTol));
  CHECK(joint_igg_prob(0, 0, 0, p) == doctest::Approx(0.8175).epsilon(kTol));
  double total1 = 0.0, total0 = 0.0;
  for (int t1 : {0, 1})
    for (int t2 : {0, 1}) {
      total1 += joint_igg_prob(t1, t2, 1, p);
      total0 += joint_igg_prob(t1, t2, 0, p);
    }
  CHECK(total1 == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(total0 == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("single test probability") {
  CHECK(single_test_prob(1, 1, 0.5, 0.99) == 0.5);
  CHECK(single_test_prob(0, 1, 0.5, 0.99) == 0.5);
  CHECK(single_test_prob(1, 0, 0.5, 0.99) == doctest::Approx(0.01));
  CHECK(single_test_prob(0, 0, 0.5, 0.99) == 0.99);
  CHECK(single_test_prob(1, 1, 1.0, 1.0) == 1.0);  // perfect test allowed
  CHECK_THROWS(single_test_prob(1, 1, 0.0, 0.99));
}

TEST_CASE("full battery pattern vector matches the frozen oracle") {
  const auto p = oracle_params();
  // Patterns ordered 111,110,101,011,100,010,001,000.
  check_close(pattern_prob_vector(1, p, 0b111u),
              {0.335, 0.335, 0.115, 0.015, 0.115, 0.015, 0.035, 0.035});
  check_close(pattern_prob_vector(0, p, 0b111u),
              {0.000175, 0.017325, 0.000325, 0.001325, 0.032175, 0.131175,
               0.008175, 0.809325});
}

TEST_CASE("masked pattern vectors match the frozen oracles") {
  const auto p = oracle_params();
  // IgG pair only: covariance still applies.
  check_close(pattern_prob_vector(1, p, 0b110u), {0.67, 0.23, 0.03, 0.07});
  check_close(pattern_prob_vector(0, p, 0b110u),
              {0.0175, 0.0325, 0.1325, 0.8175});
  // Abbott + IgM: one IgG missing, independence applies.
  check_close(pattern_prob_vector(1, p, 0b101u), {0.45, 0.45, 0.05, 0.05});
  check_close(pattern_prob_vector(0, p, 0b101u),
              {0.0005, 0.0495, 0.0095, 0.9405});
  // Liaison + IgM.
  check_close(pattern_prob_vector(1, p, 0b011u), {0.35, 0.35, 0.15, 0.15});
  check_close(pattern_prob_vector(0, p, 0b011u),
              {0.0015, 0.1485, 0.0085, 0.8415});
  CHECK_THROWS(pattern_prob_vector(1, p, 0u));
}

TEST_CASE("pattern vectors are simplex for every mask and random parameters") {
  std::uint64_t s = 12345;
  auto u = [&] {
    s = s * 6364136223846793005ULL + 1442695040888963407ULL;
    return (s >> 11) * (1.0 / 9007199254740992.0);
  };
  for (int rep = 0; rep < 200; ++rep) {
    TestParams p;
    for (int j = 0; j < 3; ++j) {
      p.sensitivity[j] = 0.05 + 0.9 * u();
      p.specificity[j] = 0.05 + 0.9 * u();
    }
    p.cov_pos = u() * covariance_upper_bound(p.sensitivity[0], p.sensitivity[1]);
    p.cov_neg = u() * covariance_upper_bound(p.specificity[0], p.specificity[1]);
    for (unsigned mask = 1; mask <= 7; ++mask) {
      for (int d : {0, 1}) {
        const auto v = pattern_prob_vector(d, p, mask);
        double total = 0.0;
        for (double x : v) {
          CHECK(x >= 0.0);
          total += x;
        }
        CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("panel likelihood picks the panel's own pattern") {
  const auto p = oracle_params();
  TestPanel t110{1, 1, 0};
  CHECK(panel_likelihood(t110, 1, p) == doctest::Approx(0.335).epsilon(kTol));
  TestPanel igg_only{1, 0, std::nullopt};
  CHECK(panel_likelihood(igg_only, 1, p) == doctest::Approx(0.23).epsilon(kTol));
  TestPanel igm_only{std::nullopt, std::nullopt, 1};
  CHECK(panel_likelihood(igm_only, 0, p) == doctest::Approx(0.01).epsilon(kTol));
}

TEST_CASE("latent full conditional matches the frozen oracle") {
  const auto p = oracle_params();
  TestPanel both_igg_pos{1, 1, std::nullopt};
  CHECK(latent_full_conditional(both_igg_pos, 0.03, p) ==
        doctest::Approx(0.5421443020903572).epsilon(kTol));
  TestPanel mixed{1, 0, 1};
  CHECK(latent_full_conditional(mixed, 0.1, p) ==
        doctest::Approx(0.975196099215603).epsilon(kTol));
  CHECK(latent_full_conditional(mixed, 0.0, p) == 0.0);
  CHECK(latent_full_conditional(mixed, 1.0, p) == 1.0);
  CHECK_THROWS(latent_full_conditional(mixed, -0.1, p));
}

TEST_CASE("zero-likelihood observation yields probability zero, not NaN") {
  TestParams p = oracle_params();
  p.sensitivity = {1.0, 1.0, 0.5};
  p.specificity = {1.0, 1.0, 0.99};
  p.cov_pos = 0.0;
  p.cov_neg = 0.0;
  // Discordant IgG pair is impossible under perfect IgG tests.
  TestPanel impossible{1, 0, std::nullopt};
  CHECK(latent_full_conditional(impossible, 0.5, p) == 0.0);
}
