#include "condrdf/error.hpp"
#include "condrdf/oracle.hpp"
#include "condrdf/waterfill.hpp"
#include "support/fixtures.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

namespace condrdf {
namespace {

double waterfill_rate(const GaussianSourceSpec& spec, double delta) {
  return solve_waterfill(spectral_setup(spec, conditional_stats(spec)), delta).rate;
}

TEST(BruteForce, ScalarExampleFineGrid) {
  oracle::Resolution res;
  res.eigen_points = 10001;
  const auto r = oracle::brute_force_rdf(testing::scalar_example(), 0.375, res);
  EXPECT_NEAR(r.rate, 0.5 * std::numbers::ln2, 1e-4);
  EXPECT_EQ(r.method, oracle::Method::Grid);
  EXPECT_NEAR(r.eigen_step, 1e-4, 1e-15);
  EXPECT_GE(r.feasible_points, 10);
}

TEST(BruteForce, UpperEndIsZero) {
  const auto r = oracle::brute_force_rdf(testing::scalar_example(), 0.5);
  EXPECT_NEAR(r.rate, 0.0, 1e-15);
}

TEST(BruteForce, DiagonalPairMidRange) {
  const auto spec = testing::diagonal_pair_example();
  const double delta = 0.5 * (0.4375 + 0.75);
  oracle::Resolution res;
  res.eigen_points = 1001;  // step 1e-3
  const auto r = oracle::brute_force_rdf(spec, delta, res);
  EXPECT_NEAR(r.rate, waterfill_rate(spec, delta), 1e-3);
}

TEST(BruteForce, ArgminIsFeasible) {
  const auto spec = testing::diagonal_pair_example();
  const auto stats = conditional_stats(spec);
  const double delta = 0.6;
  const auto r = oracle::brute_force_rdf(spec, delta);
  const double tol = 1e-9;
  EXPECT_LE((stats.q_x_given_y - r.argmin).trace(), delta + tol);
  EXPECT_GE(min_eigenvalue(r.argmin), -tol);
  EXPECT_GE(min_eigenvalue(stats.q_x_given_y - r.argmin), -tol);
}

TEST(BruteForce, NeverBeatsWaterfillAndWithinResolution) {
  std::mt19937_64 rng(71);
  const oracle::Resolution res;
  const double tol = oracle::resolution_tolerance(res);
  EXPECT_NEAR(tol, 2e-3, 1e-15);
  for (int trial = 0; trial < 8; ++trial) {
    const int n = 1 + trial % 2;
    const auto spec = testing::random_spec(rng, n, 1 + (trial / 2) % 2);
    const auto setup = spectral_setup(spec, conditional_stats(spec));
    const double delta = testing::delta_at(distortion_range(setup), 0.2 + 0.1 * trial);
    const double wf = solve_waterfill(setup, delta).rate;
    const double brute = oracle::brute_force_rdf(spec, delta, res).rate;
    EXPECT_GE(brute, wf - 1e-9);
    EXPECT_LE(brute, wf + tol);
    EXPECT_LE(brute, wf + 1e-4);
  }
}

TEST(BruteForce, ScalarMatchesWaterfillTightly) {
  std::mt19937_64 rng(73);
  for (int trial = 0; trial < 10; ++trial) {
    const auto spec = testing::random_spec(rng, 1, 1 + trial % 2);
    const auto setup = spectral_setup(spec, conditional_stats(spec));
    const double delta = testing::delta_at(distortion_range(setup), 0.15 + 0.08 * trial);
    // The scalar grid starts on the distortion boundary, which is the optimum.
    EXPECT_NEAR(oracle::brute_force_rdf(spec, delta).rate, solve_waterfill(setup, delta).rate, 1e-4);
  }
}

TEST(BruteForce, Errors) {
  std::mt19937_64 rng(79);
  const auto big = testing::random_spec(rng, 3, 1);
  try {
    oracle::brute_force_rdf(big, 1.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DimensionUnsupported);
  }
  oracle::Resolution coarse;
  coarse.eigen_points = 3;
  try {
    oracle::brute_force_rdf(testing::scalar_example(), 0.3, coarse);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ResolutionTooCoarse);
  }
  try {
    oracle::brute_force_rdf(validate_spec(Matrix::Identity(3, 3), Dims{1, 1, 1}), 0.5);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::HypothesisViolated);
  }
}

TEST(WynerScalar, ClosedForms) {
  auto w = oracle::wyner_scalar_rdf(1.0, 0.25);
  EXPECT_NEAR(w.rate, 0.5 * std::log(4.0), 1e-15);
  EXPECT_NEAR(w.h, 0.75, 1e-15);
  EXPECT_NEAR(w.q_w, 0.1875, 1e-15);

  w = oracle::wyner_scalar_rdf(1.0, 1.0);
  EXPECT_EQ(w.rate, 0.0);
  EXPECT_EQ(w.h, 0.0);
  EXPECT_EQ(w.q_w, 0.0);

  w = oracle::wyner_scalar_rdf(1.0, 3.0);
  EXPECT_EQ(w.rate, 0.0);
}

TEST(WynerScalar, EqualsWaterfillOnEmbeddedSpec) {
  for (double q : {0.3, 1.0, 2.5}) {
    const auto spec = testing::wyner_spec(q, 0.7);
    for (int k = 1; k <= 20; ++k) {
      const double delta = q * k / 20.0;
      EXPECT_NEAR(waterfill_rate(spec, delta), oracle::wyner_scalar_rdf(q, delta).rate, 1e-9);
    }
  }
}

TEST(ClassicalScalar, ClosedForms) {
  auto c = oracle::classical_scalar_rdf(1.0, 0.25);
  EXPECT_NEAR(c.rate, 0.5 * std::log(4.0), 1e-15);
  EXPECT_NEAR(c.reproduction_variance, 0.75, 1e-15);
  c = oracle::classical_scalar_rdf(1.0, 1.5);
  EXPECT_EQ(c.rate, 0.0);
  EXPECT_EQ(c.reproduction_variance, 0.0);
  c = oracle::classical_scalar_rdf(2.0, 1.0);
  EXPECT_NEAR(c.rate, 0.5 * std::numbers::ln2, 1e-15);
}

TEST(ClassicalScalar, EqualsWaterfillWithIndependentSideInformation) {
  const auto spec = testing::classical_spec(2.0);
  for (int k = 1; k <= 20; ++k) {
    const double delta = 2.0 * k / 20.0;
    EXPECT_NEAR(waterfill_rate(spec, delta), oracle::classical_scalar_rdf(2.0, delta).rate, 1e-9);
  }
}

TEST(AdditiveNoiseDiscrepancy, Rows) {
  const auto rows = oracle::remark3_discrepancy(1.0, {0.5, 0.99, 1.0});
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_NEAR(rows[0].prior_noise_variance, 1.0, 1e-15);
  EXPECT_NEAR(rows[0].wyner_h, 0.5, 1e-15);
  EXPECT_NEAR(rows[0].wyner_z_variance, 0.5, 1e-15);
  EXPECT_FALSE(rows[0].divergent);

  EXPECT_NEAR(rows[1].prior_noise_variance, 99.0, 1e-9);
  EXPECT_LT(rows[1].wyner_z_variance, 0.02);

  EXPECT_TRUE(std::isinf(rows[2].prior_noise_variance));
  EXPECT_EQ(rows[2].wyner_z_variance, 0.0);
  EXPECT_TRUE(rows[2].divergent);
}

TEST(AdditiveNoiseDiscrepancy, AdditiveNoiseReproductionDiffersAtHalf) {
  const double q = 1.0;
  const auto row = oracle::remark3_discrepancy(q, {q / 2})[0];
  // Z = X + N_3 has variance q + delta/(q - delta), not max(0, q - delta).
  EXPECT_GT(std::abs(row.prior_z_variance - row.classical_reproduction_variance), 0.1);
  EXPECT_NEAR(row.classical_reproduction_variance, 0.5, 1e-15);
}

TEST(AdditiveNoiseDiscrepancy, DivergenceFlagThreshold) {
  const double q = 1.0;
  for (double delta : {0.1, 0.5, 0.9, 0.999, 0.99999}) {
    const auto row = oracle::remark3_discrepancy(q, {delta})[0];
    EXPECT_EQ(row.divergent, row.prior_noise_variance > oracle::kDivergenceRatio * row.wyner_z_variance);
  }
}

TEST(AdditiveNoiseDiscrepancy, RejectsOutOfRange) {
  EXPECT_THROW(oracle::remark3_discrepancy(1.0, {0.0}), Error);
  EXPECT_THROW(oracle::remark3_discrepancy(1.0, {1.5}), Error);
  EXPECT_THROW(oracle::remark3_discrepancy(0.0, {0.5}), Error);
}

}  // namespace
}  // namespace condrdf
