#include <gtest/gtest.h>

#include <array>
#include <cmath>
#include <vector>

#include "gen.hpp"
#include "hmdgeom/error.hpp"
#include "hmdgeom/psychometrics.hpp"
#include "oracles.hpp"

using namespace hmdgeom;
using namespace hmdgeom::psychometrics;

namespace {

const std::vector<double> kLevels{-0.012, -0.006, 0.0, 0.006, 0.012};

std::vector<std::array<double, 3>> rows_of(const TrialSet& t) {
  std::vector<std::array<double, 3>> rows;
  for (const Bin& b : t.bins) rows.push_back({b.x, double(b.n_total), double(b.n_closer)});
  return rows;
}

TrialSet mirror(TrialSet t) {
  for (Bin& b : t.bins) b.x = -b.x;
  return t;
}

PsychometricModel with_slope(double s) {
  PsychometricModel m;
  m.slope = s;
  return m;
}

}  // namespace

TEST(LogisticPc, Examples) {
  EXPECT_DOUBLE_EQ(logistic_pc(with_slope(37.0), 0.0), 0.495);
  EXPECT_NEAR(logistic_pc(with_slope(20.0), 0.1), 0.99 / (1.0 + std::exp(-2.0)), 1e-15);
  EXPECT_NEAR(logistic_pc(with_slope(20.0), 0.1), 0.8720, 1e-4);
  EXPECT_DOUBLE_EQ(logistic_pc(with_slope(0.0), 0.3), 0.495);
}

TEST(LogisticPc, SaturatesWithoutOverflow) {
  EXPECT_DOUBLE_EQ(logistic_pc(with_slope(2000.0), 1e6), 0.99);
  EXPECT_EQ(logistic_pc(with_slope(2000.0), -1e6), 0.99 / (1.0 + std::exp(700.0)));
  EXPECT_TRUE(std::isfinite(logistic_pc(with_slope(-2000.0), 1e6)));
}

TEST(LogisticPc, MonotoneAndBounded) {
  gen::Rng rng(41);
  for (int i = 0; i < gen::kCases; ++i) {
    const PsychometricModel m = with_slope(rng.uniform(-2000, 2000));
    const double a = rng.uniform(-0.1, 0.1);
    const double b = a + rng.uniform(0.0, 0.05);
    const double pa = logistic_pc(m, a);
    const double pb = logistic_pc(m, b);
    ASSERT_GE(pa, 0.0);
    ASSERT_LE(pa, 0.99);
    if (m.slope > 0) ASSERT_LE(pa, pb);
    if (m.slope < 0) ASSERT_GE(pa, pb);
  }
}

TEST(ModelValidation, Bounds) {
  PsychometricModel m;
  m.lapse = 0.06;
  EXPECT_THROW(validate(m), Error);
  m = with_slope(2001);
  EXPECT_THROW(validate(m), Error);
  m = {};
  m.guess = 0.6;
  EXPECT_THROW(validate(m), Error);
}

TEST(NegLogLikelihood, SingleTrial) {
  const TrialSet t{{{0.0, 1, 1}}};
  EXPECT_NEAR(neg_log_likelihood(with_slope(0.0), t), -std::log(0.495), 1e-15);
  EXPECT_NEAR(neg_log_likelihood(with_slope(0.0), t), 0.7032, 1e-4);
}

TEST(NegLogLikelihood, MatchesOracleAndIsMinimizedAtGeneratingSlope) {
  const double s_true = 60.0;
  const double p = logistic_pc(with_slope(s_true), 0.01);
  // Counts scaled so the responses sit exactly on the model probabilities.
  const double n = 1e6;
  const TrialSet t{{{-0.01, std::int64_t(n), std::int64_t(std::llround((0.99 - p) * n))},
                    {0.01, std::int64_t(n), std::int64_t(std::llround(p * n))}}};
  for (double s : {-100.0, 0.0, 30.0, 60.0, 150.0}) {
    EXPECT_NEAR(neg_log_likelihood(with_slope(s), t), oracle::logistic_nll(s, 0.01, rows_of(t)), 1e-6);
  }
  const double scanned = oracle::scan_best_slope(0.0, 200.0, 0.5, 0.01, rows_of(t));
  EXPECT_NEAR(scanned, s_true, 0.5);
  EXPECT_NEAR(fit_slope(t).slope, scanned, 0.5);
}

TEST(NegLogLikelihood, AllFarthestPrefersNegativeSlope) {
  const TrialSet t{{{-0.01, 50, 0}, {0.01, 50, 0}, {0.02, 50, 0}}};
  EXPECT_GT(neg_log_likelihood(with_slope(1500), t), neg_log_likelihood(with_slope(-1500), t));
  EXPECT_GT(neg_log_likelihood(with_slope(1500), t), 100.0);
}

TEST(NegLogLikelihood, NotWorseAtTrueSlopeThanFiftyPercentAway) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const TrialSet t = sample_trials(with_slope(50), kLevels, 500, seed);
    const double at_true = neg_log_likelihood(with_slope(50), t);
    ASSERT_GE(at_true, 0.0);
    EXPECT_LE(at_true, neg_log_likelihood(with_slope(25), t)) << seed;
    EXPECT_LE(at_true, neg_log_likelihood(with_slope(75), t)) << seed;
  }
}

TEST(FitSlope, RecoversGeneratingSlope) {
  const TrialSet t = sample_trials(with_slope(50), kLevels, 100, 7);
  const PsychometricFit fit = bootstrap_fit(t, 200, 7);
  EXPECT_TRUE(fit.converged);
  EXPECT_GT(fit.bootstrap_sd, 0.0);
  EXPECT_LT(std::abs(fit.slope - 50.0), 2.0 * fit.bootstrap_sd) << fit.slope << " sd " << fit.bootstrap_sd;
  // Same order as the per-subject spreads seen in human data.
  EXPECT_GT(fit.bootstrap_sd, 2.9);
  EXPECT_LT(fit.bootstrap_sd, 33.9);
}

TEST(FitSlope, UninformativeDataIsFlat) {
  const TrialSet t{{{-0.012, 100, 50}, {-0.006, 100, 50}, {0.0, 100, 50}, {0.006, 100, 50}, {0.012, 100, 50}}};
  const PsychometricFit fit = fit_slope(t);
  EXPECT_TRUE(fit.converged);
  EXPECT_LT(std::abs(fit.slope), 1.0);
}

TEST(FitSlope, SeparatedDataHitsUpperBound) {
  const TrialSet t{{{-0.012, 20, 0}, {-0.006, 20, 0}, {0.006, 20, 20}, {0.012, 20, 20}}};
  const PsychometricFit fit = fit_slope(t);
  EXPECT_TRUE(fit.converged);
  EXPECT_NEAR(fit.slope, 2000.0, 1e-3);
  EXPECT_NEAR(fit_slope(mirror(t)).slope, -2000.0, 1e-3);
}

TEST(FitSlope, DegenerateInputs) {
  try {
    fit_slope(TrialSet{{{0.01, 30, 10}}});
    FAIL() << "expected DegenerateData";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DegenerateData);
  }
  EXPECT_THROW(fit_slope(TrialSet{{{0.01, 0, 0}, {0.02, 0, 0}}}), Error);
  EXPECT_THROW(fit_slope(TrialSet{{{0.01, 3, 4}, {0.02, 3, 1}}}), Error);
  // Duplicate bins at one level are still a single level.
  EXPECT_THROW(fit_slope(TrialSet{{{0.01, 3, 1}, {0.01, 3, 2}}}), Error);
}

TEST(FitSlope, Deterministic) {
  const TrialSet t = sample_trials(with_slope(-30), kLevels, 60, 3);
  const PsychometricFit a = fit_slope(t);
  const PsychometricFit b = fit_slope(t);
  EXPECT_EQ(a.slope, b.slope);
  EXPECT_EQ(a.nll, b.nll);
}

TEST(FitSlope, MatchesGridScanOracle) {
  gen::Rng rng(42);
  for (int i = 0; i < 50; ++i) {
    const TrialSet t = sample_trials(with_slope(rng.uniform(-150, 150)), kLevels, 200, i);
    const double scanned = oracle::scan_best_slope(-400.0, 400.0, 0.05, 0.01, rows_of(t));
    ASSERT_NEAR(fit_slope(t).slope, scanned, 0.05) << "case " << i;
  }
}

TEST(FitSlope, MirrorSymmetry) {
  gen::Rng rng(43);
  for (int i = 0; i < gen::kCases; ++i) {
    const TrialSet t = sample_trials(with_slope(rng.uniform(-200, 200)), kLevels, 40, i);
    ASSERT_NEAR(fit_slope(mirror(t)).slope, -fit_slope(t).slope, 2e-4) << "case " << i;
  }
}

TEST(BootstrapFit, DeterministicBySeed) {
  const TrialSet t = sample_trials(with_slope(50), kLevels, 100, 1);
  const PsychometricFit a = bootstrap_fit(t, 50, 99);
  const PsychometricFit b = bootstrap_fit(t, 50, 99);
  const PsychometricFit c = bootstrap_fit(t, 50, 100);
  EXPECT_EQ(a.bootstrap_sd, b.bootstrap_sd);
  EXPECT_EQ(a.slope, b.slope);
  EXPECT_NE(a.bootstrap_sd, c.bootstrap_sd);
  EXPECT_EQ(a.n_resamples, 50);
}

TEST(BootstrapFit, SingleResampleHasZeroSpread) {
  const TrialSet t = sample_trials(with_slope(50), kLevels, 100, 1);
  EXPECT_EQ(bootstrap_fit(t, 1, 5).bootstrap_sd, 0.0);
  EXPECT_THROW(bootstrap_fit(t, 0, 5), Error);
}

TEST(BootstrapFit, CoverageOverSeeds) {
  int covered = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const TrialSet t = sample_trials(with_slope(50), kLevels, 100, 1000 + seed);
    const PsychometricFit fit = bootstrap_fit(t, 200, seed);
    if (std::abs(fit.slope - 50.0) <= 2.0 * fit.bootstrap_sd) ++covered;
  }
  EXPECT_GE(covered, 18);
}

TEST(BinTrials, GroupsByLevel) {
  const std::vector<Trial> trials{{0.01, true}, {-0.01, false}, {0.01, false}, {0.01, true}, {-0.01, true}};
  const TrialSet t = bin_trials(trials);
  ASSERT_EQ(t.bins.size(), 2u);
  EXPECT_EQ(t.bins[0].x, -0.01);
  EXPECT_EQ(t.bins[0].n_total, 2);
  EXPECT_EQ(t.bins[0].n_closer, 1);
  EXPECT_EQ(t.bins[1].n_total, 3);
  EXPECT_EQ(t.bins[1].n_closer, 2);
  EXPECT_EQ(t.total_trials(), 5);
  EXPECT_EQ(t.distinct_levels(), 2u);
}

TEST(SampleTrials, RespectsModelProbability) {
  const TrialSet t = sample_trials(with_slope(100), std::vector<double>{0.01}, 20000, 4);
  const double p = logistic_pc(with_slope(100), 0.01);
  EXPECT_NEAR(double(t.bins[0].n_closer) / 20000.0, p, 0.015);
}
