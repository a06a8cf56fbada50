#pragma once

// Logistic psychometric function with fixed threshold, lapse and guess
// rates, maximum-likelihood slope fitting and a stratified bootstrap.

#include <cstdint>
#include <span>
#include <vector>

namespace hmdgeom::psychometrics {

inline constexpr double kSlopeLowerBound = -2000.0;
inline constexpr double kSlopeUpperBound = 2000.0;
inline constexpr double kSlopeStart = 20.0;
inline constexpr double kExponentClamp = 700.0;

struct PsychometricModel {
  double slope = 0.0;
  double threshold = 0.0;
  double lapse = 0.01;
  double guess = 0.0;
};

void validate(const PsychometricModel& model);

/// One stimulus level: how many trials and how many "comparison closer" answers.
struct Bin {
  double x = 0.0;
  std::int64_t n_total = 0;
  std::int64_t n_closer = 0;
};

struct Trial {
  double x = 0.0;
  bool closer = false;
};

struct TrialSet {
  std::vector<Bin> bins;

  std::int64_t total_trials() const;
  std::size_t distinct_levels() const;
};

/// Groups raw trials by exact stimulus level, ascending in x.
TrialSet bin_trials(std::span<const Trial> trials);

/// Throws InvalidInput on counts out of range.
void validate(const TrialSet& trials);

struct PsychometricFit {
  double slope = 0.0;
  double nll = 0.0;
  double bootstrap_sd = 0.0;
  int n_resamples = 0;
  bool converged = false;
  int iterations = 0;
};

double logistic_pc(const PsychometricModel& model, double x);

double neg_log_likelihood(const PsychometricModel& model, const TrialSet& trials);

/// Bounded 1-D search for the slope minimizing the negative log-likelihood,
/// starting from a slope of 20. Threshold, lapse and guess are held at the
/// values of `base`. Throws DegenerateData with fewer than two levels.
PsychometricFit fit_slope(const TrialSet& trials, const PsychometricModel& base = {});

/// fit_slope plus the spread of slopes refit on trials resampled with
/// replacement within each level. Resample i draws from its own stream
/// derived from (seed, i).
PsychometricFit bootstrap_fit(const TrialSet& trials, int n_resamples = 200, std::uint64_t seed = 0,
                              const PsychometricModel& base = {});

/// Draws synthetic responses from `model` with `n_per_level` trials per level.
TrialSet sample_trials(const PsychometricModel& model, std::span<const double> levels, std::int64_t n_per_level,
                       std::uint64_t seed);

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace hmdgeom::psychometrics
