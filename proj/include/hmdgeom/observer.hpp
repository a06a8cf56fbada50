#pragma once

// Simulated two-interval observer whose percepts come from the geometric
// model, plus the qualitative slope-pattern check across target distances.

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "hmdgeom/psychometrics.hpp"
#include "hmdgeom/stereo.hpp"

namespace hmdgeom::observer {

inline constexpr double kDefaultNoise = 0.02;

/// The reference interval shows the target without error on `hmd`, whose
/// IAD matches the viewer's IPD. The comparison interval adds the error
/// `family` at the trial's magnitude. For IPD-IAD comparisons the headset
/// IAD becomes hmd.iad() + magnitude while the viewer's IPD stays fixed.
struct ObserverConfig {
  HmdGeometry hmd{0.064, 1.3};
  double parallax_offset = 0.0;
  ErrorFamily family = ErrorFamily::Passthrough;
  double target_distance = 0.5;
  /// Internal noise added to each interval's perceived distance.
  double sigma = kDefaultNoise;
  std::uint64_t seed = 0;
};

/// Perceived egocentric distance of the on-axis target for one interval.
double perceived_distance(const ObserverConfig& config, double magnitude);

/// Raw responses in level order, n_per_level trials each. An answer is
/// "comparison closer" when comparison + noise < reference + noise; exact
/// ties (within 1e-9 m) are decided by a fair coin.
std::vector<psychometrics::Trial> simulate_2ifc_responses(const ObserverConfig& config,
                                                          std::span<const double> x_levels,
                                                          std::int64_t n_per_level);

psychometrics::TrialSet simulate_2ifc_trials(const ObserverConfig& config, std::span<const double> x_levels,
                                             std::int64_t n_per_level);

/// Probability of "comparison closer" as n grows without bound.
double analytic_closer_probability(const ObserverConfig& config, double magnitude);

enum class SlopeSign { Negative, Flat, Positive };

std::string_view to_string(SlopeSign sign);

using ConditionKey = std::pair<ErrorFamily, double>;

struct ConditionSlope {
  ErrorFamily family = ErrorFamily::Passthrough;
  double distance = 0.0;
  double slope = 0.0;
  SlopeSign sign = SlopeSign::Flat;
};

struct SlopeSummary {
  std::vector<ConditionSlope> conditions;
  /// Least-squares slope of the IPD psychometric slopes against distance.
  double ipd_trend = 0.0;
  bool ipd_monotone_decreasing = false;
  bool passthrough_all_positive = false;
  bool no_trend = false;
  std::vector<std::string> violations;

  bool matches_geometry() const { return violations.empty(); }
};

inline constexpr double kFlatSlope = 5.0;

/// Expects passthrough and IPD-IAD fits at 0.5, 1.3 and 2.5 m. The geometric
/// pattern is passthrough positive everywhere and IPD positive, flat,
/// negative with increasing distance. Slopes with |s| < flat_slope are flat.
/// Throws MissingCondition when a fit is absent.
SlopeSummary slope_sign_summary(const std::map<ConditionKey, psychometrics::PsychometricFit>& fits,
                                double flat_slope = kFlatSlope);

inline constexpr double kStudyDistances[] = {0.5, 1.3, 2.5};

}  // namespace hmdgeom::observer
