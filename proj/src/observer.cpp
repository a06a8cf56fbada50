#include "hmdgeom/observer.hpp"

#include <cmath>
#include <random>

namespace hmdgeom::observer {

namespace {

constexpr double kTieTolerance = 1e-9;

std::string family_label(ErrorFamily family) {
  switch (family) {
    case ErrorFamily::None: return "none";
    case ErrorFamily::Passthrough: return "passthrough";
    case ErrorFamily::IpdIad: return "ipd-iad";
    case ErrorFamily::EyeRelief: return "eye-relief";
  }
  return "unknown";
}

SlopeSign classify(double slope, double flat) {
  if (slope > flat) return SlopeSign::Positive;
  if (slope < -flat) return SlopeSign::Negative;
  return SlopeSign::Flat;
}

const psychometrics::PsychometricFit& lookup(const std::map<ConditionKey, psychometrics::PsychometricFit>& fits,
                                             ErrorFamily family, double distance) {
  for (const auto& [key, fit] : fits) {
    if (key.first == family && std::abs(key.second - distance) < 1e-9) return fit;
  }
  throw Error(ErrorCode::MissingCondition,
              "no fit for " + family_label(family) + " at " + std::to_string(distance) + " m");
}

}  // namespace

std::string_view to_string(SlopeSign sign) {
  switch (sign) {
    case SlopeSign::Negative: return "negative";
    case SlopeSign::Flat: return "flat";
    case SlopeSign::Positive: return "positive";
  }
  return "unknown";
}

double perceived_distance(const ObserverConfig& config, double magnitude) {
  if (!(config.target_distance > 0.0)) throw Error(ErrorCode::InvalidInput, "target distance must be positive");
  const Point3 target{0.0, 0.0, config.target_distance};
  const double iad = config.family == ErrorFamily::IpdIad ? config.hmd.iad() + magnitude : config.hmd.iad();
  const HmdGeometry hmd(iad, config.hmd.vid());
  const ErrorSpec errors = make_error(config.family, magnitude);
  const PerceptionResult r = perceive_point(target, hmd, errors, seat_viewer(hmd, errors, config.parallax_offset));
  if (!r.converged()) throw Error(ErrorCode::Diverged, "perceived point diverged at magnitude " + std::to_string(magnitude));
  return norm(r.perceived_egocentric);
}

std::vector<psychometrics::Trial> simulate_2ifc_responses(const ObserverConfig& config,
                                                          std::span<const double> x_levels,
                                                          std::int64_t n_per_level) {
  if (!(config.sigma >= 0.0)) throw Error(ErrorCode::InvalidInput, "observer noise must be >= 0");
  if (n_per_level < 1) throw Error(ErrorCode::InvalidInput, "need at least one trial per level");
  if (x_levels.empty()) throw Error(ErrorCode::InvalidInput, "need at least one error level");

  std::mt19937_64 rng(psychometrics::derive_seed(config.seed, 0));
  std::normal_distribution<double> noise(0.0, 1.0);
  const double reference = perceived_distance(config, 0.0);

  std::vector<psychometrics::Trial> trials;
  trials.reserve(x_levels.size() * static_cast<std::size_t>(n_per_level));
  for (double x : x_levels) {
    const double comparison = perceived_distance(config, x);
    for (std::int64_t i = 0; i < n_per_level; ++i) {
      double comp = comparison;
      double ref = reference;
      if (config.sigma > 0.0) {
        comp += config.sigma * noise(rng);
        ref += config.sigma * noise(rng);
      }
      bool closer = comp < ref;
      if (std::abs(comp - ref) <= kTieTolerance) closer = (rng() >> 63) != 0;
      trials.push_back({x, closer});
    }
  }
  return trials;
}

psychometrics::TrialSet simulate_2ifc_trials(const ObserverConfig& config, std::span<const double> x_levels,
                                             std::int64_t n_per_level) {
  const auto responses = simulate_2ifc_responses(config, x_levels, n_per_level);
  return psychometrics::bin_trials(responses);
}

double analytic_closer_probability(const ObserverConfig& config, double magnitude) {
  const double diff = perceived_distance(config, 0.0) - perceived_distance(config, magnitude);
  if (config.sigma == 0.0) {
    if (std::abs(diff) <= kTieTolerance) return 0.5;
    return diff > 0 ? 1.0 : 0.0;
  }
  // P(comp + e1 < ref + e2) with e1 - e2 ~ N(0, 2 sigma^2).
  return 0.5 * std::erfc(-diff / (config.sigma * std::sqrt(2.0) * std::sqrt(2.0)));
}

SlopeSummary slope_sign_summary(const std::map<ConditionKey, psychometrics::PsychometricFit>& fits,
                                double flat_slope) {
  SlopeSummary summary;
  for (ErrorFamily family : {ErrorFamily::Passthrough, ErrorFamily::IpdIad}) {
    for (double d : kStudyDistances) {
      const double s = lookup(fits, family, d).slope;
      summary.conditions.push_back({family, d, s, classify(s, flat_slope)});
    }
  }

  summary.passthrough_all_positive = true;
  std::vector<double> ipd;
  bool all_flat = true;
  for (const ConditionSlope& c : summary.conditions) {
    if (c.sign != SlopeSign::Flat) all_flat = false;
    if (c.family == ErrorFamily::Passthrough && c.sign != SlopeSign::Positive) {
      summary.passthrough_all_positive = false;
      summary.violations.push_back("passthrough slope at " + std::to_string(c.distance) + " m is " +
                                   std::string(to_string(c.sign)));
    }
    if (c.family == ErrorFamily::IpdIad) ipd.push_back(c.slope);
  }
  summary.no_trend = all_flat;
  if (all_flat) summary.violations.push_back("no trend");

  const SlopeSign expected_ipd[] = {SlopeSign::Positive, SlopeSign::Flat, SlopeSign::Negative};
  for (std::size_t i = 0; i < 3; ++i) {
    const ConditionSlope& c = summary.conditions[3 + i];
    if (c.sign != expected_ipd[i]) {
      summary.violations.push_back("ipd-iad slope at " + std::to_string(c.distance) + " m is " +
                                   std::string(to_string(c.sign)) + ", expected " +
                                   std::string(to_string(expected_ipd[i])));
    }
  }
  summary.ipd_monotone_decreasing = ipd[0] > ipd[1] && ipd[1] > ipd[2];
  if (!summary.ipd_monotone_decreasing) summary.violations.push_back("ipd-iad slopes do not decline with distance");

  double mean_d = 0.0;
  double mean_s = 0.0;
  for (std::size_t i = 0; i < 3; ++i) {
    mean_d += kStudyDistances[i] / 3.0;
    mean_s += ipd[i] / 3.0;
  }
  double sxy = 0.0;
  double sxx = 0.0;
  for (std::size_t i = 0; i < 3; ++i) {
    sxy += (kStudyDistances[i] - mean_d) * (ipd[i] - mean_s);
    sxx += (kStudyDistances[i] - mean_d) * (kStudyDistances[i] - mean_d);
  }
  summary.ipd_trend = sxy / sxx;
  return summary;
}

}  // namespace hmdgeom::observer
