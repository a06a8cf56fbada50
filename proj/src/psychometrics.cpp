#include "hmdgeom/psychometrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <string>

#include "hmdgeom/error.hpp"

namespace hmdgeom::psychometrics {

namespace {

constexpr double kBracketTolerance = 1e-4;
constexpr int kMaxIterations = 500;
constexpr double kGolden = 1.6180339887498949;
constexpr double kInvGolden = 0.6180339887498949;

double clamp_slope(double s) { return std::clamp(s, kSlopeLowerBound, kSlopeUpperBound); }

}  // namespace

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  // splitmix64 finalizer over the combined key.
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

void validate(const PsychometricModel& model) {
  if (!(model.lapse >= 0.0 && model.lapse <= 0.05)) throw Error(ErrorCode::InvalidInput, "lapse must be in [0, 0.05]");
  if (!(model.guess >= 0.0 && model.guess <= 0.5)) throw Error(ErrorCode::InvalidInput, "guess must be in [0, 0.5]");
  if (!(model.slope >= kSlopeLowerBound && model.slope <= kSlopeUpperBound)) {
    throw Error(ErrorCode::InvalidInput, "slope must be in [-2000, 2000]");
  }
  if (!std::isfinite(model.threshold)) throw Error(ErrorCode::InvalidInput, "threshold must be finite");
}

std::int64_t TrialSet::total_trials() const {
  std::int64_t n = 0;
  for (const Bin& b : bins) n += b.n_total;
  return n;
}

std::size_t TrialSet::distinct_levels() const {
  std::vector<double> xs;
  for (const Bin& b : bins) {
    if (b.n_total > 0) xs.push_back(b.x);
  }
  std::sort(xs.begin(), xs.end());
  return static_cast<std::size_t>(std::unique(xs.begin(), xs.end()) - xs.begin());
}

TrialSet bin_trials(std::span<const Trial> trials) {
  std::map<double, Bin> by_level;
  for (const Trial& t : trials) {
    if (!std::isfinite(t.x)) throw Error(ErrorCode::InvalidInput, "stimulus level must be finite");
    Bin& b = by_level[t.x];
    b.x = t.x;
    ++b.n_total;
    if (t.closer) ++b.n_closer;
  }
  TrialSet set;
  for (auto& [x, bin] : by_level) set.bins.push_back(bin);
  return set;
}

void validate(const TrialSet& trials) {
  for (const Bin& b : trials.bins) {
    if (!std::isfinite(b.x)) throw Error(ErrorCode::InvalidInput, "stimulus level must be finite");
    if (b.n_total < 0 || b.n_closer < 0 || b.n_closer > b.n_total) {
      throw Error(ErrorCode::InvalidInput, "bin counts must satisfy 0 <= n_closer <= n_total");
    }
  }
}

double logistic_pc(const PsychometricModel& model, double x) {
  const double arg = std::clamp(-model.slope * (x - model.threshold), -kExponentClamp, kExponentClamp);
  return model.guess + (1.0 - model.lapse - model.guess) / (1.0 + std::exp(arg));
}

double neg_log_likelihood(const PsychometricModel& model, const TrialSet& trials) {
  double nll = 0.0;
  for (const Bin& b : trials.bins) {
    if (b.n_total == 0) continue;
    const double p = logistic_pc(model, b.x);
    const auto closer = static_cast<double>(b.n_closer);
    const auto other = static_cast<double>(b.n_total - b.n_closer);
    if (closer > 0) nll -= closer * std::log(p);
    if (other > 0) nll -= other * std::log1p(-p);
  }
  return nll;
}

PsychometricFit fit_slope(const TrialSet& trials, const PsychometricModel& base) {
  validate(trials);
  if (trials.total_trials() < 1) throw Error(ErrorCode::DegenerateData, "no trials to fit");
  if (trials.distinct_levels() < 2) {
    throw Error(ErrorCode::DegenerateData, "slope fitting needs at least two distinct stimulus levels");
  }

  PsychometricModel model = base;
  auto objective = [&](double s) {
    model.slope = s;
    return neg_log_likelihood(model, trials);
  };

  // Walk downhill from the start with growing steps until the objective
  // turns up or the walk reaches a bound; [lo, hi] then brackets a minimum.
  double lo = 0.0;
  double hi = 0.0;
  double step = 1.0;
  double prev = kSlopeStart;
  const double f_start = objective(prev);
  double cur = clamp_slope(prev + step);
  double f_cur = objective(cur);
  bool bracketed = false;
  if (f_cur > f_start) {
    step = -step;
    cur = clamp_slope(prev + step);
    f_cur = objective(cur);
    if (f_cur >= f_start) {
      lo = kSlopeStart - 1.0;
      hi = kSlopeStart + 1.0;
      bracketed = true;
    }
  }
  while (!bracketed) {
    const double bound = step > 0 ? kSlopeUpperBound : kSlopeLowerBound;
    if (cur == bound) {
      lo = std::min(prev, cur);
      hi = std::max(prev, cur);
      break;
    }
    const double next = clamp_slope(cur + (cur - prev) * kGolden);
    const double f_next = objective(next);
    if (f_next > f_cur) {
      lo = std::min(prev, next);
      hi = std::max(prev, next);
      break;
    }
    prev = cur;
    cur = next;
    f_cur = f_next;
  }

  // Golden-section refinement on [lo, hi].
  int iterations = 0;
  double c = hi - kInvGolden * (hi - lo);
  double d = lo + kInvGolden * (hi - lo);
  double fc = objective(c);
  double fd = objective(d);
  while (hi - lo >= kBracketTolerance && iterations < kMaxIterations) {
    if (fc <= fd) {
      hi = d;
      d = c;
      fd = fc;
      c = hi - kInvGolden * (hi - lo);
      fc = objective(c);
    } else {
      lo = c;
      c = d;
      fc = fd;
      d = lo + kInvGolden * (hi - lo);
      fd = objective(d);
    }
    ++iterations;
  }

  PsychometricFit fit;
  fit.slope = clamp_slope(0.5 * (lo + hi));
  fit.nll = objective(fit.slope);
  fit.converged = hi - lo < kBracketTolerance;
  fit.iterations = iterations;
  return fit;
}

PsychometricFit bootstrap_fit(const TrialSet& trials, int n_resamples, std::uint64_t seed,
                              const PsychometricModel& base) {
  if (n_resamples < 1) throw Error(ErrorCode::InvalidInput, "bootstrap needs at least one resample");
  PsychometricFit fit = fit_slope(trials, base);

  std::vector<double> slopes(static_cast<std::size_t>(n_resamples));
  for (int i = 0; i < n_resamples; ++i) {
    std::mt19937_64 rng(derive_seed(seed, static_cast<std::uint64_t>(i)));
    TrialSet resampled = trials;
    // Drawing n_total trials with replacement from a level's responses
    // yields a Binomial(n_total, n_closer / n_total) count of "closer".
    for (Bin& b : resampled.bins) {
      if (b.n_total == 0 || b.n_closer == 0 || b.n_closer == b.n_total) continue;
      std::binomial_distribution<std::int64_t> draw(b.n_total, static_cast<double>(b.n_closer) / b.n_total);
      b.n_closer = draw(rng);
    }
    slopes[static_cast<std::size_t>(i)] = fit_slope(resampled, base).slope;
  }

  double mean = 0.0;
  for (double s : slopes) mean += s;
  mean /= n_resamples;
  double ss = 0.0;
  for (double s : slopes) ss += (s - mean) * (s - mean);
  fit.bootstrap_sd = std::sqrt(ss / n_resamples);
  fit.n_resamples = n_resamples;
  return fit;
}

TrialSet sample_trials(const PsychometricModel& model, std::span<const double> levels, std::int64_t n_per_level,
                       std::uint64_t seed) {
  validate(model);
  if (n_per_level < 1) throw Error(ErrorCode::InvalidInput, "need at least one trial per level");
  std::mt19937_64 rng(derive_seed(seed, 0));
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  TrialSet set;
  for (double x : levels) {
    const double p = logistic_pc(model, x);
    Bin b{x, n_per_level, 0};
    for (std::int64_t i = 0; i < n_per_level; ++i) {
      if (uniform(rng) < p) ++b.n_closer;
    }
    set.bins.push_back(b);
  }
  return set;
}

}  // namespace hmdgeom::psychometrics
