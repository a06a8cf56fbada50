#include "hmdgeom/frames.hpp"

#include <cmath>
#include <string>

#include "hmdgeom/error.hpp"

namespace hmdgeom::frames {

namespace {

void require_positive_distance(double d, const char* what) {
  if (!(d > 0.0) || !std::isfinite(d)) {
    throw Error(ErrorCode::InvalidInput, std::string(what) + " must be a positive distance");
  }
}

}  // namespace

void validate(const EyeOffsetRecord& offsets) {
  for (double z : {offsets.actual_eye_z, offsets.simulated_eye_z}) {
    if (!std::isfinite(z) || std::abs(z) >= kMaxEyeOffset) {
      throw Error(ErrorCode::InvalidInput, "eye z offset outside +-0.1 m: " + std::to_string(z));
    }
  }
}

double hmd_to_egocentric(double distance_hmd, double actual_eye_z) {
  require_positive_distance(distance_hmd, "HMD distance");
  return distance_hmd - actual_eye_z;
}

double egocentric_to_simulated_world(double distance_ego, double simulated_eye_z) {
  require_positive_distance(distance_ego, "egocentric distance");
  return distance_ego + simulated_eye_z;
}

double interpret_blind_reach(const ReachSample& sample, const EyeOffsetRecord& offsets, bool bias_correct) {
  if (sample.condition != ReachCondition::Blind) {
    throw Error(ErrorCode::WrongCondition, "blind-reach interpretation given a sighted sample");
  }
  require_positive_distance(sample.measured_hmd, "measured reach");
  validate(offsets);
  const double corrected = bias_correct ? sample.measured_hmd - sample.baseline_bias : sample.measured_hmd;
  return egocentric_to_simulated_world(hmd_to_egocentric(corrected, offsets.actual_eye_z), offsets.simulated_eye_z);
}

double interpret_sighted_reach(const ReachSample& sample) {
  if (sample.condition != ReachCondition::Sighted) {
    throw Error(ErrorCode::WrongCondition, "sighted-reach interpretation given a blind sample");
  }
  require_positive_distance(sample.measured_hmd, "measured reach");
  return sample.measured_hmd;
}

}  // namespace hmdgeom::frames
