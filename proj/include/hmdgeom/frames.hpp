#pragma once

// Reach-distance bookkeeping between the HMD frame, the viewer's egocentric
// frame and the frame of the simulated viewpoint. Distances are measured
// along the cyclopean z axis.

#include "hmdgeom/point3.hpp"

namespace hmdgeom::frames {

/// z of the cyclopean eye in the HMD frame, actual and simulated. Negative
/// values are behind the CoP plane.
struct EyeOffsetRecord {
  double actual_eye_z = 0.0;
  double simulated_eye_z = 0.0;
};

enum class ReachCondition { Blind, Sighted };

struct ReachSample {
  double measured_hmd = 0.0;
  /// No-error blind reach minus target; hypometric reaching is negative.
  double baseline_bias = 0.0;
  ReachCondition condition = ReachCondition::Blind;
};

inline constexpr double kMaxEyeOffset = 0.1;

void validate(const EyeOffsetRecord& offsets);

double hmd_to_egocentric(double distance_hmd, double actual_eye_z);

double egocentric_to_simulated_world(double distance_ego, double simulated_eye_z);

/// measured -> optional bias correction -> egocentric -> simulated viewpoint.
/// Throws WrongCondition for sighted samples.
double interpret_blind_reach(const ReachSample& sample, const EyeOffsetRecord& offsets, bool bias_correct);

/// Sighted reaches are closed-loop and already in HMD coordinates.
double interpret_sighted_reach(const ReachSample& sample);

inline Point3 to_egocentric(const Point3& p_hmd, const Point3& cyclopean_eye) { return p_hmd - cyclopean_eye; }
inline Point3 to_hmd(const Point3& p_ego, const Point3& cyclopean_eye) { return p_ego + cyclopean_eye; }

}  // namespace hmdgeom::frames
