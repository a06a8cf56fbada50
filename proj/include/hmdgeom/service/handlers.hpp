#pragma once

// Request handlers shared by the command line and the HTTP service. Each
// takes a JSON request body and returns the JSON response body, so both
// front ends produce identical output for the same logical request.
//
// Common request keys (all lengths in meters):
//   family            none | passthrough | ipd-iad | eye-relief | custom
//   magnitude_m       error magnitude; defaults to the family preset
//   custom            {render_offset_left_m, render_offset_right_m,
//                      view_offset_left_m, view_offset_right_m} as [x,y,z]
//   vid_m, ipd_m      default 1.3 and 0.064
//   iad_m             default ipd_m (+ magnitude_m for ipd-iad)
//   parallax_offset_m default 0

#include <string>
#include <vector>

#include "json.hpp"

#include "hmdgeom/error.hpp"
#include "hmdgeom/fieldgen.hpp"
#include "hmdgeom/psychometrics.hpp"
#include "hmdgeom/stereo.hpp"

namespace hmdgeom::service {

using nlohmann::json;

inline constexpr double kMaxRenderOffset = 0.2;
inline constexpr double kMaxViewOffset = 0.1;
inline constexpr double kDefaultVid = 1.3;
inline constexpr double kDefaultIpd = 0.064;

/// Preset magnitudes: passthrough +0.055, ipd-iad -0.012, eye-relief +0.03.
double default_magnitude(ErrorFamily family);

struct Scenario {
  HmdGeometry hmd{kDefaultIpd, kDefaultVid};
  ErrorSpec errors = Custom{};
  double parallax_offset = 0.0;
  double ipd = kDefaultIpd;
};

/// Reads the common keys and enforces the offset sanity bounds.
Scenario parse_scenario(const json& request);

/// `{"intended":..,"perceived_hmd":..,"perceived_ego":..,"residual":..,"status":..}`.
/// Requires target_m ([x,y,z]) or target_z_m. Throws Diverged when the
/// viewing rays do not cross in front of the eyes.
json handle_predict(const json& request);

/// Distortion field JSON for the scenario over `grid` (defaults to the
/// 21 x 29 slice x in [-0.5, 0.5], z in [0.2, 3.0]).
json handle_field(const json& request);
fieldgen::DistortionField field_for(const json& request);

/// `{"bins":[..]}` or `{"trials":[{"error_m":..,"response":0|1}]}`, plus
/// optional n_resamples (200) and seed (0).
json handle_fit(const json& request);

/// Simulated observer. Requires seed; takes family, target_z_m, sigma_m
/// (0.02), levels_m and n_per_level (100). Responds with binned trials.
json handle_simulate(const json& request);

/// The raw responses behind handle_simulate, in level order.
std::vector<psychometrics::Trial> simulate_responses(const json& request);

/// Pipeline vs closed form over the canonical presets.
json handle_pipeline_check(const json& request);

/// Reach-bias table for on-axis targets with magnitudes_m and target_z_m.
json handle_reach_table(const json& request);
fieldgen::PredictionTable reach_table_for(const json& request);

json error_body(ErrorCode code, const std::string& message);

/// HTTP status for an error: 422 for geometric failures, 500 for I/O,
/// 400 for everything else.
int http_status(ErrorCode code);

}  // namespace hmdgeom::service
