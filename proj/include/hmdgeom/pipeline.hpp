#pragma once

// Ray-level model of the two-quad reprojection pipeline used to simulate
// rendering and viewing errors on a headset that tracks the real eye:
//
//   1. render camera at CoP + render offset images the scene,
//   2. its frame buffer is laid on quad 1 at the virtual image plane,
//   3. a viewing camera at the simulated user CoP images quad 1,
//   4. that frame buffer is projected from the actual user CoP onto quad 2,
//   5. the headset camera at the actual eye shows quad 2 on the display.

#include <array>
#include <string>
#include <vector>

#include "hmdgeom/stereo.hpp"

namespace hmdgeom::pipeline {

struct PerEye {
  Point3 left;
  Point3 right;

  Point3 operator[](Eye eye) const { return eye == Eye::Left ? left : right; }
};

struct PipelineConfig {
  HmdGeometry hmd;
  PerEye render_offset;
  /// Simulated user CoP minus headset CoP.
  PerEye view_offset;
  /// Actual eye CoP in the HMD frame (the tracked entrance pupil).
  PerEye actual_eye;

  /// Offsets from an error spec with the actual eyes at the headset CoPs.
  static PipelineConfig from_errors(const HmdGeometry& hmd, const ErrorSpec& errors);
  static PipelineConfig from_errors(const HmdGeometry& hmd, const ErrorSpec& errors, const PerEye& actual_eye);
};

enum class Stage { RenderToQuad1 = 1, ViewQuad1 = 3, ProjectToQuad2 = 4, Triangulate = 5 };

class StageError : public Error {
 public:
  StageError(ErrorCode code, Stage stage, Eye eye, const std::string& message);

  Stage stage() const { return stage_; }
  Eye eye() const { return eye_; }

 private:
  Stage stage_;
  Eye eye_;
};

struct PipelineTrace {
  Point3 scene_point;
  Point3 quad1_point;
  /// Simulated CoP plus the unit viewing direction toward quad 1.
  Point3 simulated_view_sample;
  Point3 quad2_point;
  /// Binocular intersection of the rays the actual eyes see, HMD frame.
  Point3 final_point;
};

struct PipelineResult {
  /// Perceived point expressed relative to the simulated viewpoint, which
  /// is the frame of the closed-form model.
  PerceptionResult perception;
  PipelineTrace left;
  PipelineTrace right;
};

PipelineResult simulate_pipeline_point(const Point3& target, const PipelineConfig& config);

struct PointFailure {
  Point3 target;
  std::string stage;
  std::string message;
};

struct ConfigDeviation {
  std::string name;
  double max_deviation = 0.0;
  std::size_t points_checked = 0;
  std::vector<PointFailure> failures;
};

struct EquivalenceReport {
  double max_deviation = 0.0;
  std::vector<ConfigDeviation> configs;
  std::size_t failure_count() const;
};

struct NamedConfig {
  std::string name;
  PipelineConfig config;
  /// Closed-form counterpart.
  ErrorSpec errors;
};

/// Max |pipeline - closed form| over configs x targets. Points that fail in
/// either path are recorded and skipped.
EquivalenceReport equivalence_report(const std::vector<NamedConfig>& configs, const std::vector<Point3>& targets);

/// Passthrough +0.055 m, IPD-IAD -0.012 m and eye relief +0.03 m for a
/// viewer with the given IPD. The IPD-IAD headset has iad = ipd + delta.
std::vector<NamedConfig> canonical_configs(double vid, double ipd);

std::vector<Point3> target_grid(double x_min, double x_max, int nx, double z_min, double z_max, int nz);

}  // namespace hmdgeom::pipeline
