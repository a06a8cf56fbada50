#pragma once

// Batch predictions: distortion fields over an x-z slice and reach-bias
// tables for on-axis targets.

#include <string>
#include <vector>

#include "hmdgeom/stereo.hpp"

namespace hmdgeom::fieldgen {

struct FieldGrid {
  double x_min = -0.5;
  double x_max = 0.5;
  int nx = 21;
  double z_min = 0.2;
  double z_max = 3.0;
  int nz = 29;
  double y = 0.0;

  void validate() const;
  std::size_t size() const { return static_cast<std::size_t>(nx) * static_cast<std::size_t>(nz); }
  /// Row-major: z rows, x varying fastest.
  Point3 at(int ix, int iz) const;
  std::vector<Point3> points() const;
};

struct DistortionField {
  FieldGrid grid;
  std::vector<Point3> intended;
  std::vector<PerceptionResult> perceived;
};

DistortionField generate_field(const FieldGrid& grid, const HmdGeometry& hmd, const ErrorSpec& errors,
                               const ViewerGeometry& viewer);

std::string_view family_name(ErrorFamily family);
/// Throws InvalidInput for unknown names.
ErrorFamily parse_family(std::string_view name);

struct PredictionRow {
  ErrorFamily family = ErrorFamily::None;
  double magnitude = 0.0;
  double target = 0.0;
  double perceived_ego = 0.0;
  double bias = 0.0;
  PerceptionStatus status = PerceptionStatus::Converged;
};

struct PredictionTable {
  std::vector<PredictionRow> rows;
};

/// Headset used for a given error: the IPD-IAD family widens the IAD to
/// viewer IPD + magnitude, every other family keeps `hmd`.
HmdGeometry headset_for(ErrorFamily family, double magnitude, const HmdGeometry& hmd, double viewer_ipd);

/// Perceived egocentric distance of the on-axis target minus the target for
/// each magnitude. `viewer_ipd` and `parallax_offset` describe the person.
PredictionTable predict_reach_bias(ErrorFamily family, const std::vector<double>& magnitudes, double target,
                                   const HmdGeometry& hmd, double viewer_ipd, double parallax_offset = 0.0);

/// Least-squares slope of bias against magnitude over converged rows.
double trend_slope(const PredictionTable& table);

/// d(bias)/d(magnitude) at zero error by central differences.
double model_slope(ErrorFamily family, double target, const HmdGeometry& hmd, double viewer_ipd,
                   double parallax_offset = 0.0, double step = 1e-5);

}  // namespace hmdgeom::fieldgen
