#include "hmdgeom/fieldgen.hpp"

#include <cmath>
#include <string>

namespace hmdgeom::fieldgen {

void FieldGrid::validate() const {
  if (nx < 2 || nz < 2) throw Error(ErrorCode::InvalidInput, "grid needs at least two samples per axis");
  if (!(x_max > x_min) || !(z_max > z_min)) throw Error(ErrorCode::InvalidInput, "grid ranges must be strictly ordered");
  if (!(z_min > 0.0)) throw Error(ErrorCode::InvalidInput, "grid z values must be positive");
  if (!std::isfinite(x_min) || !std::isfinite(x_max) || !std::isfinite(z_max) || !std::isfinite(y)) {
    throw Error(ErrorCode::InvalidInput, "grid bounds must be finite");
  }
}

Point3 FieldGrid::at(int ix, int iz) const {
  return {x_min + (x_max - x_min) * ix / (nx - 1), y, z_min + (z_max - z_min) * iz / (nz - 1)};
}

std::vector<Point3> FieldGrid::points() const {
  std::vector<Point3> pts;
  pts.reserve(size());
  for (int iz = 0; iz < nz; ++iz) {
    for (int ix = 0; ix < nx; ++ix) pts.push_back(at(ix, iz));
  }
  return pts;
}

DistortionField generate_field(const FieldGrid& grid, const HmdGeometry& hmd, const ErrorSpec& errors,
                               const ViewerGeometry& viewer) {
  grid.validate();
  DistortionField field;
  field.grid = grid;
  field.intended = grid.points();
  field.perceived = perceive_scene(field.intended, hmd, errors, viewer);
  return field;
}

std::string_view family_name(ErrorFamily family) {
  switch (family) {
    case ErrorFamily::None: return "none";
    case ErrorFamily::Passthrough: return "passthrough";
    case ErrorFamily::IpdIad: return "ipd-iad";
    case ErrorFamily::EyeRelief: return "eye-relief";
  }
  return "unknown";
}

ErrorFamily parse_family(std::string_view name) {
  for (ErrorFamily f : {ErrorFamily::None, ErrorFamily::Passthrough, ErrorFamily::IpdIad, ErrorFamily::EyeRelief}) {
    if (family_name(f) == name) return f;
  }
  throw Error(ErrorCode::InvalidInput, "unknown error family '" + std::string(name) + "'");
}

HmdGeometry headset_for(ErrorFamily family, double magnitude, const HmdGeometry& hmd, double viewer_ipd) {
  if (family == ErrorFamily::IpdIad) return HmdGeometry(viewer_ipd + magnitude, hmd.vid());
  return hmd;
}

namespace {

PerceptionResult perceive_on_axis(ErrorFamily family, double magnitude, double target, const HmdGeometry& hmd,
                                  double viewer_ipd, double parallax_offset) {
  const HmdGeometry headset = headset_for(family, magnitude, hmd, viewer_ipd);
  const ErrorSpec errors = make_error(family, magnitude);
  return perceive_point({0.0, 0.0, target}, headset, errors, seat_viewer(headset, errors, parallax_offset));
}

}  // namespace

PredictionTable predict_reach_bias(ErrorFamily family, const std::vector<double>& magnitudes, double target,
                                   const HmdGeometry& hmd, double viewer_ipd, double parallax_offset) {
  if (!(target > 0.0)) throw Error(ErrorCode::InvalidInput, "target distance must be positive");
  PredictionTable table;
  for (double m : magnitudes) {
    PredictionRow row;
    row.family = family;
    row.magnitude = m;
    row.target = target;
    try {
      const PerceptionResult r = perceive_on_axis(family, m, target, hmd, viewer_ipd, parallax_offset);
      row.status = r.status;
      row.perceived_ego = r.perceived_egocentric.z;
    } catch (const Error& err) {
      if (err.code() != ErrorCode::PointBehindCamera && err.code() != ErrorCode::FixationBehindEye) throw;
      row.status = PerceptionStatus::BehindCamera;
    }
    if (row.status != PerceptionStatus::Converged) row.perceived_ego = std::nan("");
    row.bias = row.perceived_ego - target;
    table.rows.push_back(row);
  }
  return table;
}

double trend_slope(const PredictionTable& table) {
  double n = 0.0;
  double mx = 0.0;
  double my = 0.0;
  for (const PredictionRow& r : table.rows) {
    if (r.status != PerceptionStatus::Converged) continue;
    n += 1.0;
    mx += r.magnitude;
    my += r.bias;
  }
  if (n < 2.0) throw Error(ErrorCode::DegenerateData, "trend needs two converged rows");
  mx /= n;
  my /= n;
  double sxy = 0.0;
  double sxx = 0.0;
  for (const PredictionRow& r : table.rows) {
    if (r.status != PerceptionStatus::Converged) continue;
    sxy += (r.magnitude - mx) * (r.bias - my);
    sxx += (r.magnitude - mx) * (r.magnitude - mx);
  }
  if (sxx == 0.0) throw Error(ErrorCode::DegenerateData, "trend needs two distinct magnitudes");
  return sxy / sxx;
}

double model_slope(ErrorFamily family, double target, const HmdGeometry& hmd, double viewer_ipd,
                   double parallax_offset, double step) {
  const PredictionTable t = predict_reach_bias(family, {-step, step}, target, hmd, viewer_ipd, parallax_offset);
  return trend_slope(t);
}

}  // namespace hmdgeom::fieldgen
