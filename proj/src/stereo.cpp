#include "hmdgeom/stereo.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace hmdgeom {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidInput: return "InvalidInput";
    case ErrorCode::PointBehindCamera: return "PointBehindCamera";
    case ErrorCode::DegenerateRay: return "DegenerateRay";
    case ErrorCode::Diverged: return "Diverged";
    case ErrorCode::FixationBehindEye: return "FixationBehindEye";
    case ErrorCode::InconsistentViewer: return "InconsistentViewer";
    case ErrorCode::WrongCondition: return "WrongCondition";
    case ErrorCode::DegenerateData: return "DegenerateData";
    case ErrorCode::MissingCondition: return "MissingCondition";
    case ErrorCode::IoFailure: return "IoFailure";
  }
  return "Unknown";
}

std::string_view to_string(PerceptionStatus status) {
  switch (status) {
    case PerceptionStatus::Converged: return "converged";
    case PerceptionStatus::Diverged: return "diverged";
    case PerceptionStatus::BehindCamera: return "behind_camera";
  }
  return "unknown";
}

HmdGeometry::HmdGeometry(double iad, double vid) : iad_(iad), vid_(vid) {
  if (!(iad > 0.0) || !std::isfinite(iad)) {
    throw Error(ErrorCode::InvalidInput, "iad must be positive, got " + std::to_string(iad));
  }
  if (!(vid > 0.0) || !std::isfinite(vid)) {
    throw Error(ErrorCode::InvalidInput, "vid must be positive, got " + std::to_string(vid));
  }
}

Point3 HmdGeometry::cop(Eye eye) const {
  const double half = 0.5 * iad_;
  return {eye == Eye::Left ? -half : half, 0.0, 0.0};
}

ErrorSpec make_error(ErrorFamily family, double magnitude) {
  switch (family) {
    case ErrorFamily::None: return Custom{};
    case ErrorFamily::Passthrough: return DirectPassthrough{magnitude};
    case ErrorFamily::IpdIad: return IpdIad{magnitude};
    case ErrorFamily::EyeRelief: return EyeRelief{magnitude};
  }
  return Custom{};
}

namespace {

struct OffsetVisitor {
  const HmdGeometry& hmd;

  Custom operator()(const DirectPassthrough& e) const {
    Custom c;
    c.render_offset_left = c.render_offset_right = {0.0, 0.0, e.dz};
    return c;
  }
  Custom operator()(const IpdIad& e) const {
    // Eyes at +-(iad - delta)/2 relative to CoPs at +-iad/2.
    Custom c;
    c.view_offset_left = {0.5 * e.delta, 0.0, 0.0};
    c.view_offset_right = {-0.5 * e.delta, 0.0, 0.0};
    if (!(hmd.iad() - e.delta > 0.0)) {
      throw Error(ErrorCode::InvalidInput, "IPD-IAD delta leaves a non-positive IPD");
    }
    return c;
  }
  Custom operator()(const EyeRelief& e) const {
    Custom c;
    c.view_offset_left = c.view_offset_right = {0.0, 0.0, e.e};
    return c;
  }
  Custom operator()(const Custom& c) const { return c; }
};

void require_finite(const Point3& p, const char* what) {
  if (!is_finite(p)) throw Error(ErrorCode::InvalidInput, std::string(what) + " must be finite");
}

Point3 quiet_nan_point() {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  return {nan, nan, nan};
}

}  // namespace

Custom to_custom(const ErrorSpec& errors, const HmdGeometry& hmd) {
  Custom c = std::visit(OffsetVisitor{hmd}, errors);
  require_finite(c.render_offset_left, "render offset");
  require_finite(c.render_offset_right, "render offset");
  require_finite(c.view_offset_left, "view offset");
  require_finite(c.view_offset_right, "view offset");
  return c;
}

ViewerGeometry seat_viewer(const HmdGeometry& hmd, const ErrorSpec& errors, double parallax_offset) {
  if (!(parallax_offset >= 0.0) || !std::isfinite(parallax_offset)) {
    throw Error(ErrorCode::InvalidInput, "parallax offset must be >= 0");
  }
  const Custom offsets = to_custom(errors, hmd);
  ViewerGeometry viewer;
  viewer.left_eye = hmd.cop(Eye::Left) + offsets.view_offset_left;
  viewer.right_eye = hmd.cop(Eye::Right) + offsets.view_offset_right;
  viewer.ipd = distance(viewer.left_eye, viewer.right_eye);
  viewer.parallax_offset = parallax_offset;
  if (!(viewer.ipd > 0.0)) throw Error(ErrorCode::InvalidInput, "eyes coincide");
  return viewer;
}

Point3 project_to_display(const Point3& target, Eye eye, const HmdGeometry& hmd, const Point3& render_offset) {
  require_finite(target, "target");
  const Point3 cop = hmd.cop(eye);
  const Point3 camera = cop + render_offset;
  const Point3 ray = target - camera;
  if (ray.z <= kGeometryTolerance) {
    throw Error(ErrorCode::PointBehindCamera, "target is not in front of the render camera");
  }
  Point3 q = cop + ray * (hmd.vid() / ray.z);
  q.z = cop.z + hmd.vid();
  return q;
}

Triangulation triangulate(const Point3& ray_a_origin, const Point3& ray_a_through, const Point3& ray_b_origin,
                          const Point3& ray_b_through) {
  Point3 u = ray_a_through - ray_a_origin;
  Point3 v = ray_b_through - ray_b_origin;
  const double u_len = norm(u);
  const double v_len = norm(v);
  if (!(u_len > kDegeneracyTolerance) || !(v_len > kDegeneracyTolerance)) {
    throw Error(ErrorCode::DegenerateRay, "ray direction has zero length");
  }
  u = u / u_len;
  v = v / v_len;

  // |u x v|^2 equals 1 - (u.v)^2 without the cancellation.
  const Point3 n = cross(u, v);
  const double denom = dot(n, n);
  if (std::sqrt(denom) < kDegeneracyTolerance) {
    return {quiet_nan_point(), std::numeric_limits<double>::infinity(), PerceptionStatus::Diverged};
  }

  const Point3 w0 = ray_a_origin - ray_b_origin;
  const double b = dot(u, v);
  const double d = dot(u, w0);
  const double e = dot(v, w0);
  const double s = (b * e - d) / denom;
  const double t = (e - b * d) / denom;

  const Point3 on_a = ray_a_origin + u * s;
  const Point3 on_b = ray_b_origin + v * t;
  Triangulation result{midpoint(on_a, on_b), std::abs(dot(w0, n)) / std::sqrt(denom), PerceptionStatus::Converged};
  if (s < -kDegeneracyTolerance || t < -kDegeneracyTolerance) result.status = PerceptionStatus::Diverged;
  return result;
}

ViewerGeometry apply_ocular_parallax(const ViewerGeometry& viewer, const Point3& fixation) {
  if (!(viewer.parallax_offset >= 0.0)) throw Error(ErrorCode::InvalidInput, "parallax offset must be >= 0");
  if (viewer.parallax_offset == 0.0) return viewer;
  require_finite(fixation, "fixation");
  ViewerGeometry out = viewer;
  for (Point3* eye : {&out.left_eye, &out.right_eye}) {
    const Point3 gaze = fixation - *eye;
    if (gaze.z <= kGeometryTolerance) {
      throw Error(ErrorCode::FixationBehindEye, "fixation point is not in front of the eye");
    }
    *eye += gaze * (viewer.parallax_offset / norm(gaze));
  }
  return out;
}

PerceptionResult perceive_point(const Point3& target, const HmdGeometry& hmd, const ErrorSpec& errors,
                                const ViewerGeometry& viewer) {
  const Custom offsets = to_custom(errors, hmd);
  for (Eye eye : {Eye::Left, Eye::Right}) {
    if (distance(viewer.eye(eye), hmd.cop(eye) + offsets.view_offset(eye)) > kGeometryTolerance) {
      throw Error(ErrorCode::InconsistentViewer, "viewer eyes do not match the view offsets of the error spec");
    }
  }

  const Point3 q_left = project_to_display(target, Eye::Left, hmd, offsets.render_offset_left);
  const Point3 q_right = project_to_display(target, Eye::Right, hmd, offsets.render_offset_right);
  const ViewerGeometry eyes = apply_ocular_parallax(viewer, target);

  const Triangulation tri = triangulate(eyes.left_eye, q_left, eyes.right_eye, q_right);
  PerceptionResult result;
  result.perceived_hmd = tri.point;
  result.perceived_egocentric = tri.point - eyes.cyclopean();
  result.residual = tri.residual;
  result.status = tri.status;
  return result;
}

PerceptionResult perceive_point(const Point3& target, const HmdGeometry& hmd, const ErrorSpec& errors) {
  return perceive_point(target, hmd, errors, seat_viewer(hmd, errors));
}

std::vector<PerceptionResult> perceive_scene(std::span<const Point3> targets, const HmdGeometry& hmd,
                                             const ErrorSpec& errors, const ViewerGeometry& viewer) {
  if (targets.empty()) throw Error(ErrorCode::InvalidInput, "scene has no targets");
  std::vector<PerceptionResult> results;
  results.reserve(targets.size());
  for (const Point3& target : targets) {
    try {
      results.push_back(perceive_point(target, hmd, errors, viewer));
    } catch (const Error& err) {
      if (err.code() != ErrorCode::PointBehindCamera && err.code() != ErrorCode::FixationBehindEye) throw;
      PerceptionResult failed;
      failed.perceived_hmd = failed.perceived_egocentric = quiet_nan_point();
      failed.residual = std::numeric_limits<double>::quiet_NaN();
      failed.status = PerceptionStatus::BehindCamera;
      results.push_back(failed);
    }
  }
  return results;
}

}  // namespace hmdgeom
