#pragma once

// Closed-form model of perceived position under rendering and viewing
// errors: scene points are projected through render cameras onto the
// virtual display plane, re-viewed from the actual eyes and triangulated.

#include <span>
#include <variant>
#include <vector>

#include "hmdgeom/error.hpp"
#include "hmdgeom/point3.hpp"

namespace hmdgeom {

inline constexpr double kGeometryTolerance = 1e-9;
inline constexpr double kDegeneracyTolerance = 1e-12;

enum class Eye { Left, Right };

/// Nominal headset: display CoPs at (-iad/2, 0, 0) and (+iad/2, 0, 0), one
/// virtual image plane at z = vid shared by both eyes.
class HmdGeometry {
 public:
  HmdGeometry(double iad, double vid);

  double iad() const { return iad_; }
  double vid() const { return vid_; }
  Point3 cop(Eye eye) const;

 private:
  double iad_;
  double vid_;
};

// Error configurations. Render offsets displace the render cameras from the
// display CoPs, view offsets displace the eyes.

/// Render cameras displaced by (0, 0, dz). dz > 0 puts them in front of the
/// CoPs, as with cameras on the front of a passthrough headset.
struct DirectPassthrough {
  double dz = 0.0;
};

/// delta = IAD - IPD. Eyes sit at +-(iad - delta)/2, split symmetrically.
struct IpdIad {
  double delta = 0.0;
};

/// Both eyes displaced by (0, 0, e); e > 0 is an eye in front of its CoP.
struct EyeRelief {
  double e = 0.0;
};

struct Custom {
  Point3 render_offset_left;
  Point3 render_offset_right;
  Point3 view_offset_left;
  Point3 view_offset_right;

  Point3 render_offset(Eye eye) const { return eye == Eye::Left ? render_offset_left : render_offset_right; }
  Point3 view_offset(Eye eye) const { return eye == Eye::Left ? view_offset_left : view_offset_right; }
};

using ErrorSpec = std::variant<DirectPassthrough, IpdIad, EyeRelief, Custom>;

/// Canonical error presets by family, used by the batch and observer tools.
enum class ErrorFamily { None, Passthrough, IpdIad, EyeRelief };

ErrorSpec make_error(ErrorFamily family, double magnitude);

/// Every variant reduces to per-eye offsets; IpdIad needs the headset to do so.
Custom to_custom(const ErrorSpec& errors, const HmdGeometry& hmd);

/// Actual eye placement inside the headset.
struct ViewerGeometry {
  double ipd = 0.0;
  Point3 left_eye;
  Point3 right_eye;
  /// Eye rotation center to entrance pupil distance; 0 disables ocular parallax.
  double parallax_offset = 0.0;

  Point3 eye(Eye e) const { return e == Eye::Left ? left_eye : right_eye; }
  Point3 cyclopean() const { return midpoint(left_eye, right_eye); }
};

/// Places the viewer's eyes at the display CoPs plus the view offsets of
/// `errors`.
ViewerGeometry seat_viewer(const HmdGeometry& hmd, const ErrorSpec& errors, double parallax_offset = 0.0);

enum class PerceptionStatus { Converged, Diverged, BehindCamera };

std::string_view to_string(PerceptionStatus status);

struct PerceptionResult {
  Point3 perceived_hmd;
  /// Relative to the cyclopean eye (midpoint of the actual eye CoPs).
  Point3 perceived_egocentric;
  double residual = 0.0;
  PerceptionStatus status = PerceptionStatus::Converged;

  bool converged() const { return status == PerceptionStatus::Converged; }
};

struct Triangulation {
  Point3 point;
  double residual = 0.0;
  PerceptionStatus status = PerceptionStatus::Converged;
};

/// Image of `target` on the display plane for a render camera at
/// cop(eye) + render_offset. The pixel direction seen from the camera is
/// laid out on the display from the nominal cop.
/// Throws PointBehindCamera when the target is not in front of the camera.
Point3 project_to_display(const Point3& target, Eye eye, const HmdGeometry& hmd, const Point3& render_offset);

/// Midpoint of the common perpendicular of two lines, each given by an origin
/// and a second point. Diverged when the lines are parallel or the closest
/// approach lies behind either origin. Throws DegenerateRay on zero-length
/// directions.
Triangulation triangulate(const Point3& ray_a_origin, const Point3& ray_a_through, const Point3& ray_b_origin,
                          const Point3& ray_b_through);

/// Eye CoPs displaced by parallax_offset toward `fixation` from their
/// rotation centers (the input eye positions).
ViewerGeometry apply_ocular_parallax(const ViewerGeometry& viewer, const Point3& fixation);

/// `viewer` must be seated consistently with `errors` (see seat_viewer);
/// InconsistentViewer otherwise. A non-zero parallax offset fixates the
/// target. Throws PointBehindCamera; divergence is reported in the status.
PerceptionResult perceive_point(const Point3& target, const HmdGeometry& hmd, const ErrorSpec& errors,
                                const ViewerGeometry& viewer);

PerceptionResult perceive_point(const Point3& target, const HmdGeometry& hmd, const ErrorSpec& errors);

/// Element-wise perceive_point. Failures are recorded per point.
std::vector<PerceptionResult> perceive_scene(std::span<const Point3> targets, const HmdGeometry& hmd,
                                             const ErrorSpec& errors, const ViewerGeometry& viewer);

}  // namespace hmdgeom
