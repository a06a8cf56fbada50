#include "hmdgeom/pipeline.hpp"

#include <algorithm>
#include <cmath>

namespace hmdgeom::pipeline {

namespace {

const char* stage_name(Stage stage) {
  switch (stage) {
    case Stage::RenderToQuad1: return "render_to_quad1";
    case Stage::ViewQuad1: return "view_quad1";
    case Stage::ProjectToQuad2: return "project_to_quad2";
    case Stage::Triangulate: return "triangulate";
  }
  return "unknown";
}

PerEye cops(const HmdGeometry& hmd) { return {hmd.cop(Eye::Left), hmd.cop(Eye::Right)}; }

struct MonocularChain {
  PipelineTrace trace;
  Point3 simulated_cop;
  Point3 actual_cop;
};

MonocularChain run_eye(const Point3& target, const PipelineConfig& config, Eye eye) {
  const HmdGeometry& hmd = config.hmd;
  MonocularChain chain;
  chain.trace.scene_point = target;

  // Steps 1-2.
  try {
    chain.trace.quad1_point = project_to_display(target, eye, hmd, config.render_offset[eye]);
  } catch (const Error& err) {
    throw StageError(err.code(), Stage::RenderToQuad1, eye, err.what());
  }

  // Step 3.
  chain.simulated_cop = hmd.cop(eye) + config.view_offset[eye];
  const Point3 view_dir = chain.trace.quad1_point - chain.simulated_cop;
  if (view_dir.z <= kGeometryTolerance) {
    throw StageError(ErrorCode::PointBehindCamera, Stage::ViewQuad1, eye, "quad 1 is not in front of the simulated CoP");
  }
  chain.trace.simulated_view_sample = chain.simulated_cop + view_dir / norm(view_dir);

  // Step 4.
  chain.actual_cop = config.actual_eye[eye];
  const double depth = hmd.vid() - chain.actual_cop.z;
  if (depth <= kGeometryTolerance) {
    throw StageError(ErrorCode::PointBehindCamera, Stage::ProjectToQuad2, eye, "quad 2 is not in front of the actual CoP");
  }
  chain.trace.quad2_point = chain.actual_cop + view_dir * (depth / view_dir.z);
  chain.trace.quad2_point.z = hmd.vid();
  return chain;
}

}  // namespace

StageError::StageError(ErrorCode code, Stage stage, Eye eye, const std::string& message)
    : Error(code, std::string(stage_name(stage)) + (eye == Eye::Left ? " (left): " : " (right): ") + message),
      stage_(stage),
      eye_(eye) {}

PipelineConfig PipelineConfig::from_errors(const HmdGeometry& hmd, const ErrorSpec& errors) {
  return from_errors(hmd, errors, cops(hmd));
}

PipelineConfig PipelineConfig::from_errors(const HmdGeometry& hmd, const ErrorSpec& errors, const PerEye& actual_eye) {
  const Custom offsets = to_custom(errors, hmd);
  return PipelineConfig{hmd,
                        {offsets.render_offset_left, offsets.render_offset_right},
                        {offsets.view_offset_left, offsets.view_offset_right},
                        actual_eye};
}

PipelineResult simulate_pipeline_point(const Point3& target, const PipelineConfig& config) {
  const MonocularChain left = run_eye(target, config, Eye::Left);
  const MonocularChain right = run_eye(target, config, Eye::Right);

  // Step 5: what the actual eyes see.
  Triangulation actual;
  Triangulation simulated;
  try {
    actual = triangulate(left.actual_cop, left.trace.quad2_point, right.actual_cop, right.trace.quad2_point);
    // The retinal images equal those at the simulated CoPs, so re-anchoring
    // each final ray there gives the point in the simulated viewpoint frame.
    simulated = triangulate(left.simulated_cop, left.trace.quad2_point + (left.simulated_cop - left.actual_cop),
                            right.simulated_cop, right.trace.quad2_point + (right.simulated_cop - right.actual_cop));
  } catch (const Error& err) {
    throw StageError(err.code(), Stage::Triangulate, Eye::Left, err.what());
  }

  PipelineResult result;
  result.left = left.trace;
  result.right = right.trace;
  result.left.final_point = result.right.final_point = actual.point;
  result.perception.perceived_hmd = simulated.point;
  result.perception.perceived_egocentric = simulated.point - midpoint(left.simulated_cop, right.simulated_cop);
  result.perception.residual = simulated.residual;
  result.perception.status = simulated.status;
  return result;
}

std::size_t EquivalenceReport::failure_count() const {
  std::size_t n = 0;
  for (const auto& c : configs) n += c.failures.size();
  return n;
}

EquivalenceReport equivalence_report(const std::vector<NamedConfig>& configs, const std::vector<Point3>& targets) {
  if (configs.empty() || targets.empty()) throw Error(ErrorCode::InvalidInput, "equivalence check needs configs and targets");
  EquivalenceReport report;
  for (const NamedConfig& named : configs) {
    ConfigDeviation dev;
    dev.name = named.name;
    const ViewerGeometry viewer = seat_viewer(named.config.hmd, named.errors);
    for (const Point3& target : targets) {
      try {
        const PipelineResult piped = simulate_pipeline_point(target, named.config);
        const PerceptionResult closed = perceive_point(target, named.config.hmd, named.errors, viewer);
        if (!piped.perception.converged() || !closed.converged()) {
          dev.failures.push_back({target, "triangulate", "diverged"});
          continue;
        }
        dev.max_deviation = std::max(dev.max_deviation, distance(piped.perception.perceived_hmd, closed.perceived_hmd));
        ++dev.points_checked;
      } catch (const StageError& err) {
        dev.failures.push_back({target, stage_name(err.stage()), err.what()});
      } catch (const Error& err) {
        dev.failures.push_back({target, "closed_form", err.what()});
      }
    }
    report.max_deviation = std::max(report.max_deviation, dev.max_deviation);
    report.configs.push_back(std::move(dev));
  }
  return report;
}

std::vector<NamedConfig> canonical_configs(double vid, double ipd) {
  constexpr double kIpdDelta = -0.012;
  const HmdGeometry matched(ipd, vid);
  const HmdGeometry mismatched(ipd + kIpdDelta, vid);
  std::vector<NamedConfig> out;
  const ErrorSpec passthrough = DirectPassthrough{0.055};
  const ErrorSpec ipd_iad = IpdIad{kIpdDelta};
  const ErrorSpec eye_relief = EyeRelief{0.03};
  out.push_back({"passthrough", PipelineConfig::from_errors(matched, passthrough), passthrough});
  out.push_back({"ipd-iad", PipelineConfig::from_errors(mismatched, ipd_iad), ipd_iad});
  out.push_back({"eye-relief", PipelineConfig::from_errors(matched, eye_relief), eye_relief});
  return out;
}

std::vector<Point3> target_grid(double x_min, double x_max, int nx, double z_min, double z_max, int nz) {
  if (nx < 2 || nz < 2 || !(x_max > x_min) || !(z_max > z_min)) {
    throw Error(ErrorCode::InvalidInput, "grid needs >= 2 samples per axis and ordered ranges");
  }
  std::vector<Point3> grid;
  grid.reserve(static_cast<std::size_t>(nx) * nz);
  for (int iz = 0; iz < nz; ++iz) {
    const double z = z_min + (z_max - z_min) * iz / (nz - 1);
    for (int ix = 0; ix < nx; ++ix) grid.push_back({x_min + (x_max - x_min) * ix / (nx - 1), 0.0, z});
  }
  return grid;
}

}  // namespace hmdgeom::pipeline
