#include "hmdgeom/service/handlers.hpp"

#include <cmath>
#include <string>
#include <vector>

#include "hmdgeom/export.hpp"
#include "hmdgeom/fieldgen.hpp"
#include "hmdgeom/observer.hpp"
#include "hmdgeom/pipeline.hpp"
#include "hmdgeom/psychometrics.hpp"

namespace hmdgeom::service {

namespace {

[[noreturn]] void invalid(const std::string& message) { throw Error(ErrorCode::InvalidInput, message); }

void require_object(const json& request) {
  if (!request.is_object()) invalid("request body must be a JSON object");
}

double number_or(const json& request, const char* key, double fallback) {
  if (!request.contains(key) || request[key].is_null()) return fallback;
  if (!request[key].is_number()) invalid(std::string(key) + " must be a number");
  const double v = request[key].get<double>();
  if (!std::isfinite(v)) invalid(std::string(key) + " must be finite");
  return v;
}

double required_number(const json& request, const char* key) {
  if (!request.contains(key)) invalid(std::string("missing ") + key);
  return number_or(request, key, 0.0);
}

Point3 point_from(const json& v, const std::string& key) {
  if (!v.is_array() || v.size() != 3 || !v[0].is_number() || !v[1].is_number() || !v[2].is_number()) {
    invalid(key + " must be an [x, y, z] array of numbers");
  }
  const Point3 p{v[0].get<double>(), v[1].get<double>(), v[2].get<double>()};
  if (!is_finite(p)) invalid(key + " must be finite");
  return p;
}

std::vector<double> number_list(const json& v, const char* key) {
  if (!v.is_array() || v.empty()) invalid(std::string(key) + " must be a non-empty array of numbers");
  std::vector<double> out;
  for (const json& e : v) {
    if (!e.is_number()) invalid(std::string(key) + " must contain only numbers");
    out.push_back(e.get<double>());
  }
  return out;
}

std::uint64_t seed_of(const json& request, bool required) {
  if (!request.contains("seed")) {
    if (required) invalid("missing seed; simulation requests must be explicitly seeded");
    return 0;
  }
  const json& seed = request["seed"];
  if (seed.is_number_unsigned()) return seed.get<std::uint64_t>();
  if (!seed.is_number_integer() || seed.get<std::int64_t>() < 0) invalid("seed must be a non-negative integer");
  return static_cast<std::uint64_t>(seed.get<std::int64_t>());
}

ErrorFamily family_of(const json& request, bool* is_custom = nullptr) {
  std::string name = "none";
  if (request.contains("family")) {
    if (!request["family"].is_string()) invalid("family must be a string");
    name = request["family"].get<std::string>();
  }
  if (is_custom) *is_custom = name == "custom";
  if (name == "custom") return ErrorFamily::None;
  return fieldgen::parse_family(name);
}

void check_bounds(const Custom& c) {
  for (const Point3& r : {c.render_offset_left, c.render_offset_right}) {
    if (norm(r) > kMaxRenderOffset) invalid("render offset exceeds 0.2 m");
  }
  for (const Point3& v : {c.view_offset_left, c.view_offset_right}) {
    if (norm(v) > kMaxViewOffset) invalid("view offset exceeds 0.1 m");
  }
}

json respond_perception(const Point3& target, const PerceptionResult& r) {
  if (r.status == PerceptionStatus::Diverged) {
    throw Error(ErrorCode::Diverged, "viewing rays do not cross in front of the eyes");
  }
  return io::perception_json(target, r);
}

std::vector<double> default_levels(ErrorFamily family) {
  const double m = std::abs(default_magnitude(family));
  return {-m, -0.5 * m, 0.0, 0.5 * m, m};
}

}  // namespace

double default_magnitude(ErrorFamily family) {
  switch (family) {
    case ErrorFamily::None: return 0.0;
    case ErrorFamily::Passthrough: return 0.055;
    case ErrorFamily::IpdIad: return -0.012;
    case ErrorFamily::EyeRelief: return 0.03;
  }
  return 0.0;
}

Scenario parse_scenario(const json& request) {
  require_object(request);
  Scenario s;
  bool is_custom = false;
  const ErrorFamily family = family_of(request, &is_custom);
  const double vid = number_or(request, "vid_m", kDefaultVid);
  s.ipd = number_or(request, "ipd_m", kDefaultIpd);
  s.parallax_offset = number_or(request, "parallax_offset_m", 0.0);
  if (!(s.ipd > 0.0)) invalid("ipd_m must be positive");
  if (s.parallax_offset < 0.0 || s.parallax_offset > kMaxViewOffset) invalid("parallax_offset_m must be in [0, 0.1]");

  if (is_custom) {
    if (!request.contains("custom") || !request["custom"].is_object()) invalid("family custom needs a custom object");
    const json& c = request["custom"];
    Custom offsets;
    auto read = [&](const char* key, Point3& field) {
      if (c.contains(key)) field = point_from(c[key], std::string("custom.") + key);
    };
    read("render_offset_left_m", offsets.render_offset_left);
    read("render_offset_right_m", offsets.render_offset_right);
    read("view_offset_left_m", offsets.view_offset_left);
    read("view_offset_right_m", offsets.view_offset_right);
    s.errors = offsets;
    s.hmd = HmdGeometry(number_or(request, "iad_m", s.ipd), vid);
  } else {
    const double magnitude = number_or(request, "magnitude_m", default_magnitude(family));
    const double iad_default = family == ErrorFamily::IpdIad ? s.ipd + magnitude : s.ipd;
    s.errors = make_error(family, magnitude);
    s.hmd = HmdGeometry(number_or(request, "iad_m", iad_default), vid);
  }
  check_bounds(to_custom(s.errors, s.hmd));
  return s;
}

json handle_predict(const json& request) {
  const Scenario s = parse_scenario(request);
  Point3 target;
  if (request.contains("target_m")) {
    target = point_from(request["target_m"], "target_m");
  } else if (request.contains("target_z_m")) {
    target = {0.0, 0.0, required_number(request, "target_z_m")};
  } else {
    invalid("missing target_m or target_z_m");
  }
  const PerceptionResult r =
      perceive_point(target, s.hmd, s.errors, seat_viewer(s.hmd, s.errors, s.parallax_offset));
  return respond_perception(target, r);
}

fieldgen::DistortionField field_for(const json& request) {
  const Scenario s = parse_scenario(request);
  const fieldgen::FieldGrid grid = io::grid_from_json(request.contains("grid") ? request["grid"] : json());
  return fieldgen::generate_field(grid, s.hmd, s.errors, seat_viewer(s.hmd, s.errors, s.parallax_offset));
}

json handle_field(const json& request) { return io::to_json(field_for(request)); }

json handle_fit(const json& request) {
  require_object(request);
  psychometrics::TrialSet trials;
  if (request.contains("bins")) {
    trials = io::trial_set_from_json(request);
  } else if (request.contains("trials")) {
    if (!request["trials"].is_array()) invalid("trials must be an array");
    std::vector<psychometrics::Trial> raw;
    for (const json& t : request["trials"]) {
      if (!t.is_object() || !t.contains("error_m") || !t["error_m"].is_number() || !t.contains("response") ||
          !t["response"].is_number_integer()) {
        invalid("each trial needs numeric error_m and integer response");
      }
      const auto response = t["response"].get<int>();
      if (response != 0 && response != 1) invalid("response must be 0 or 1");
      raw.push_back({t["error_m"].get<double>(), response == 1});
    }
    trials = psychometrics::bin_trials(raw);
  } else {
    invalid("fit request needs bins or trials");
  }
  int n_resamples = 200;
  if (request.contains("n_resamples")) {
    if (!request["n_resamples"].is_number_integer()) invalid("n_resamples must be an integer");
    n_resamples = request["n_resamples"].get<int>();
  }
  return io::to_json(psychometrics::bootstrap_fit(trials, n_resamples, seed_of(request, false)));
}

namespace {

std::vector<psychometrics::Trial> simulate_from(const json& request) {
  require_object(request);
  observer::ObserverConfig config;
  config.seed = seed_of(request, true);
  config.family = family_of(request);
  const double vid = number_or(request, "vid_m", kDefaultVid);
  const double ipd = number_or(request, "ipd_m", kDefaultIpd);
  config.hmd = HmdGeometry(ipd, vid);
  config.parallax_offset = number_or(request, "parallax_offset_m", 0.0);
  config.target_distance = required_number(request, "target_z_m");
  config.sigma = number_or(request, "sigma_m", observer::kDefaultNoise);
  if (config.sigma < 0.0) invalid("sigma_m must be >= 0");
  const std::vector<double> levels =
      request.contains("levels_m") ? number_list(request["levels_m"], "levels_m") : default_levels(config.family);
  for (double x : levels) {
    const ErrorSpec errors = make_error(config.family, x);
    check_bounds(to_custom(errors, fieldgen::headset_for(config.family, x, config.hmd, ipd)));
  }
  std::int64_t n_per_level = 100;
  if (request.contains("n_per_level")) {
    if (!request["n_per_level"].is_number_integer()) invalid("n_per_level must be an integer");
    n_per_level = request["n_per_level"].get<std::int64_t>();
  }
  return observer::simulate_2ifc_responses(config, levels, n_per_level);
}

}  // namespace

std::vector<psychometrics::Trial> simulate_responses(const json& request) { return simulate_from(request); }

json handle_simulate(const json& request) {
  const auto responses = simulate_from(request);
  return io::to_json(psychometrics::bin_trials(responses));
}

json handle_pipeline_check(const json& request) {
  require_object(request);
  const double vid = number_or(request, "vid_m", kDefaultVid);
  const double ipd = number_or(request, "ipd_m", kDefaultIpd);
  json grid_body = request.contains("grid") ? request["grid"] : json::object();
  fieldgen::FieldGrid grid{-0.3, 0.3, 5, 0.3, 2.5, 5, 0.0};
  if (!grid_body.is_object()) invalid("grid must be an object");
  grid.x_min = number_or(grid_body, "x_min_m", grid.x_min);
  grid.x_max = number_or(grid_body, "x_max_m", grid.x_max);
  grid.z_min = number_or(grid_body, "z_min_m", grid.z_min);
  grid.z_max = number_or(grid_body, "z_max_m", grid.z_max);
  grid.y = number_or(grid_body, "y_m", grid.y);
  if (grid_body.contains("nx")) grid.nx = grid_body["nx"].get<int>();
  if (grid_body.contains("nz")) grid.nz = grid_body["nz"].get<int>();
  grid.validate();

  const auto report = pipeline::equivalence_report(pipeline::canonical_configs(vid, ipd), grid.points());
  json configs = json::array();
  for (const auto& c : report.configs) {
    json failures = json::array();
    for (const auto& f : c.failures) {
      failures.push_back({{"target", io::point_json(f.target)}, {"stage", f.stage}, {"message", f.message}});
    }
    configs.push_back({{"name", c.name},
                       {"max_deviation_m", io::round_sig9(c.max_deviation)},
                       {"points_checked", c.points_checked},
                       {"failures", std::move(failures)}});
  }
  return {{"max_deviation_m", io::round_sig9(report.max_deviation)}, {"grid", io::to_json(grid)}, {"configs", std::move(configs)}};
}

namespace {

struct ReachRequest {
  ErrorFamily family = ErrorFamily::None;
  std::vector<double> magnitudes;
  double target = 0.0;
  HmdGeometry hmd{kDefaultIpd, kDefaultVid};
  double ipd = kDefaultIpd;
  double parallax = 0.0;
};

ReachRequest parse_reach(const json& request) {
  require_object(request);
  ReachRequest r;
  r.family = family_of(request);
  const double vid = number_or(request, "vid_m", kDefaultVid);
  r.ipd = number_or(request, "ipd_m", kDefaultIpd);
  r.target = required_number(request, "target_z_m");
  r.parallax = number_or(request, "parallax_offset_m", 0.0);
  if (request.contains("magnitudes_m")) {
    r.magnitudes = number_list(request["magnitudes_m"], "magnitudes_m");
  } else {
    const double m = std::abs(default_magnitude(r.family));
    r.magnitudes = {-m, 0.0, m};
  }
  r.hmd = HmdGeometry(number_or(request, "iad_m", r.ipd), vid);
  for (double m : r.magnitudes) {
    check_bounds(to_custom(make_error(r.family, m), fieldgen::headset_for(r.family, m, r.hmd, r.ipd)));
  }
  return r;
}

}  // namespace

fieldgen::PredictionTable reach_table_for(const json& request) {
  const ReachRequest r = parse_reach(request);
  return fieldgen::predict_reach_bias(r.family, r.magnitudes, r.target, r.hmd, r.ipd, r.parallax);
}

json handle_reach_table(const json& request) {
  const ReachRequest r = parse_reach(request);
  const auto table = fieldgen::predict_reach_bias(r.family, r.magnitudes, r.target, r.hmd, r.ipd, r.parallax);
  json body = io::to_json(table);
  body["trend_slope"] = io::round_sig9(fieldgen::trend_slope(table));
  body["model_slope"] = io::round_sig9(fieldgen::model_slope(r.family, r.target, r.hmd, r.ipd, r.parallax));
  return body;
}

json error_body(ErrorCode code, const std::string& message) {
  return {{"error", {{"code", std::string(to_string(code))}, {"message", message}}}};
}

int http_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::Diverged:
    case ErrorCode::PointBehindCamera:
    case ErrorCode::FixationBehindEye:
      return 422;
    case ErrorCode::IoFailure:
      return 500;
    default:
      return 400;
  }
}

}  // namespace hmdgeom::service
