// hmdgeom: command-line front end to the perceived-geometry model.
//
// Every subcommand builds the same JSON request the HTTP service accepts and
// prints the same JSON response, so scripts can move between the two.

#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "hmdgeom/export.hpp"
#include "hmdgeom/service/handlers.hpp"
#include "hmdgeom/service/http.hpp"

namespace {

using nlohmann::json;
using namespace hmdgeom;

/// Flags whose values are copied into the request only when given.
struct RequestFlags {
  std::map<std::string, double> numbers;
  std::map<std::string, std::string> strings;
  std::map<std::string, std::vector<double>> lists;
  std::map<std::string, std::int64_t> integers;
  std::vector<std::pair<CLI::Option*, std::string>> bound;

  CLI::Option* number(CLI::App* app, const std::string& flag, const std::string& key, const std::string& help) {
    return bound.emplace_back(app->add_option(flag, numbers[key], help), key).first;
  }
  CLI::Option* string(CLI::App* app, const std::string& flag, const std::string& key, const std::string& help) {
    return bound.emplace_back(app->add_option(flag, strings[key], help), key).first;
  }
  CLI::Option* list(CLI::App* app, const std::string& flag, const std::string& key, const std::string& help) {
    return bound.emplace_back(app->add_option(flag, lists[key], help)->delimiter(','), key).first;
  }
  CLI::Option* integer(CLI::App* app, const std::string& flag, const std::string& key, const std::string& help) {
    return bound.emplace_back(app->add_option(flag, integers[key], help), key).first;
  }

  json to_json() const {
    json out = json::object();
    for (const auto& [opt, key] : bound) {
      if (opt->count() == 0) continue;
      if (auto it = numbers.find(key); it != numbers.end()) out[key] = it->second;
      if (auto it = strings.find(key); it != strings.end()) out[key] = it->second;
      if (auto it = lists.find(key); it != lists.end()) out[key] = it->second;
      if (auto it = integers.find(key); it != integers.end()) out[key] = it->second;
    }
    return out;
  }
};

void scenario_flags(CLI::App* app, RequestFlags& flags) {
  flags.string(app, "--family", "family", "none | passthrough | ipd-iad | eye-relief");
  flags.number(app, "--magnitude", "magnitude_m", "error magnitude in meters");
  flags.number(app, "--vid", "vid_m", "virtual image distance in meters (1.3)");
  flags.number(app, "--ipd", "ipd_m", "viewer interpupillary distance in meters (0.064)");
  flags.number(app, "--iad", "iad_m", "headset inter-axial distance in meters");
  flags.number(app, "--parallax-offset", "parallax_offset_m", "ocular parallax offset in meters (0)");
}

void grid_flags(CLI::App* app, RequestFlags& flags) {
  flags.number(app, "--x-min", "x_min_m", "grid x minimum");
  flags.number(app, "--x-max", "x_max_m", "grid x maximum");
  flags.integer(app, "--nx", "nx", "grid samples along x");
  flags.number(app, "--z-min", "z_min_m", "grid z minimum");
  flags.number(app, "--z-max", "z_max_m", "grid z maximum");
  flags.integer(app, "--nz", "nz", "grid samples along z");
  flags.number(app, "--y", "y_m", "grid slice height");
}

void emit(const std::string& content, const std::string& output) {
  if (output.empty() || output == "-") {
    std::cout << content;
  } else {
    io::write_file(output, content);
  }
}

std::string json_text(const json& body) { return body.dump() + "\n"; }

int fail(ErrorCode code, const std::string& message) {
  std::cout << service::error_body(code, message).dump() << "\n";
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Perceived 3D geometry under headset rendering and viewing errors"};
  app.require_subcommand(1);

  RequestFlags predict_flags;
  auto* predict = app.add_subcommand("predict", "perceived position of one target");
  scenario_flags(predict, predict_flags);
  double target_x = 0.0, target_y = 0.0, target_z = 0.0;
  auto* tx = predict->add_option("--target-x", target_x, "target x in meters (0)");
  auto* ty = predict->add_option("--target-y", target_y, "target y in meters (0)");
  predict->add_option("--target-z", target_z, "target z in meters")->required();

  RequestFlags field_flags, field_grid;
  auto* field = app.add_subcommand("field", "distortion field over an x-z grid");
  scenario_flags(field, field_flags);
  grid_flags(field, field_grid);
  std::string field_format = "json", field_output;
  field->add_option("--format", field_format, "json | csv")->check(CLI::IsMember({"json", "csv"}));
  field->add_option("-o,--output", field_output, "destination file (stdout)");

  RequestFlags check_flags, check_grid;
  auto* check = app.add_subcommand("pipeline-check", "compare the reprojection pipeline with the closed form");
  check_flags.number(check, "--vid", "vid_m", "virtual image distance in meters (1.3)");
  check_flags.number(check, "--ipd", "ipd_m", "viewer interpupillary distance in meters (0.064)");
  grid_flags(check, check_grid);

  RequestFlags fit_flags;
  auto* fit = app.add_subcommand("fit", "fit the psychometric slope to trial data");
  std::string fit_input;
  fit->add_option("-i,--input", fit_input, "trial CSV (error_m,response) or binned JSON")->required();
  fit_flags.integer(fit, "--n-resamples", "n_resamples", "bootstrap resamples (200)");
  fit_flags.integer(fit, "--seed", "seed", "bootstrap seed (0)");

  RequestFlags sim_flags;
  auto* simulate = app.add_subcommand("simulate", "simulate a two-interval observer");
  sim_flags.string(simulate, "--family", "family", "passthrough | ipd-iad | eye-relief");
  sim_flags.number(simulate, "--target-z", "target_z_m", "target distance in meters")->required();
  sim_flags.number(simulate, "--sigma", "sigma_m", "internal noise SD in meters (0.02)");
  sim_flags.integer(simulate, "--seed", "seed", "random seed")->required();
  sim_flags.list(simulate, "--levels", "levels_m", "comma-separated error magnitudes");
  sim_flags.integer(simulate, "--n-per-level", "n_per_level", "trials per level (100)");
  sim_flags.number(simulate, "--vid", "vid_m", "virtual image distance in meters (1.3)");
  sim_flags.number(simulate, "--ipd", "ipd_m", "viewer interpupillary distance in meters (0.064)");
  sim_flags.number(simulate, "--parallax-offset", "parallax_offset_m", "ocular parallax offset in meters (0)");
  std::string sim_format = "csv", sim_output;
  simulate->add_option("--format", sim_format, "csv (raw trials) | json (bins)")->check(CLI::IsMember({"json", "csv"}));
  simulate->add_option("-o,--output", sim_output, "destination file (stdout)");

  RequestFlags reach_flags;
  auto* reach = app.add_subcommand("reach-table", "predicted reach bias for an on-axis target");
  reach_flags.string(reach, "--family", "family", "passthrough | ipd-iad | eye-relief");
  reach_flags.list(reach, "--magnitudes", "magnitudes_m", "comma-separated error magnitudes");
  reach_flags.number(reach, "--target-z", "target_z_m", "target distance in meters")->required();
  reach_flags.number(reach, "--vid", "vid_m", "virtual image distance in meters (1.3)");
  reach_flags.number(reach, "--ipd", "ipd_m", "viewer interpupillary distance in meters (0.064)");
  reach_flags.number(reach, "--iad", "iad_m", "headset inter-axial distance in meters");
  reach_flags.number(reach, "--parallax-offset", "parallax_offset_m", "ocular parallax offset in meters (0)");
  std::string reach_format = "json", reach_output;
  reach->add_option("--format", reach_format, "json | csv")->check(CLI::IsMember({"json", "csv"}));
  reach->add_option("-o,--output", reach_output, "destination file (stdout)");

  service::ServeOptions serve_options;
  serve_options.port = service::default_port();
  auto* serve = app.add_subcommand("serve", "run the JSON HTTP service");
  serve->add_option("--host", serve_options.host, "bind address");
  serve->add_option("--port", serve_options.port, "port (HMDGEOM_PORT or 8080)");
  std::vector<std::string> origins;
  serve->add_option("--cors-origin", origins, "allowed CORS origin, repeatable (*)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (predict->parsed()) {
      json request = predict_flags.to_json();
      if (tx->count() || ty->count()) {
        request["target_m"] = {target_x, target_y, target_z};
      } else {
        request["target_z_m"] = target_z;
      }
      std::cout << json_text(service::handle_predict(request));
    } else if (field->parsed()) {
      json request = field_flags.to_json();
      request["grid"] = field_grid.to_json();
      emit(io::serialize(service::field_for(request), io::parse_format(field_format)), field_output);
    } else if (check->parsed()) {
      json request = check_flags.to_json();
      request["grid"] = check_grid.to_json();
      std::cout << json_text(service::handle_pipeline_check(request));
    } else if (fit->parsed()) {
      json request = fit_flags.to_json();
      const std::string text = io::read_file(fit_input);
      const auto first = text.find_first_not_of(" \t\r\n");
      if (first != std::string::npos && text[first] == '{') {
        json body;
        try {
          body = json::parse(text);
        } catch (const json::exception& e) {
          return fail(ErrorCode::InvalidInput, std::string("malformed JSON: ") + e.what());
        }
        if (!body.is_object() || !body.contains("bins")) return fail(ErrorCode::InvalidInput, "JSON input needs bins");
        request["bins"] = body["bins"];
      } else {
        std::istringstream in(text);
        request["bins"] = io::to_json(psychometrics::bin_trials(io::trials_from_csv(in)))["bins"];
      }
      std::cout << json_text(service::handle_fit(request));
    } else if (simulate->parsed()) {
      const json request = sim_flags.to_json();
      if (sim_format == "json") {
        emit(json_text(service::handle_simulate(request)), sim_output);
      } else {
        emit(io::trials_to_csv(service::simulate_responses(request)), sim_output);
      }
    } else if (reach->parsed()) {
      const json request = reach_flags.to_json();
      if (reach_format == "json") {
        emit(json_text(service::handle_reach_table(request)), reach_output);
      } else {
        emit(io::to_csv(service::reach_table_for(request)), reach_output);
      }
    } else if (serve->parsed()) {
      if (!origins.empty()) serve_options.cors_origins = origins;
      std::cerr << "listening on " << serve_options.host << ":" << serve_options.port << "\n";
      if (!service::serve(serve_options)) {
        return fail(ErrorCode::IoFailure, "cannot listen on port " + std::to_string(serve_options.port));
      }
    }
  } catch (const Error& e) {
    return fail(e.code(), e.what());
  } catch (const json::exception& e) {
    return fail(ErrorCode::InvalidInput, e.what());
  }
  return 0;
}
