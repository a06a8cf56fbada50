#include "hmdgeom/export.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <sstream>

namespace hmdgeom::io {

namespace {

json number_or_null(double v) { return std::isfinite(v) ? json(round_sig9(v)) : json(nullptr); }

std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

}  // namespace

Format parse_format(std::string_view name) {
  if (name == "json") return Format::Json;
  if (name == "csv") return Format::Csv;
  throw Error(ErrorCode::InvalidInput, "unknown format '" + std::string(name) + "'");
}

double round_sig9(double v) {
  if (!std::isfinite(v)) return v;
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  const double r = std::strtod(buf, nullptr);
  return r == 0.0 ? 0.0 : r;
}

std::string format_sig9(double v) {
  if (!std::isfinite(v)) return {};
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", round_sig9(v));
  return buf;
}

json point_json(const Point3& p) {
  if (!is_finite(p)) return nullptr;
  return json::array({round_sig9(p.x), round_sig9(p.y), round_sig9(p.z)});
}

json perception_json(const Point3& intended, const PerceptionResult& result) {
  const bool ok = result.converged();
  return {
      {"intended", point_json(intended)},
      {"perceived_hmd", ok ? point_json(result.perceived_hmd) : json(nullptr)},
      {"perceived_ego", ok ? point_json(result.perceived_egocentric) : json(nullptr)},
      {"residual", ok ? number_or_null(result.residual) : json(nullptr)},
      {"status", std::string(to_string(result.status))},
  };
}

json to_json(const fieldgen::FieldGrid& grid) {
  return {{"x_min_m", round_sig9(grid.x_min)}, {"x_max_m", round_sig9(grid.x_max)}, {"nx", grid.nx},
          {"z_min_m", round_sig9(grid.z_min)}, {"z_max_m", round_sig9(grid.z_max)}, {"nz", grid.nz},
          {"y_m", round_sig9(grid.y)}};
}

json to_json(const fieldgen::DistortionField& field) {
  json points = json::array();
  for (std::size_t i = 0; i < field.intended.size(); ++i) {
    points.push_back(perception_json(field.intended[i], field.perceived[i]));
  }
  return {{"grid", to_json(field.grid)}, {"points", std::move(points)}};
}

json to_json(const fieldgen::PredictionTable& table) {
  json rows = json::array();
  for (const auto& r : table.rows) {
    rows.push_back({{"family", std::string(fieldgen::family_name(r.family))},
                    {"magnitude_m", round_sig9(r.magnitude)},
                    {"target_m", round_sig9(r.target)},
                    {"perceived_ego_m", number_or_null(r.perceived_ego)},
                    {"bias_m", number_or_null(r.bias)},
                    {"status", std::string(to_string(r.status))}});
  }
  return {{"rows", std::move(rows)}};
}

json to_json(const psychometrics::PsychometricFit& fit) {
  return {{"slope", round_sig9(fit.slope)},
          {"nll", round_sig9(fit.nll)},
          {"bootstrap_sd", round_sig9(fit.bootstrap_sd)},
          {"n_resamples", fit.n_resamples},
          {"converged", fit.converged}};
}

json to_json(const psychometrics::TrialSet& trials) {
  json bins = json::array();
  for (const auto& b : trials.bins) {
    bins.push_back({{"x", round_sig9(b.x)}, {"n_total", b.n_total}, {"n_closer", b.n_closer}});
  }
  return {{"bins", std::move(bins)}};
}

std::string to_csv(const fieldgen::DistortionField& field) {
  std::ostringstream out;
  out << "intended_x_m,intended_y_m,intended_z_m,perceived_hmd_x_m,perceived_hmd_y_m,perceived_hmd_z_m,"
         "perceived_ego_x_m,perceived_ego_y_m,perceived_ego_z_m,residual_m,status\n";
  for (std::size_t i = 0; i < field.intended.size(); ++i) {
    const Point3& p = field.intended[i];
    const PerceptionResult& r = field.perceived[i];
    const bool ok = r.converged();
    auto cell = [&](double v) { return ok ? format_sig9(v) : std::string(); };
    out << format_sig9(p.x) << ',' << format_sig9(p.y) << ',' << format_sig9(p.z) << ',' << cell(r.perceived_hmd.x)
        << ',' << cell(r.perceived_hmd.y) << ',' << cell(r.perceived_hmd.z) << ',' << cell(r.perceived_egocentric.x)
        << ',' << cell(r.perceived_egocentric.y) << ',' << cell(r.perceived_egocentric.z) << ',' << cell(r.residual)
        << ',' << to_string(r.status) << '\n';
  }
  return out.str();
}

std::string to_csv(const fieldgen::PredictionTable& table) {
  std::ostringstream out;
  out << "family,magnitude_m,target_m,perceived_ego_m,bias_m\n";
  for (const auto& r : table.rows) {
    out << fieldgen::family_name(r.family) << ',' << format_sig9(r.magnitude) << ',' << format_sig9(r.target) << ','
        << format_sig9(r.perceived_ego) << ',' << format_sig9(r.bias) << '\n';
  }
  return out.str();
}

std::string trials_to_csv(std::span<const psychometrics::Trial> trials) {
  std::string out = "error_m,response\n";
  out.reserve(out.size() + trials.size() * 12);
  for (const auto& t : trials) {
    out += format_sig9(t.x);
    out += t.closer ? ",1\n" : ",0\n";
  }
  return out;
}

psychometrics::TrialSet trial_set_from_json(const json& body) {
  if (!body.is_object() || !body.contains("bins") || !body["bins"].is_array()) {
    throw Error(ErrorCode::InvalidInput, "expected an object with a \"bins\" array");
  }
  psychometrics::TrialSet set;
  for (const json& b : body["bins"]) {
    if (!b.is_object() || !b.contains("x") || !b.contains("n_total") || !b.contains("n_closer") ||
        !b["x"].is_number() || !b["n_total"].is_number_integer() || !b["n_closer"].is_number_integer()) {
      throw Error(ErrorCode::InvalidInput, "each bin needs numeric x and integer n_total, n_closer");
    }
    set.bins.push_back({b["x"].get<double>(), b["n_total"].get<std::int64_t>(), b["n_closer"].get<std::int64_t>()});
  }
  psychometrics::validate(set);
  return set;
}

std::vector<psychometrics::Trial> trials_from_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || trim(line) != "error_m,response") {
    throw Error(ErrorCode::InvalidInput, "trial CSV must start with the header error_m,response");
  }
  std::vector<psychometrics::Trial> trials;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    line = trim(line);
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) {
      throw Error(ErrorCode::InvalidInput, "line " + std::to_string(line_no) + ": expected two columns");
    }
    const std::string x_text = trim(line.substr(0, comma));
    const std::string r_text = trim(line.substr(comma + 1));
    char* end = nullptr;
    const double x = std::strtod(x_text.c_str(), &end);
    if (x_text.empty() || *end != '\0' || !std::isfinite(x)) {
      throw Error(ErrorCode::InvalidInput, "line " + std::to_string(line_no) + ": bad error_m '" + x_text + "'");
    }
    if (r_text != "0" && r_text != "1") {
      throw Error(ErrorCode::InvalidInput, "line " + std::to_string(line_no) + ": response must be 0 or 1");
    }
    trials.push_back({x, r_text == "1"});
  }
  return trials;
}

fieldgen::FieldGrid grid_from_json(const json& body) {
  fieldgen::FieldGrid grid;
  if (body.is_null()) return grid;
  if (!body.is_object()) throw Error(ErrorCode::InvalidInput, "grid must be an object");
  auto number = [&](const char* key, double& field) {
    if (!body.contains(key)) return;
    if (!body[key].is_number()) throw Error(ErrorCode::InvalidInput, std::string("grid.") + key + " must be a number");
    field = body[key].get<double>();
  };
  auto count = [&](const char* key, int& field) {
    if (!body.contains(key)) return;
    if (!body[key].is_number_integer()) throw Error(ErrorCode::InvalidInput, std::string("grid.") + key + " must be an integer");
    field = body[key].get<int>();
  };
  number("x_min_m", grid.x_min);
  number("x_max_m", grid.x_max);
  count("nx", grid.nx);
  number("z_min_m", grid.z_min);
  number("z_max_m", grid.z_max);
  count("nz", grid.nz);
  number("y_m", grid.y);
  grid.validate();
  return grid;
}

std::string serialize(const fieldgen::DistortionField& field, Format format) {
  return format == Format::Json ? to_json(field).dump() + "\n" : to_csv(field);
}

std::string serialize(const fieldgen::PredictionTable& table, Format format) {
  return format == Format::Json ? to_json(table).dump() + "\n" : to_csv(table);
}

void export_field(const fieldgen::DistortionField& field, Format format, const std::filesystem::path& destination) {
  write_file(destination, serialize(field, format));
}

void export_field(const fieldgen::PredictionTable& table, Format format, const std::filesystem::path& destination) {
  write_file(destination, serialize(table, format));
}

void write_file(const std::filesystem::path& destination, const std::string& content) {
  std::ofstream out(destination, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoFailure, "cannot open " + destination.string() + " for writing");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  out.close();
  if (!out) throw Error(ErrorCode::IoFailure, "failed writing " + destination.string());
}

std::string read_file(const std::filesystem::path& source) {
  std::ifstream in(source, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot open " + source.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace hmdgeom::io
