#pragma once

// JSON and CSV encodings of fields, prediction tables, fits and trial sets.
// Every floating-point value is written with 9 significant digits so that
// exports are byte-stable.

#include <filesystem>
#include <iosfwd>
#include <string>

#include "json.hpp"

#include "hmdgeom/fieldgen.hpp"
#include "hmdgeom/psychometrics.hpp"

namespace hmdgeom::io {

using nlohmann::json;

enum class Format { Json, Csv };

Format parse_format(std::string_view name);

/// Nearest double to v printed with 9 significant digits; -0 becomes 0.
double round_sig9(double v);

/// `%.9g`, or an empty string for non-finite values.
std::string format_sig9(double v);

json point_json(const Point3& p);
json perception_json(const Point3& intended, const PerceptionResult& result);

json to_json(const fieldgen::FieldGrid& grid);
json to_json(const fieldgen::DistortionField& field);
json to_json(const fieldgen::PredictionTable& table);
json to_json(const psychometrics::PsychometricFit& fit);
json to_json(const psychometrics::TrialSet& trials);

std::string to_csv(const fieldgen::DistortionField& field);
std::string to_csv(const fieldgen::PredictionTable& table);
std::string trials_to_csv(std::span<const psychometrics::Trial> trials);

/// Parses `{"bins":[{"x":..,"n_total":..,"n_closer":..}]}`.
psychometrics::TrialSet trial_set_from_json(const json& body);
/// Parses the `error_m,response` trial CSV (response 1 = comparison closer).
std::vector<psychometrics::Trial> trials_from_csv(std::istream& in);

fieldgen::FieldGrid grid_from_json(const json& body);

std::string serialize(const fieldgen::DistortionField& field, Format format);
std::string serialize(const fieldgen::PredictionTable& table, Format format);

/// serialize() then write_file(). Throws IoFailure.
void export_field(const fieldgen::DistortionField& field, Format format, const std::filesystem::path& destination);
void export_field(const fieldgen::PredictionTable& table, Format format, const std::filesystem::path& destination);

/// Writes `content` to `destination`, replacing it. Throws IoFailure.
void write_file(const std::filesystem::path& destination, const std::string& content);
std::string read_file(const std::filesystem::path& source);

}  // namespace hmdgeom::io
