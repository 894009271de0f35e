#pragma once
// Serialization: fields as JSON, tables as CSV, reports and run manifests.

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"
#include "mlslab/field.hpp"
#include "mlslab/report.hpp"

namespace mlslab {

std::uint64_t fnv1a64(std::string_view data);
std::string hex64(std::uint64_t v);
// Digest of the canonical (sorted-key, compact) dump.
std::string config_digest(const nlohmann::json& config);

// 17 significant digits, '.' decimal point, independent of locale.
std::string format_double(double v);

std::string to_csv(const Table& t, const std::string& digest);

nlohmann::json model_to_json(const Model& m);
Model model_from_json(const nlohmann::json& j);

// Doubles round-trip bit-exactly. Bump fields keep a reference to the model.
nlohmann::json field_to_json(const Field& f);
Field field_from_json(const nlohmann::json& j, const Model& m);

nlohmann::json report_to_json(const Report& r);

struct RunManifest {
  std::string command_line;
  std::string config_digest;
  std::uint64_t seed = 0;
  std::string version;
  double wall_time_s = 0.0;
  std::vector<std::string> outputs;
};
nlohmann::json manifest_to_json(const RunManifest& m);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

}  // namespace mlslab
