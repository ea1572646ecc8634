#pragma once

#include <map>
#include <optional>
#include <string>

#include <json.hpp>

#include "subspace_ot/gaussian.hpp"
#include "subspace_ot/pipelines.hpp"

namespace sot {

// Headerless CSV, one matrix row per line, full round-trip precision on
// write. Parse failures report line and column.
MatrixXd read_matrix_csv(const std::string& path);
MatrixXd parse_matrix_csv(const std::string& text, const std::string& origin);
void write_matrix_csv(const std::string& path, const MatrixXd& m);
std::string format_matrix_csv(const MatrixXd& m);

// Gaussian as JSON: {"mean": [...], "cov": [[...], ...]}.
Gaussian read_gaussian_json(const std::string& path);
Gaussian gaussian_from_json(const nlohmann::json& j, const std::string& origin);
nlohmann::json gaussian_to_json(const Gaussian& g);
void write_gaussian_json(const std::string& path, const Gaussian& g);

nlohmann::json matrix_to_json(const MatrixXd& m);
MatrixXd matrix_from_json(const nlohmann::json& j, const std::string& origin);

// Portable pixmap, binary (P6) or ASCII (P3), maxval 255.
Image read_ppm(const std::string& path);
void write_ppm(const std::string& path, const Image& img, bool binary = true);

// Stable JSON envelope emitted by every CLI command.
struct ResultEnvelope {
  static constexpr int kSchemaVersion = 1;

  std::string command;
  nlohmann::json config;
  std::map<std::string, double> timing;
  nlohmann::json payload;
  std::optional<std::pair<std::string, std::string>> error;  // type, message

  nlohmann::json to_json() const;
};

}  // namespace sot
