#include "subspace_ot/io.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

namespace sot {

namespace {

std::string load_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

[[noreturn]] void parse_fail(const std::string& origin, std::size_t line,
                             std::size_t col, const std::string& what) {
  std::ostringstream os;
  os << origin << ":" << line << ":" << col << ": " << what;
  throw ParseError(os.str());
}

}  // namespace

MatrixXd parse_matrix_csv(const std::string& text, const std::string& origin) {
  std::vector<std::vector<double>> rows;
  std::size_t line_no = 0;
  std::istringstream stream(text);
  std::string line;
  while (std::getline(stream, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    // skip blank lines
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    std::vector<double> row;
    std::size_t pos = 0;
    while (pos <= line.size()) {
      std::size_t comma = line.find(',', pos);
      const std::size_t end = comma == std::string::npos ? line.size() : comma;
      std::string cell = line.substr(pos, end - pos);
      const std::size_t col = pos + 1;
      // trim
      const auto first = cell.find_first_not_of(" \t");
      if (first == std::string::npos) {
        parse_fail(origin, line_no, col, "empty cell");
      }
      const auto last = cell.find_last_not_of(" \t");
      cell = cell.substr(first, last - first + 1);
      try {
        std::size_t used = 0;
        row.push_back(std::stod(cell, &used));
        if (used != cell.size()) {
          parse_fail(origin, line_no, col, "trailing junk in '" + cell + "'");
        }
      } catch (const std::exception&) {
        parse_fail(origin, line_no, col, "not a number: '" + cell + "'");
      }
      if (comma == std::string::npos) break;
      pos = comma + 1;
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      parse_fail(origin, line_no, 1, "ragged row");
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ParseError(origin + ": empty matrix");
  MatrixXd m(rows.size(), rows.front().size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < rows[i].size(); ++j) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          rows[i][j];
    }
  }
  return m;
}

MatrixXd read_matrix_csv(const std::string& path) {
  return parse_matrix_csv(load_file(path), path);
}

std::string format_matrix_csv(const MatrixXd& m) {
  std::ostringstream os;
  char buf[64];
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      std::snprintf(buf, sizeof(buf), "%.17g", m(i, j));
      os << buf;
      if (j + 1 < m.cols()) os << ',';
    }
    os << '\n';
  }
  return os.str();
}

void write_matrix_csv(const std::string& path, const MatrixXd& m) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot write " + path);
  out << format_matrix_csv(m);
}

nlohmann::json matrix_to_json(const MatrixXd& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

MatrixXd matrix_from_json(const nlohmann::json& j, const std::string& origin) {
  if (!j.is_array() || j.empty()) {
    throw ParseError(origin + ": expected a non-empty array of rows");
  }
  const std::size_t rows = j.size();
  const std::size_t cols = j.front().is_array() ? j.front().size() : 0;
  if (cols == 0) throw ParseError(origin + ": expected array rows");
  MatrixXd m(rows, cols);
  for (std::size_t i = 0; i < rows; ++i) {
    if (!j[i].is_array() || j[i].size() != cols) {
      throw ParseError(origin + ": ragged row " + std::to_string(i));
    }
    for (std::size_t c = 0; c < cols; ++c) {
      if (!j[i][c].is_number()) {
        throw ParseError(origin + ": non-numeric entry");
      }
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) =
          j[i][c].get<double>();
    }
  }
  return m;
}

Gaussian gaussian_from_json(const nlohmann::json& j,
                            const std::string& origin) {
  if (!j.is_object() || !j.contains("mean") || !j.contains("cov")) {
    throw ParseError(origin + ": expected {\"mean\": [...], \"cov\": [[...]]}");
  }
  const auto& jm = j["mean"];
  if (!jm.is_array() || jm.empty()) {
    throw ParseError(origin + ": mean must be a non-empty array");
  }
  VectorXd mean(jm.size());
  for (std::size_t i = 0; i < jm.size(); ++i) {
    if (!jm[i].is_number()) throw ParseError(origin + ": non-numeric mean");
    mean(static_cast<Eigen::Index>(i)) = jm[i].get<double>();
  }
  const MatrixXd cov = matrix_from_json(j["cov"], origin + ".cov");
  return Gaussian(mean, SpdMatrix(cov));
}

Gaussian read_gaussian_json(const std::string& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(load_file(path));
  } catch (const nlohmann::json::parse_error& exc) {
    throw ParseError(path + ": " + exc.what());
  }
  return gaussian_from_json(j, path);
}

nlohmann::json gaussian_to_json(const Gaussian& g) {
  nlohmann::json j;
  j["mean"] = std::vector<double>(g.mean.data(), g.mean.data() + g.mean.size());
  j["cov"] = matrix_to_json(g.cov.entries());
  return j;
}

void write_gaussian_json(const std::string& path, const Gaussian& g) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot write " + path);
  out << gaussian_to_json(g).dump(2) << '\n';
}

namespace {

// Reads the next PPM header token, skipping whitespace and # comments.
std::string ppm_token(const std::string& text, std::size_t* pos) {
  while (*pos < text.size()) {
    const char c = text[*pos];
    if (c == '#') {
      while (*pos < text.size() && text[*pos] != '\n') ++(*pos);
    } else if (std::isspace(static_cast<unsigned char>(c))) {
      ++(*pos);
    } else {
      break;
    }
  }
  const std::size_t start = *pos;
  while (*pos < text.size() &&
         !std::isspace(static_cast<unsigned char>(text[*pos]))) {
    ++(*pos);
  }
  if (start == *pos) throw DecodeError("truncated pixmap header");
  return text.substr(start, *pos - start);
}

int ppm_int(const std::string& text, std::size_t* pos, const char* what) {
  const std::string tok = ppm_token(text, pos);
  try {
    return std::stoi(tok);
  } catch (const std::exception&) {
    throw DecodeError(std::string("bad pixmap ") + what + ": " + tok);
  }
}

}  // namespace

Image read_ppm(const std::string& path) {
  const std::string text = load_file(path);
  std::size_t pos = 0;
  const std::string magic = ppm_token(text, &pos);
  if (magic != "P6" && magic != "P3") {
    throw DecodeError("unsupported pixmap magic " + magic);
  }
  Image img;
  img.width = ppm_int(text, &pos, "width");
  img.height = ppm_int(text, &pos, "height");
  const int maxval = ppm_int(text, &pos, "maxval");
  if (img.width <= 0 || img.height <= 0 || maxval <= 0 || maxval > 65535) {
    throw DecodeError("bad pixmap geometry");
  }
  const std::size_t count = static_cast<std::size_t>(img.pixels()) * 3;
  img.rgb.resize(count);
  if (magic == "P6") {
    if (maxval > 255) throw DecodeError("16-bit binary pixmaps unsupported");
    ++pos;  // single whitespace after maxval
    if (text.size() - pos < count) throw DecodeError("truncated pixel data");
    for (std::size_t i = 0; i < count; ++i) {
      img.rgb[i] = static_cast<unsigned char>(text[pos + i]) /
                   static_cast<double>(maxval);
    }
  } else {
    for (std::size_t i = 0; i < count; ++i) {
      const int v = ppm_int(text, &pos, "pixel");
      if (v < 0 || v > maxval) throw DecodeError("pixel out of range");
      img.rgb[i] = v / static_cast<double>(maxval);
    }
  }
  return img;
}

void write_ppm(const std::string& path, const Image& img, bool binary) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DecodeError("cannot write " + path);
  out << (binary ? "P6" : "P3") << '\n'
      << img.width << ' ' << img.height << "\n255\n";
  auto quantize = [](double v) {
    const int q = static_cast<int>(std::lround(v * 255.0));
    return std::clamp(q, 0, 255);
  };
  if (binary) {
    std::string data(img.rgb.size(), '\0');
    for (std::size_t i = 0; i < img.rgb.size(); ++i) {
      data[i] = static_cast<char>(quantize(img.rgb[i]));
    }
    out.write(data.data(), static_cast<std::streamsize>(data.size()));
  } else {
    for (std::size_t i = 0; i < img.rgb.size(); ++i) {
      out << quantize(img.rgb[i]);
      out << ((i % 12 == 11) ? '\n' : ' ');
    }
    out << '\n';
  }
}

nlohmann::json ResultEnvelope::to_json() const {
  nlohmann::json j;
  j["schema_version"] = kSchemaVersion;
  j["command"] = command;
  j["config"] = config;
  j["timing"] = timing;
  j["payload"] = payload;
  if (error) {
    j["error"] = {{"type", error->first}, {"message", error->second}};
  } else {
    j["error"] = nullptr;
  }
  return j;
}

}  // namespace sot
