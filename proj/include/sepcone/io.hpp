#pragma once

#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "sepcone/cones.hpp"
#include "sepcone/types.hpp"

namespace sepcone {

// File formats shared with the CLI:
//   matrix:    {"rows": n, "cols": m, "data": [row-major reals]}
//   ellipsoid: {"d": dim, "P": [row-major reals, (d-1)^2 entries]}

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline nlohmann::json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open file: " + path);
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw IoError(path + ": " + e.what());  // message carries the byte position
  }
}

inline Mat<double> matrix_from_json(const nlohmann::json& j, const std::string& what) {
  if (!j.is_object() || !j.contains("rows") || !j.contains("cols") || !j.contains("data"))
    throw IoError(what + ": expected {\"rows\", \"cols\", \"data\"}");
  const Index rows = j.at("rows").get<Index>();
  const Index cols = j.at("cols").get<Index>();
  const auto& data = j.at("data");
  if (rows < 1 || cols < 1) throw IoError(what + ": rows/cols must be positive");
  if (!data.is_array() || static_cast<Index>(data.size()) != rows * cols)
    throw IoError(what + ": data must hold rows*cols entries");
  Mat<double> m(rows, cols);
  for (Index r = 0; r < rows; ++r)
    for (Index c = 0; c < cols; ++c)
      m(r, c) = data.at(static_cast<std::size_t>(r * cols + c)).get<double>();
  return m;
}

inline Mat<double> read_matrix_json(const std::string& path) {
  return matrix_from_json(load_json_file(path), path);
}

inline nlohmann::json matrix_to_json(const Mat<double>& m) {
  nlohmann::json j;
  j["rows"] = m.rows();
  j["cols"] = m.cols();
  auto& data = j["data"] = nlohmann::json::array();
  for (Index r = 0; r < m.rows(); ++r)
    for (Index c = 0; c < m.cols(); ++c) data.push_back(m(r, c));
  return j;
}

inline EllipsoidSpec<double> read_ellipsoid_json(const std::string& path) {
  const nlohmann::json j = load_json_file(path);
  if (!j.is_object() || !j.contains("d") || !j.contains("P"))
    throw IoError(path + ": expected {\"d\", \"P\"}");
  const Index d = j.at("d").get<Index>();
  if (d < 2) throw IoError(path + ": d must be >= 2");
  const auto& data = j.at("P");
  if (!data.is_array() || static_cast<Index>(data.size()) != (d - 1) * (d - 1))
    throw IoError(path + ": P must hold (d-1)^2 entries");
  Mat<double> p(d - 1, d - 1);
  for (Index r = 0; r < d - 1; ++r)
    for (Index c = 0; c < d - 1; ++c)
      p(r, c) = data.at(static_cast<std::size_t>(r * (d - 1) + c)).get<double>();
  try {
    return EllipsoidSpec<double>(p);
  } catch (const std::invalid_argument& e) {
    throw IoError(path + ": " + e.what());
  }
}

inline Vec<double> read_vector_json(const std::string& path) {
  const nlohmann::json j = load_json_file(path);
  if (j.is_array()) {
    Vec<double> v(j.size());
    for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<Index>(i)] = j.at(i).get<double>();
    return v;
  }
  const Mat<double> m = matrix_from_json(j, path);
  if (m.rows() != 1 && m.cols() != 1) throw IoError(path + ": expected a vector");
  return m.rows() == 1 ? Vec<double>(m.row(0).transpose()) : Vec<double>(m.col(0));
}

/// CSV cell with 15 significant digits.
inline std::string csv_number(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.15g", x);
  return buf;
}

}  // namespace sepcone
