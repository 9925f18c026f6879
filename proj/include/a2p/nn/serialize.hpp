#pragma once

#include "a2p/common.hpp"

#include <Eigen/Dense>

#include <cstring>
#include <istream>
#include <map>
#include <ostream>
#include <string>
#include <vector>

namespace a2p::nn {

/// Named dense tensors, written as a plain-text manifest (name rows cols per
/// line) followed by flat little-endian float64 blobs in manifest order,
/// column-major. Round trips are bit-exact.
struct TensorMap {
  std::vector<std::string> names;
  std::vector<Mat> tensors;

  void add(const std::string& name, Mat t) {
    names.push_back(name);
    tensors.push_back(std::move(t));
  }

  void add_scalar(const std::string& name, double v) {
    Mat m(1, 1);
    m(0, 0) = v;
    add(name, std::move(m));
  }

  const Mat& get(const std::string& name) const {
    for (std::size_t i = 0; i < names.size(); ++i) {
      if (names[i] == name) return tensors[i];
    }
    throw ConfigError("tensor map: missing tensor '" + name + "'");
  }

  double get_scalar(const std::string& name) const {
    const Mat& m = get(name);
    if (m.size() != 1) throw ConfigError("tensor map: '" + name + "' is not a scalar");
    return m(0, 0);
  }

  bool has(const std::string& name) const {
    for (const auto& n : names)
      if (n == name) return true;
    return false;
  }
};

inline void write_tensors(std::ostream& os, const TensorMap& tm) {
  os << "tensors " << tm.names.size() << "\n";
  for (std::size_t i = 0; i < tm.names.size(); ++i) {
    os << tm.names[i] << " " << tm.tensors[i].rows() << " " << tm.tensors[i].cols() << "\n";
  }
  os << "data\n";
  for (const auto& t : tm.tensors) {
    os.write(reinterpret_cast<const char*>(t.data()),
             static_cast<std::streamsize>(sizeof(double) * t.size()));
  }
}

inline TensorMap read_tensors(std::istream& is) {
  std::string tag;
  std::size_t count = 0;
  if (!(is >> tag >> count) || tag != "tensors") {
    throw ConfigError("tensor read: bad or missing manifest header");
  }
  TensorMap tm;
  std::vector<std::pair<long, long>> shapes;
  for (std::size_t i = 0; i < count; ++i) {
    std::string name;
    long rows = 0, cols = 0;
    if (!(is >> name >> rows >> cols) || rows < 0 || cols < 0) {
      throw ConfigError("tensor read: corrupt manifest entry");
    }
    tm.names.push_back(name);
    shapes.emplace_back(rows, cols);
  }
  if (!(is >> tag) || tag != "data") throw ConfigError("tensor read: missing data marker");
  is.get();  // the newline after "data"
  for (std::size_t i = 0; i < count; ++i) {
    Mat t(shapes[i].first, shapes[i].second);
    is.read(reinterpret_cast<char*>(t.data()),
            static_cast<std::streamsize>(sizeof(double) * t.size()));
    if (is.gcount() != static_cast<std::streamsize>(sizeof(double) * t.size())) {
      throw ConfigError("tensor read: truncated data for '" + tm.names[i] + "'");
    }
    tm.tensors.push_back(std::move(t));
  }
  return tm;
}

}  // namespace a2p::nn
