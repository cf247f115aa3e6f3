#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "bbo/errors.hpp"

namespace bbo {

// One coordinate of a candidate configuration. Euclidean and discrete-numeric
// coordinates hold a real, integer coordinates hold an exact integer, and
// discrete (categorical) coordinates hold a label.
using Value = std::variant<double, std::int64_t, std::string>;

inline bool is_numeric(const Value& v) {
  return !std::holds_alternative<std::string>(v);
}

inline double numeric(const Value& v) {
  if (std::holds_alternative<double>(v)) return std::get<double>(v);
  if (std::holds_alternative<std::int64_t>(v)) {
    return static_cast<double>(std::get<std::int64_t>(v));
  }
  raise(ErrorCode::KindMismatch, "label coordinate used in numeric context");
}

inline const std::string& label(const Value& v) {
  if (!std::holds_alternative<std::string>(v)) {
    raise(ErrorCode::KindMismatch, "numeric coordinate used in label context");
  }
  return std::get<std::string>(v);
}

struct Point {
  std::vector<Value> coords;

  Point() = default;
  explicit Point(std::vector<Value> c) : coords(std::move(c)) {}

  std::size_t size() const { return coords.size(); }
  const Value& operator[](std::size_t i) const { return coords[i]; }
  Value& operator[](std::size_t i) { return coords[i]; }

  bool operator==(const Point& other) const { return coords == other.coords; }

  // Convenience for all-numeric points.
  static Point real(std::initializer_list<double> values) {
    Point p;
    for (double v : values) p.coords.emplace_back(v);
    return p;
  }
  static Point real(const std::vector<double>& values) {
    Point p;
    for (double v : values) p.coords.emplace_back(v);
    return p;
  }
};

// Fidelities are points over the fidelity space's variables.
using FidelityPoint = Point;

std::string to_string(const Value& v);
std::string to_string(const Point& p);

}  // namespace bbo
