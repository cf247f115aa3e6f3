#pragma once

#include <memory>
#include <string>
#include <vector>

#include "bbo/point.hpp"

namespace bbo {

// Arithmetic/boolean expressions over named variables, used for domain
// constraints and fidelity cost functions in config files. Supported syntax:
//   literals        1.5, 2e-3, 'label', "label"
//   arithmetic      + - * / ^   (^ is right-associative power)
//   comparisons     < <= > >= == !=
//   boolean         and or not  (also && || !)
//   calls           abs, sqrt, exp, log, sin, cos, min, max, floor, ceil
// Evaluation is pure: the same inputs always produce the same output.
class Expr {
 public:
  // Parses `text` against the given variable names. Throws MalformedConfig on
  // syntax errors or references to unknown variables.
  static Expr parse(const std::string& text, const std::vector<std::string>& variables);

  // Evaluates with coordinate i bound to variables[i]. Numeric result;
  // booleans evaluate to 1/0.
  double eval_numeric(const Point& p) const;
  bool eval_bool(const Point& p) const { return eval_numeric(p) != 0.0; }

  const std::string& source() const { return source_; }

  struct Node;  // implementation detail, defined in the source file

 private:
  std::shared_ptr<const Node> root_;
  std::string source_;
};

}  // namespace bbo
