#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace viscoid {

/// A scalar profile on [0, length] written as terms joined by '+':
///   const(c)          c
///   sin(a, k)         a sin(k pi x / length)
///   sin2(a, k)        a sin(k pi x / length)^2
///   poly(c0, c1, ...) c0 + c1 x + ...
/// or a single `table:path` naming a two-column CSV (x, value) that is
/// interpolated linearly and held constant outside its range.
class Expression {
 public:
  Expression() = default;
  static Expression parse(std::string_view text, const std::filesystem::path& base_dir = {});

  double operator()(double x, double length) const;
  const std::string& text() const { return text_; }

 private:
  enum class Kind { constant, sine, sine_squared, polynomial };
  struct Term {
    Kind kind;
    std::vector<double> args;
  };
  std::string text_ = "const(0)";
  std::vector<Term> terms_;
  std::vector<double> table_x_, table_v_;
};

}  // namespace viscoid
