#include "viscoid/expression.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <numbers>

#include "viscoid/bundle.hpp"
#include "viscoid/errors.hpp"

namespace viscoid {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

double number(std::string_view s, std::string_view context) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) {
    throw ConfigError("bad number '" + std::string(s) + "' in " + std::string(context));
  }
  return v;
}

// Splits on `sep` outside parentheses.
std::vector<std::string_view> split_top(std::string_view s, char sep) {
  std::vector<std::string_view> parts;
  int depth = 0;
  std::size_t start = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '(') ++depth;
    if (s[i] == ')') --depth;
    if (depth < 0) throw ConfigError("unbalanced ')' in '" + std::string(s) + "'");
    // A '+' right after an exponent marker belongs to the number.
    const bool exponent = sep == '+' && i > 0 && (s[i - 1] == 'e' || s[i - 1] == 'E') && i > 1 &&
                          std::isdigit(static_cast<unsigned char>(s[i - 2]));
    if (s[i] == sep && depth == 0 && !exponent) {
      parts.push_back(s.substr(start, i - start));
      start = i + 1;
    }
  }
  if (depth != 0) throw ConfigError("unbalanced '(' in '" + std::string(s) + "'");
  parts.push_back(s.substr(start));
  return parts;
}

}  // namespace

Expression Expression::parse(std::string_view text, const std::filesystem::path& base_dir) {
  Expression e;
  const std::string_view body = trim(text);
  e.text_ = std::string(body);
  if (body.empty()) throw ConfigError("empty expression");
  if (body.starts_with("table:")) {
    std::filesystem::path path(std::string(trim(body.substr(6))));
    if (path.is_relative() && !base_dir.empty()) path = base_dir / path;
    const CsvTable t = read_csv(path);
    if (t.columns.size() != 2) throw FormatError(path.string() + ": expected two columns (x, value)");
    e.table_x_ = t.columns[0];
    e.table_v_ = t.columns[1];
    if (e.table_x_.empty()) throw FormatError(path.string() + ": empty table");
    if (!std::is_sorted(e.table_x_.begin(), e.table_x_.end())) {
      throw FormatError(path.string() + ": x column must be increasing");
    }
    return e;
  }
  for (std::string_view raw : split_top(body, '+')) {
    const std::string_view term = trim(raw);
    const auto open = term.find('(');
    if (open == std::string_view::npos || term.back() != ')') {
      throw ConfigError("expected name(args) in expression term '" + std::string(term) + "'");
    }
    const std::string_view name = trim(term.substr(0, open));
    const std::string_view inside = term.substr(open + 1, term.size() - open - 2);
    Term t{};
    for (std::string_view a : split_top(inside, ',')) t.args.push_back(number(a, term));
    if (name == "const") {
      t.kind = Kind::constant;
      if (t.args.size() != 1) throw ConfigError("const() takes one argument");
    } else if (name == "sin" || name == "sin2") {
      t.kind = name == "sin" ? Kind::sine : Kind::sine_squared;
      if (t.args.size() != 2) throw ConfigError(std::string(name) + "() takes (amplitude, k)");
    } else if (name == "poly") {
      t.kind = Kind::polynomial;
    } else {
      throw ConfigError("unknown expression term '" + std::string(name) + "'");
    }
    e.terms_.push_back(std::move(t));
  }
  return e;
}

double Expression::operator()(double x, double length) const {
  if (!table_x_.empty()) {
    if (x <= table_x_.front()) return table_v_.front();
    if (x >= table_x_.back()) return table_v_.back();
    const auto it = std::upper_bound(table_x_.begin(), table_x_.end(), x);
    const auto i = static_cast<std::size_t>(it - table_x_.begin());
    const double s = (x - table_x_[i - 1]) / (table_x_[i] - table_x_[i - 1]);
    return (1.0 - s) * table_v_[i - 1] + s * table_v_[i];
  }
  double v = 0.0;
  for (const Term& t : terms_) {
    switch (t.kind) {
      case Kind::constant:
        v += t.args[0];
        break;
      case Kind::sine:
        v += t.args[0] * std::sin(t.args[1] * std::numbers::pi * x / length);
        break;
      case Kind::sine_squared: {
        const double s = std::sin(t.args[1] * std::numbers::pi * x / length);
        v += t.args[0] * s * s;
        break;
      }
      case Kind::polynomial: {
        double acc = 0.0;
        for (auto c = t.args.rbegin(); c != t.args.rend(); ++c) acc = acc * x + *c;
        v += acc;
        break;
      }
    }
  }
  return v;
}

}  // namespace viscoid
