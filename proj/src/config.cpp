#include "viscoid/config.hpp"

#include <charconv>
#include <cmath>

#include "viscoid/bundle.hpp"
#include "viscoid/errors.hpp"

namespace viscoid {

namespace {

double real(const std::string& key, const std::string& v) {
  try {
    const auto slash = v.find('/');
    if (slash != std::string::npos) {
      const double num = parse_double(std::string_view(v).substr(0, slash), key);
      const double den = parse_double(std::string_view(v).substr(slash + 1), key);
      if (den == 0.0) throw ConfigError(key + ": division by zero");
      return num / den;
    }
    return parse_double(v, key);
  } catch (const FormatError&) {
    throw ConfigError(key + ": expected a number, got '" + v + "'");
  }
}

int integer(const std::string& key, const std::string& v) {
  int out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    throw ConfigError(key + ": expected an integer, got '" + v + "'");
  }
  return out;
}

bool boolean(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError(key + ": expected true or false, got '" + v + "'");
}

bool divides(double whole, double dt) {
  const double steps = whole / dt;
  return std::abs(steps - std::round(steps)) <= 1e-9 * std::max(1.0, steps) && std::round(steps) >= 1;
}

}  // namespace

KernelTable read_kernel_table(const std::filesystem::path& path) {
  const CsvTable t = read_csv(path);
  if (t.header != std::vector<std::string>{"t", "N", "N1", "N2", "N3"}) {
    throw FormatError(path.string() + ": header must be t,N,N1,N2,N3");
  }
  if (t.rows() < 2) throw FormatError(path.string() + ": kernel table needs two rows or more");
  const double dt = t.columns[0][1] - t.columns[0][0];
  const TimeGrid g(dt, static_cast<int>(t.rows()) - 1);
  for (int k = 0; k < g.nodes(); ++k) {
    if (std::abs(t.columns[0][static_cast<std::size_t>(k)] - g.t(k)) > 1e-9 * std::max(1.0, g.t_max())) {
      throw FormatError(path.string() + ": kernel samples must be uniform from t = 0");
    }
  }
  return KernelTable{g, t.columns[1], t.columns[2], t.columns[3], t.columns[4]};
}

RunConfig parse_config(std::string_view text, const std::filesystem::path& base_dir) {
  std::map<std::string, std::string> kv;
  try {
    kv = parse_key_values(text, "config");
  } catch (const FormatError& e) {
    throw ConfigError(e.what());
  }
  RunConfig cfg;
  bool normalize = false;
  for (const auto& [key, value] : kv) {
    if (key == "kernel") {
      cfg.kernel_text = value;
    } else if (key == "kernel_normalize") {
      normalize = boolean(key, value);
    } else if (key == "L") {
      cfg.L = real(key, value);
    } else if (key == "T_max") {
      cfg.T_max = real(key, value);
    } else if (key == "dt") {
      cfg.dt = real(key, value);
    } else if (key == "n_basis") {
      cfg.n_basis = integer(key, value);
    } else if (key == "q") {
      cfg.q = Expression::parse(value, base_dir);
    } else if (key == "control") {
      cfg.control = Expression::parse(value, base_dir);
    } else if (key == "lambda") {
      cfg.identify.auto_lambda = value == "auto";
      if (!cfg.identify.auto_lambda) cfg.identify.lambda = real(key, value);
    } else if (key == "smoothing_halfwidth") {
      cfg.identify.smoothing_halfwidth = integer(key, value);
    } else if (key == "xi_guard") {
      cfg.identify.xi_guard = value == "auto" ? 0.0 : real(key, value);
    } else if (key == "horizons") {
      cfg.horizons = value;
    } else if (key == "threads") {
      cfg.threads = integer(key, value);
    } else if (key == "out") {
      cfg.out = base_dir / value;
    } else if (key == "bundle") {
      cfg.bundle = base_dir / value;
    } else {
      throw ConfigError("unknown configuration key '" + key + "'");
    }
  }

  const std::string& k = cfg.kernel_text;
  if (k == "one") {
    cfg.kernel = KernelSpec::constant_one();
  } else if (k.starts_with("exp:")) {
    cfg.kernel = KernelSpec::exponential(real("kernel", k.substr(4)));
  } else if (k.starts_with("table:")) {
    std::filesystem::path p = k.substr(6);
    if (p.is_relative()) p = base_dir / p;
    cfg.kernel = KernelSpec::tabulated(read_kernel_table(p), normalize);
  } else {
    throw ConfigError("kernel must be one, exp:<rate> or table:<path>, got '" + k + "'");
  }

  if (!(cfg.dt > 0.0)) throw ConfigError("dt must be positive");
  if (!(cfg.T_max > 0.0)) throw ConfigError("T_max must be positive");
  if (!(cfg.L > 0.0)) throw ConfigError("L must be positive");
  if (2.0 * cfg.T_max > cfg.L * (1.0 + 1e-12)) {
    throw ConfigError("need 2 T_max <= L so that responses on [0, 2 T_max] see no reflection");
  }
  if (!divides(cfg.T_max, cfg.dt)) throw ConfigError("dt must divide T_max");
  if (!divides(cfg.L, cfg.dt)) throw ConfigError("dt must divide L");
  if (cfg.threads < 0) throw ConfigError("threads must be >= 0");
  if (cfg.identify.smoothing_halfwidth < 1) throw ConfigError("smoothing_halfwidth must be >= 1");
  if (cfg.identify.xi_guard < 0.0) throw ConfigError("xi_guard must be positive");
  if (!cfg.identify.auto_lambda && cfg.identify.lambda < 0.0) throw ConfigError("lambda must be >= 0");
  if (cfg.horizons != "all" && !cfg.horizons.starts_with("stride:")) {
    throw ConfigError("horizons must be all or stride:<s>");
  }
  if (cfg.horizons.starts_with("stride:") && integer("horizons", cfg.horizons.substr(7)) < 1) {
    throw ConfigError("horizon stride must be >= 1");
  }
  cfg.identify.threads = cfg.threads;
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::string text;
  try {
    text = read_text(path);
  } catch (const FormatError& e) {
    throw ConfigError(e.what());
  }
  return parse_config(text, path.parent_path().empty() ? std::filesystem::path(".") : path.parent_path());
}

std::vector<int> resolve_horizons(const std::string& setting, const ControlBasis& basis) {
  const std::vector<int> all = default_horizons(basis);
  if (setting == "all") return all;
  if (!setting.starts_with("stride:")) throw ConfigError("horizons must be all or stride:<s>");
  const int s = integer("horizons", setting.substr(7));
  if (s < 1) throw ConfigError("horizon stride must be >= 1");
  // Count back from T_max so the last horizon is always included.
  std::vector<int> out;
  for (int i = static_cast<int>(all.size()) - 1; i >= 0; i -= s) out.insert(out.begin(), all[static_cast<std::size_t>(i)]);
  return out;
}

}  // namespace viscoid
