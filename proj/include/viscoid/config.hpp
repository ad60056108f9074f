#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "viscoid/connecting.hpp"
#include "viscoid/expression.hpp"
#include "viscoid/identify.hpp"
#include "viscoid/kernel.hpp"

namespace viscoid {

/// Parsed key=value run configuration. Recognized keys:
///   kernel               one | exp:<rate> | table:<csv with t,N,N1,N2,N3>
///   kernel_normalize     true | false (tabulated kernels with N(0) != 1)
///   L, T_max, dt         lengths and step; dt may be written as a fraction "1/256"
///   n_basis              number of hat controls
///   q, control           expressions (see Expression)
///   lambda               auto | value
///   smoothing_halfwidth  horizons on each side of the local fit
///   xi_guard             auto | value
///   horizons             all | stride:<s>
///   threads              0 means one per core
///   out, bundle          directories
struct RunConfig {
  std::string kernel_text = "one";
  KernelSpec kernel;
  double L = 1.0;
  double T_max = 0.5;
  double dt = 1.0 / 128.0;
  int n_basis = 16;
  Expression q = Expression::parse("const(0)");
  Expression control = Expression::parse("sin2(1,1)");
  IdentifyConfig identify;
  std::string horizons = "all";
  int threads = 0;
  std::filesystem::path out = "out";
  std::filesystem::path bundle;

  TimeGrid basis_grid() const { return TimeGrid::covering(T_max, dt); }
  TimeGrid data_grid() const { return TimeGrid::covering(2.0 * T_max, dt); }
  TimeGrid space_grid() const { return TimeGrid::covering(L, dt); }
};

RunConfig parse_config(std::string_view text, const std::filesystem::path& base_dir = ".");
RunConfig load_config(const std::filesystem::path& path);

/// Basis node indices selected by a `horizons` setting.
std::vector<int> resolve_horizons(const std::string& setting, const ControlBasis& basis);

/// Reads a kernel table (t, N, N1, N2, N3).
KernelTable read_kernel_table(const std::filesystem::path& path);

}  // namespace viscoid
