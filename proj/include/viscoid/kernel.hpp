#pragma once

#include <string>
#include <vector>

#include "viscoid/grid.hpp"

namespace viscoid {

enum class KernelKind { constant_one, exponential, tabulated };

/// Samples of N and its first three derivatives on a uniform grid.
struct KernelTable {
  TimeGrid grid;
  std::vector<double> N, N1, N2, N3;
};

/// Samples N and its derivatives on `grid` from closed forms.
KernelTable tabulate_kernel(const TimeGrid& grid, const std::function<double(double)>& N,
                            const std::function<double(double)>& N1,
                            const std::function<double(double)>& N2,
                            const std::function<double(double)>& N3);

/// Description of a relaxation kernel N(t).
struct KernelSpec {
  KernelKind kind = KernelKind::constant_one;
  double rate = 0.0;  // exponential: N(t) = exp(-rate t)
  KernelTable table;
  // Tabulated only: accept N(0) != 1 by rescaling time so that N(0) = 1.
  bool auto_normalize = false;

  static KernelSpec constant_one();
  static KernelSpec exponential(double rate);
  static KernelSpec tabulated(KernelTable table, bool auto_normalize = false);

  /// Short tag used in manifests: "one", "exp:<rate>", "table".
  std::string describe() const;
};

/// Relaxation kernel sampled with its derivatives N1 = N', N2 = N'', N3 = N'''
/// and M(t) = int_0^t N. N(0) = 1 always holds.
struct MemoryKernel {
  KernelKind kind = KernelKind::constant_one;
  std::string description;
  // Time units of this kernel per unit of the tabulated input; 1 unless the
  // input was normalized.
  double time_scale = 1.0;
  Sampled1D N, N1, N2, N3, M;

  const TimeGrid& grid() const { return N.grid(); }
  /// Prefix on the first `steps` steps.
  MemoryKernel truncated(int steps) const;
};

MemoryKernel build_kernel(const KernelSpec& spec, const TimeGrid& grid);
/// Tabulated kernels on their own (possibly rescaled) grid.
MemoryKernel build_kernel(const KernelSpec& spec);

/// Resolvent R of N1 (R + N1 * R = N1), its derivatives, and the constants
/// of the exponential substitution w = exp(gamma t) W.
struct ResolventData {
  Sampled1D R;
  Sampled1D R1;       // R'
  Sampled1D R2deriv;  // R''
  double gamma = 0.0;  // R(0) / 2
  double alpha = 0.0;  // R'(0) + R(0)^2 / 4
  Sampled1D K;   // exp(-gamma t) R''(t), memory kernel of the transformed string
  Sampled1D R2;  // same samples as K; the name used by the connecting module
  double residual = 0.0;  // max |R + N1 * R - N1| on the grid
};

/// Trapezoidal forward substitution for v + kernel * v = rhs.
Sampled1D solve_volterra(const Sampled1D& kernel, const Sampled1D& rhs);

ResolventData resolvent(const MemoryKernel& k);

/// sigma = -(N * y), the traction at x = 0 produced by the response y.
Sampled1D response_to_traction(const Sampled1D& y, const MemoryKernel& k);

/// Inverse of response_to_traction: y + N1 * y = -sigma'.
Sampled1D traction_to_response(const Sampled1D& sigma, const MemoryKernel& k);

/// Centered differences in the interior, second-order one-sided at the ends.
Sampled1D derivative(const Sampled1D& f);

}  // namespace viscoid
