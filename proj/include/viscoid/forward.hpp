#pragma once

#include "viscoid/grid.hpp"
#include "viscoid/kernel.hpp"

namespace viscoid {

/// The string on [0, L] driven at x = 0 up to time T <= L. q is sampled on the
/// space grid, whose step is also the time step.
struct StringProblem {
  double L = 1.0;
  Sampled1D q;
  MemoryKernel kernel;
  double T = 1.0;

  const TimeGrid& space_grid() const { return q.grid(); }
  TimeGrid time_grid() const;
};

/// Builds a problem with dt-spaced space and time grids. The kernel is built on
/// the time grid [0, T].
StringProblem make_problem(double L, double T, double dt, const std::function<double(double)>& q,
                           const KernelSpec& kernel);

struct WaveField {
  Sampled2D W;      // transformed field exp(-gamma t) w
  Sampled2D w;      // physical field
  Sampled2D F;      // forcing (q + alpha) W + K *_t W of the transformed equation
  Sampled1D f;      // control
  Sampled1D y;      // w_x(0, t)
  Sampled1D sigma;  // traction at x = 0
  double gamma = 0.0;
};

/// Marches W = g(t - x) + 1/2 int_D F level by level. Every node of the space
/// grid is computed, including those ahead of the wavefront.
WaveField solve_mild(const StringProblem& p, const Sampled1D& f);
/// Same, with caller-supplied resolvent data (used by mutation tests).
WaveField solve_mild(const StringProblem& p, const Sampled1D& f, const ResolventData& res);

/// w_x(0, t) from the analytic x-derivative of the characteristic representation.
Sampled1D response(const StringProblem& p, const Sampled1D& f, const WaveField& field);

/// w(., T) on [0, T]; T must be a node of the time grid.
Sampled1D final_snapshot(const WaveField& field, double T);

/// Explicit leapfrog for w_tt = v + N1 * v, v = w_xx + q w, with Dirichlet ends.
/// `dx` may be coarser than the time step; q is resampled on the dx grid by
/// linear interpolation. The response is a one-sided three-point difference.
WaveField fd_oracle(const StringProblem& p, const Sampled1D& f, double dx);
WaveField fd_oracle(const StringProblem& p, const Sampled1D& f);

/// Linear interpolation of a sampled function at x (clamped to the extent).
double interpolate(const Sampled1D& v, double x);

}  // namespace viscoid
