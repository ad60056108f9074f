#include "viscoid/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "viscoid/errors.hpp"

namespace viscoid {

KernelTable tabulate_kernel(const TimeGrid& grid, const std::function<double(double)>& N,
                            const std::function<double(double)>& N1,
                            const std::function<double(double)>& N2,
                            const std::function<double(double)>& N3) {
  return KernelTable{grid, Sampled1D::sample(grid, N).data(), Sampled1D::sample(grid, N1).data(),
                     Sampled1D::sample(grid, N2).data(), Sampled1D::sample(grid, N3).data()};
}

KernelSpec KernelSpec::constant_one() { return KernelSpec{}; }

KernelSpec KernelSpec::exponential(double rate) {
  if (!std::isfinite(rate)) throw ValidationError("exponential kernel rate must be finite");
  KernelSpec s;
  s.kind = KernelKind::exponential;
  s.rate = rate;
  return s;
}

KernelSpec KernelSpec::tabulated(KernelTable table, bool auto_normalize) {
  KernelSpec s;
  s.kind = KernelKind::tabulated;
  s.table = std::move(table);
  s.auto_normalize = auto_normalize;
  return s;
}

std::string KernelSpec::describe() const {
  switch (kind) {
    case KernelKind::constant_one:
      return "one";
    case KernelKind::exponential: {
      std::ostringstream os;
      os.precision(17);
      os << "exp:" << rate;
      return os.str();
    }
    case KernelKind::tabulated:
      return "table";
  }
  return "unknown";
}

MemoryKernel MemoryKernel::truncated(int steps) const {
  MemoryKernel out = *this;
  out.N = N.truncated(steps);
  out.N1 = N1.truncated(steps);
  out.N2 = N2.truncated(steps);
  out.N3 = N3.truncated(steps);
  out.M = M.truncated(steps);
  return out;
}

namespace {

MemoryKernel from_table(const KernelSpec& spec) {
  const KernelTable& tab = spec.table;
  const auto n = static_cast<std::size_t>(tab.grid.nodes());
  if (tab.N.size() != n) throw ValidationError("kernel table: N has the wrong length");
  if (tab.N1.size() != n || tab.N2.size() != n || tab.N3.size() != n) {
    throw ValidationError("kernel table must provide N', N'' and N''' samples");
  }
  const double n0 = tab.N[0];
  if (!(n0 > 0.0)) throw ValidationError("kernel table: N(0) must be positive");
  double scale = 1.0;
  double dt = tab.grid.dt();
  if (std::abs(n0 - 1.0) > 1e-12) {
    if (!spec.auto_normalize) {
      throw ValidationError("kernel table: N(0) = " + std::to_string(n0) +
                            " != 1 and normalization was not requested");
    }
    // t = tau / sqrt(c) turns w_t = N * Lw into w_tau = Nhat * Lw with
    // Nhat(tau) = N(tau / sqrt(c)) / c.
    scale = std::sqrt(n0);
    dt *= scale;
  }
  const TimeGrid g(dt, tab.grid.steps());
  auto rescaled = [&](const std::vector<double>& v, double power) {
    const double f = 1.0 / (n0 * std::pow(scale, power));
    std::vector<double> out(v);
    if (scale != 1.0)
      for (double& x : out) x *= f;
    return Sampled1D(g, std::move(out));
  };
  MemoryKernel k;
  k.kind = KernelKind::tabulated;
  k.description = spec.describe();
  k.time_scale = scale;
  k.N = rescaled(tab.N, 0.0);
  k.N1 = rescaled(tab.N1, 1.0);
  k.N2 = rescaled(tab.N2, 2.0);
  k.N3 = rescaled(tab.N3, 3.0);
  k.M = cumulative_integral(k.N);
  return k;
}

}  // namespace

MemoryKernel build_kernel(const KernelSpec& spec) {
  if (spec.kind != KernelKind::tabulated) {
    throw ValidationError("analytic kernels need an explicit grid");
  }
  return from_table(spec);
}

MemoryKernel build_kernel(const KernelSpec& spec, const TimeGrid& grid) {
  if (spec.kind == KernelKind::tabulated) {
    MemoryKernel k = from_table(spec);
    detail::require_same_step(k.grid(), grid, "tabulated kernel");
    if (k.grid().steps() < grid.steps()) {
      throw ValidationError("kernel table does not cover the requested grid");
    }
    return k.truncated(grid.steps());
  }
  MemoryKernel k;
  k.kind = spec.kind;
  k.description = spec.describe();
  if (spec.kind == KernelKind::constant_one) {
    k.N = Sampled1D::constant(grid, 1.0);
    k.N1 = Sampled1D::zeros(grid);
    k.N2 = Sampled1D::zeros(grid);
    k.N3 = Sampled1D::zeros(grid);
    k.M = Sampled1D::sample(grid, [](double t) { return t; });
    return k;
  }
  const double a = spec.rate;
  k.N = Sampled1D::sample(grid, [a](double t) { return std::exp(-a * t); });
  k.N1 = Sampled1D::sample(grid, [a](double t) { return -a * std::exp(-a * t); });
  k.N2 = Sampled1D::sample(grid, [a](double t) { return a * a * std::exp(-a * t); });
  k.N3 = Sampled1D::sample(grid, [a](double t) { return -a * a * a * std::exp(-a * t); });
  if (a == 0.0) {
    k.M = Sampled1D::sample(grid, [](double t) { return t; });
  } else {
    k.M = Sampled1D::sample(grid, [a](double t) { return -std::expm1(-a * t) / a; });
  }
  return k;
}

Sampled1D solve_volterra(const Sampled1D& kernel, const Sampled1D& rhs) {
  if (!(kernel.grid() == rhs.grid())) throw StructuralError("solve_volterra: grid mismatch");
  const double dt = rhs.grid().dt();
  const auto kv = kernel.values();
  const auto f = rhs.values();
  const double diag = 1.0 + 0.5 * dt * kv[0];
  if (std::abs(diag) < 1e-12) {
    throw NumericalFailure("solve_volterra: degenerate diagonal 1 + k(0) dt / 2 = " +
                           std::to_string(diag));
  }
  std::vector<double> v(f.size());
  v[0] = f[0];
  for (std::size_t n = 1; n < f.size(); ++n) {
    double acc = 0.5 * kv[n] * v[0];
    for (std::size_t j = 1; j < n; ++j) acc += kv[n - j] * v[j];
    v[n] = (f[n] - dt * acc) / diag;
  }
  return Sampled1D(rhs.grid(), std::move(v));
}

ResolventData resolvent(const MemoryKernel& k) {
  const TimeGrid& g = k.grid();
  ResolventData out;
  out.R = solve_volterra(k.N1, k.N1);
  const double r0 = out.R[0];
  // Differentiating R + N1 * R = N1 (and using (N1 * R)' = N1 R(0) + N1 * R')
  // keeps the same Volterra operator for R' and R''.
  std::vector<double> rhs1(static_cast<std::size_t>(g.nodes()));
  for (int n = 0; n < g.nodes(); ++n) rhs1[static_cast<std::size_t>(n)] = k.N2[n] - r0 * k.N1[n];
  out.R1 = solve_volterra(k.N1, Sampled1D(g, std::move(rhs1)));
  const double r1_0 = out.R1[0];
  std::vector<double> rhs2(static_cast<std::size_t>(g.nodes()));
  for (int n = 0; n < g.nodes(); ++n) {
    rhs2[static_cast<std::size_t>(n)] = k.N3[n] - r0 * k.N2[n] - r1_0 * k.N1[n];
  }
  out.R2deriv = solve_volterra(k.N1, Sampled1D(g, std::move(rhs2)));

  out.gamma = 0.5 * r0;
  out.alpha = r1_0 + 0.25 * r0 * r0;
  const double gamma = out.gamma;
  std::vector<double> weighted(static_cast<std::size_t>(g.nodes()));
  for (int n = 0; n < g.nodes(); ++n) {
    weighted[static_cast<std::size_t>(n)] = std::exp(-gamma * g.t(n)) * out.R2deriv[n];
  }
  out.K = Sampled1D(g, std::move(weighted));
  out.R2 = out.K;

  const Sampled1D conv = causal_convolve(k.N1, out.R);
  double res = 0.0;
  for (int n = 0; n < g.nodes(); ++n) res = std::max(res, std::abs(out.R[n] + conv[n] - k.N1[n]));
  out.residual = res;
  return out;
}

Sampled1D response_to_traction(const Sampled1D& y, const MemoryKernel& k) {
  detail::require_same_step(y.grid(), k.grid(), "response_to_traction");
  if (k.grid().steps() < y.grid().steps()) throw StructuralError("kernel shorter than response");
  std::vector<double> out(static_cast<std::size_t>(y.size()));
  detail::convolve_into(k.N.values(), y.values(), y.grid().dt(), out);
  for (double& v : out) v = -v;
  return Sampled1D(y.grid(), std::move(out));
}

Sampled1D derivative(const Sampled1D& f) {
  const int n = f.grid().steps();
  const double dt = f.grid().dt();
  std::vector<double> d(static_cast<std::size_t>(f.size()), 0.0);
  if (n == 0) return Sampled1D(f.grid(), std::move(d));
  if (n == 1) {
    d[0] = d[1] = (f[1] - f[0]) / dt;
    return Sampled1D(f.grid(), std::move(d));
  }
  d[0] = (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * dt);
  for (int k = 1; k < n; ++k) d[static_cast<std::size_t>(k)] = (f[k + 1] - f[k - 1]) / (2.0 * dt);
  d[static_cast<std::size_t>(n)] = (3.0 * f[n] - 4.0 * f[n - 1] + f[n - 2]) / (2.0 * dt);
  return Sampled1D(f.grid(), std::move(d));
}

Sampled1D traction_to_response(const Sampled1D& sigma, const MemoryKernel& k) {
  detail::require_same_step(sigma.grid(), k.grid(), "traction_to_response");
  if (k.grid().steps() < sigma.grid().steps()) throw StructuralError("kernel shorter than traction");
  if (std::abs(sigma[0]) > 1e-12 * std::max(1.0, sigma.max_abs())) {
    throw ValidationError("traction must start from rest: sigma(0) != 0");
  }
  const Sampled1D rhs = derivative(sigma).scaled(-1.0);
  return solve_volterra(k.N1.truncated(sigma.grid().steps()), rhs);
}

}  // namespace viscoid
