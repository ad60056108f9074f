#include "viscoid/forward.hpp"

#include <algorithm>
#include <cmath>

#include "viscoid/errors.hpp"

namespace viscoid {

TimeGrid StringProblem::time_grid() const { return TimeGrid::covering(T, space_grid().dt()); }

StringProblem make_problem(double L, double T, double dt, const std::function<double(double)>& q,
                           const KernelSpec& kernel) {
  if (T > L * (1.0 + 1e-12)) throw ValidationError("horizon T exceeds the string length L");
  StringProblem p;
  p.L = L;
  p.T = T;
  const TimeGrid sgrid = TimeGrid::covering(L, dt);
  p.q = Sampled1D::sample(sgrid, q);
  p.kernel = build_kernel(kernel, TimeGrid::covering(T, dt));
  return p;
}

namespace {

struct Prepared {
  TimeGrid tgrid;
  Sampled1D f;
  MemoryKernel kernel;
};

Prepared prepare(const StringProblem& p, const Sampled1D& f) {
  if (p.T > p.L * (1.0 + 1e-12)) throw ValidationError("horizon T exceeds the string length L");
  const TimeGrid tgrid = p.time_grid();
  detail::require_same_step(p.space_grid(), f.grid(), "control");
  detail::require_same_step(p.space_grid(), p.kernel.grid(), "kernel");
  if (f.grid().steps() < tgrid.steps()) throw ValidationError("control does not cover [0, T]");
  if (p.kernel.grid().steps() < tgrid.steps()) throw ValidationError("kernel does not cover [0, T]");
  if (std::abs(p.L - p.space_grid().t_max()) > 1e-9 * p.L) {
    throw ValidationError("space grid does not span [0, L]");
  }
  Prepared out{tgrid, f.truncated(tgrid.steps()), p.kernel.truncated(tgrid.steps())};
  if (std::abs(out.f[0]) > 1e-10 * std::max(1.0, out.f.max_abs())) {
    throw ValidationError("control must vanish at t = 0");
  }
  return out;
}

}  // namespace

WaveField solve_mild(const StringProblem& p, const Sampled1D& f) {
  const Prepared prep = prepare(p, f);
  return solve_mild(p, f, resolvent(prep.kernel));
}

WaveField solve_mild(const StringProblem& p, const Sampled1D& f, const ResolventData& res) {
  const Prepared prep = prepare(p, f);
  const TimeGrid& tg = prep.tgrid;
  const TimeGrid& sg = p.space_grid();
  const int nt = tg.steps();
  const int ns = sg.steps();
  const double dt = tg.dt();
  const auto tn = static_cast<std::size_t>(nt + 1);
  if (res.K.size() < nt + 1) throw StructuralError("resolvent data shorter than the horizon");

  std::vector<double> g(tn);
  for (int k = 0; k <= nt; ++k) g[static_cast<std::size_t>(k)] = std::exp(-res.gamma * tg.t(k)) * prep.f[k];
  const auto K = res.K.values();
  const bool has_memory = res.K.truncated(nt).max_abs() > 0.0;

  Sampled2D W(sg, tg);
  Sampled2D F(sg, tg);
  auto Wv = W.values();
  auto Fv = F.values();
  // Values ahead of the wavefront are zero; padding the marcher to ns + nt
  // keeps every triangle inside its width.
  TriangleMarcher marcher(ns + nt, nt + 1, dt);
  std::vector<double> Q(static_cast<std::size_t>(ns + 1), 0.0);
  std::vector<double> row(static_cast<std::size_t>(ns + 1));

  for (int k = 0; k <= nt; ++k) {
    if (k > 0) marcher.level(Q);
    for (int i = 0; i <= ns; ++i) {
      const double free = i <= k ? g[static_cast<std::size_t>(k - i)] : 0.0;
      W.at(i, k) = free + Q[static_cast<std::size_t>(i)];
    }
    for (int i = 0; i <= ns; ++i) {
      const std::size_t base = static_cast<std::size_t>(i) * tn;
      double value = (p.q[i] + res.alpha) * Wv[base + static_cast<std::size_t>(k)];
      if (has_memory) value += detail::convolve_at(K, Wv.subspan(base, tn), dt, k);
      Fv[base + static_cast<std::size_t>(k)] = value;
      row[static_cast<std::size_t>(i)] = value;
    }
    if (k < nt) marcher.push_row(row);
  }

  WaveField out;
  out.gamma = res.gamma;
  out.f = prep.f;
  out.w = Sampled2D(sg, tg);
  for (int i = 0; i <= ns; ++i)
    for (int k = 0; k <= nt; ++k) out.w.at(i, k) = std::exp(res.gamma * tg.t(k)) * W.at(i, k);
  out.W = std::move(W);
  out.F = std::move(F);
  out.y = response(p, prep.f, out);
  out.sigma = response_to_traction(out.y, prep.kernel);
  return out;
}

Sampled1D response(const StringProblem& p, const Sampled1D& f, const WaveField& field) {
  const TimeGrid& tg = field.F.tgrid();
  const int nt = tg.steps();
  if (field.F.s_nodes() < nt + 1) throw StructuralError("response needs T <= L");
  detail::require_same_step(tg, f.grid(), "response control");
  (void)p;
  const Sampled1D fk = f.truncated(nt);
  const Sampled1D df = derivative(fk);
  const double dt = tg.dt();
  std::vector<double> y(static_cast<std::size_t>(nt + 1));
  for (int k = 0; k <= nt; ++k) {
    // Trapezoid along the incoming characteristic xi + tau = t_k.
    double acc = 0.0;
    if (k > 0) {
      acc = 0.5 * (field.F.at(0, k) + field.F.at(k, 0));
      for (int n = 1; n < k; ++n) acc += field.F.at(n, k - n);
      acc *= dt;
    }
    y[static_cast<std::size_t>(k)] =
        field.gamma * fk[k] - df[k] + std::exp(field.gamma * tg.t(k)) * acc;
  }
  return Sampled1D(tg, std::move(y));
}

Sampled1D final_snapshot(const WaveField& field, double T) {
  const TimeGrid& tg = field.w.tgrid();
  const double pos = T / tg.dt();
  const int k = static_cast<int>(std::lround(pos));
  if (std::abs(pos - k) > 1e-9 * std::max(1.0, pos) || k < 0 || k > tg.steps()) {
    throw ValidationError("snapshot time is not a node of the field's time grid");
  }
  const Sampled1D slice = field.w.s_slice(k);
  const int cells = static_cast<int>(std::lround(T / field.w.sgrid().dt()));
  return slice.truncated(std::min(cells, slice.grid().steps()));
}

double interpolate(const Sampled1D& v, double x) {
  const TimeGrid& g = v.grid();
  if (g.steps() == 0) return v[0];
  const double pos = std::clamp(x / g.dt(), 0.0, static_cast<double>(g.steps()));
  const int i = std::min(static_cast<int>(pos), g.steps() - 1);
  const double frac = pos - i;
  return (1.0 - frac) * v[i] + frac * v[i + 1];
}

WaveField fd_oracle(const StringProblem& p, const Sampled1D& f) {
  return fd_oracle(p, f, p.space_grid().dt());
}

WaveField fd_oracle(const StringProblem& p, const Sampled1D& f, double dx) {
  const Prepared prep = prepare(p, f);
  const TimeGrid& tg = prep.tgrid;
  const double dt = tg.dt();
  if (dt > dx * (1.0 + 1e-12)) throw ValidationError("CFL condition violated: dt > dx");
  const TimeGrid xg = TimeGrid::covering(p.L, dx);
  const int nx = xg.steps();
  const int nt = tg.steps();
  if (nx < 2) throw ValidationError("fd_oracle needs at least two space cells");
  const auto tn = static_cast<std::size_t>(nt + 1);

  std::vector<double> q(static_cast<std::size_t>(nx + 1));
  for (int i = 0; i <= nx; ++i) q[static_cast<std::size_t>(i)] = interpolate(p.q, xg.t(i));
  const auto N1 = prep.kernel.N1.values();
  const bool has_memory = prep.kernel.N1.max_abs() > 0.0;

  Sampled2D w(xg, tg);
  std::vector<double> v(static_cast<std::size_t>(nx + 1) * tn, 0.0);
  const double inv_dx2 = 1.0 / (dx * dx);
  for (int k = 0; k <= nt; ++k) w.at(0, k) = prep.f[k];

  std::vector<double> acc(static_cast<std::size_t>(nx + 1), 0.0);
  for (int k = 0; k < nt; ++k) {
    for (int i = 1; i < nx; ++i) {
      const std::size_t base = static_cast<std::size_t>(i) * tn;
      const double lap = (w.at(i + 1, k) - 2.0 * w.at(i, k) + w.at(i - 1, k)) * inv_dx2;
      v[base + static_cast<std::size_t>(k)] = lap + q[static_cast<std::size_t>(i)] * w.at(i, k);
      double a = v[base + static_cast<std::size_t>(k)];
      if (has_memory) a += detail::convolve_at(N1, std::span<const double>(v).subspan(base, tn), dt, k);
      acc[static_cast<std::size_t>(i)] = a;
    }
    for (int i = 1; i < nx; ++i) {
      const double a = acc[static_cast<std::size_t>(i)];
      // Zero initial velocity gives the Taylor start at the first step.
      w.at(i, k + 1) = k == 0 ? w.at(i, 0) + 0.5 * dt * dt * a
                              : 2.0 * w.at(i, k) - w.at(i, k - 1) + dt * dt * a;
    }
  }

  const ResolventData res = resolvent(prep.kernel);
  WaveField out;
  out.gamma = res.gamma;
  out.f = prep.f;
  out.W = Sampled2D(xg, tg);
  for (int i = 0; i <= nx; ++i)
    for (int k = 0; k <= nt; ++k) out.W.at(i, k) = std::exp(-res.gamma * tg.t(k)) * w.at(i, k);
  std::vector<double> y(tn);
  for (int k = 0; k <= nt; ++k) {
    y[static_cast<std::size_t>(k)] = (-3.0 * w.at(0, k) + 4.0 * w.at(1, k) - w.at(2, k)) / (2.0 * dx);
  }
  out.w = std::move(w);
  out.y = Sampled1D(tg, std::move(y));
  out.sigma = response_to_traction(out.y, prep.kernel);
  return out;
}

}  // namespace viscoid
