#include "viscoid/connecting.hpp"

#include <cmath>
#include <string>

#include "viscoid/errors.hpp"
#include "viscoid/parallel.hpp"

namespace viscoid {

// ---------------------------------------------------------------- basis

ControlBasis ControlBasis::hats(const TimeGrid& grid, int n) {
  const int m = grid.steps();
  if (n < 1) throw ValidationError("control basis needs at least one hat");
  if (n + 1 > m) throw ValidationError("more hats than grid cells");
  ControlBasis b;
  b.grid = grid;
  b.nodes.resize(static_cast<std::size_t>(n + 2));
  for (int j = 0; j <= n + 1; ++j) {
    b.nodes[static_cast<std::size_t>(j)] =
        static_cast<int>(std::lround(static_cast<double>(j) * m / (n + 1)));
  }
  b.amplitude.assign(static_cast<std::size_t>(n), 1.0);
  return b;
}

Sampled1D ControlBasis::function(int j) const { return function(j, grid); }

Sampled1D ControlBasis::function(int j, const TimeGrid& on) const {
  if (j < 0 || j >= size()) throw std::out_of_range("hat index out of range");
  detail::require_same_step(grid, on, "control basis");
  const auto uj = static_cast<std::size_t>(j);
  const int a = nodes[uj], c = nodes[uj + 1], e = nodes[uj + 2];
  const double amp = amplitude[uj];
  std::vector<double> v(static_cast<std::size_t>(on.nodes()), 0.0);
  for (int p = a; p <= std::min(e, on.steps()); ++p) {
    const double x = p <= c ? static_cast<double>(p - a) / (c - a) : static_cast<double>(e - p) / (e - c);
    v[static_cast<std::size_t>(p)] = amp * x;
  }
  return Sampled1D(on, std::move(v));
}

ControlBasis ControlBasis::scaled(int j, double factor) const {
  ControlBasis out = *this;
  out.amplitude.at(static_cast<std::size_t>(j)) *= factor;
  return out;
}

Eigen::MatrixXd ControlBasis::mass_matrix(int count) const {
  if (count < 0 || count > size()) throw std::out_of_range("mass matrix size");
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(count, count);
  auto h = [&](int cell) {
    return (nodes[static_cast<std::size_t>(cell + 1)] - nodes[static_cast<std::size_t>(cell)]) *
           grid.dt();
  };
  for (int j = 0; j < count; ++j) {
    const double aj = amplitude[static_cast<std::size_t>(j)];
    M(j, j) = aj * aj * (h(j) + h(j + 1)) / 3.0;
    if (j + 1 < count) {
      const double off = aj * amplitude[static_cast<std::size_t>(j + 1)] * h(j + 1) / 6.0;
      M(j, j + 1) = off;
      M(j + 1, j) = off;
    }
  }
  return M;
}

std::vector<int> default_horizons(const ControlBasis& basis) {
  std::vector<int> out;
  for (int k = 4; k <= basis.size() + 1; ++k) out.push_back(k);
  return out;
}

TimeGrid ResponseTable::data_grid() const { return TimeGrid(basis.grid.dt(), 2 * basis.grid.steps()); }

void ResponseTable::validate() const {
  const TimeGrid g = data_grid();
  if (static_cast<int>(Y.size()) != basis.size()) {
    throw StructuralError("response table has " + std::to_string(Y.size()) + " rows for " +
                          std::to_string(basis.size()) + " basis functions");
  }
  for (const auto& row : Y) {
    if (!(row.grid() == g)) throw StructuralError("response rows must cover [0, 2 T_max]");
  }
  detail::require_same_step(kernel.grid(), g, "response kernel");
  if (kernel.grid().steps() < g.steps()) throw StructuralError("kernel does not cover [0, 2 T_max]");
}

// ---------------------------------------------------------------- Blago chain

namespace {

Sampled1D fit(const Sampled1D& v, const TimeGrid& g) {
  detail::require_same_step(v.grid(), g, "separable factor");
  if (v.grid().steps() >= g.steps()) return v.truncated(g.steps());
  return v.extended(g);
}

Sampled1D convolve_kernel(const Sampled1D& kernel, const Sampled1D& h) {
  std::vector<double> out(static_cast<std::size_t>(h.size()));
  detail::convolve_into(kernel.values(), h.values(), h.grid().dt(), out);
  return Sampled1D(h.grid(), std::move(out));
}

Sampled1D memory_factor(const Sampled1D& base, bool memory, const MemoryKernel* k) {
  if (!memory) return base;
  if (k == nullptr) throw StructuralError("separable field needs its kernel");
  return convolve_kernel(k->N, base);
}

// (I - R*)(h + N1 * h) exp(-gamma t): the derivative of N * h pushed through
// the resolvent and the exponential substitution of one variable.
Sampled1D chain_factor(const Sampled1D& base, const ResolventData& res, const MemoryKernel& k) {
  const Sampled1D d = base + convolve_kernel(k.N1, base);
  const Sampled1D p = d - convolve_kernel(res.R, d);
  std::vector<double> v(p.data());
  for (int n = 0; n < p.size(); ++n) v[static_cast<std::size_t>(n)] *= std::exp(-res.gamma * p.grid().t(n));
  return Sampled1D(p.grid(), std::move(v));
}

}  // namespace

Sampled2D Separable2D::materialize() const {
  Sampled2D out(sgrid, tgrid);
  for (const auto& term : terms) {
    const Sampled1D a = memory_factor(term.t_base, term.t_memory, kernel);
    const Sampled1D b = memory_factor(term.s_base, term.s_memory, kernel);
    for (int i = 0; i < out.s_nodes(); ++i)
      for (int k = 0; k < out.t_nodes(); ++k) out.at(i, k) += b[i] * a[k];
  }
  return out;
}

Separable2D phi(const Sampled1D& f, const Sampled1D& g, const Sampled1D& yf, const Sampled1D& yg,
                const MemoryKernel& k, const TimeGrid& sgrid, const TimeGrid& tgrid) {
  detail::require_same_step(sgrid, tgrid, "phi grids");
  if (k.grid().steps() < std::max(sgrid.steps(), tgrid.steps())) {
    throw StructuralError("kernel does not cover the phi grids");
  }
  Separable2D out;
  out.sgrid = sgrid;
  out.tgrid = tgrid;
  out.kernel = &k;
  out.terms.push_back({fit(f, tgrid), fit(yg, sgrid), true, false});
  out.terms.push_back({fit(yf, tgrid).scaled(-1.0), fit(g, sgrid), true, false});
  return out;
}

Separable2D psi(const Separable2D& phi_field, const MemoryKernel& k) {
  Separable2D out = phi_field;
  out.kernel = &k;
  for (auto& term : out.terms) {
    if (term.s_memory) throw StructuralError("psi applied twice");
    term.s_memory = true;
  }
  return out;
}

Sampled2D affine_chain(const Separable2D& psi_field, const ResolventData& res, const MemoryKernel& k) {
  Sampled2D G(psi_field.sgrid, psi_field.tgrid);
  const int need = std::max(psi_field.sgrid.steps(), psi_field.tgrid.steps());
  if (res.R.grid().steps() < need || k.grid().steps() < need) {
    throw StructuralError("resolvent does not cover the affine-term grids");
  }
  const MemoryKernel kk = k.truncated(need);
  ResolventData rr = res;
  rr.R = res.R.truncated(need);
  for (const auto& term : psi_field.terms) {
    if (!term.t_memory || !term.s_memory) {
      throw StructuralError("affine chain needs both factors in convolution form");
    }
    const Sampled1D a = chain_factor(term.t_base, rr, kk);
    const Sampled1D b = chain_factor(term.s_base, rr, kk);
    for (int i = 0; i < G.s_nodes(); ++i)
      for (int t = 0; t < G.t_nodes(); ++t) G.at(i, t) += b[i] * a[t];
  }
  return G;
}

// ---------------------------------------------------------------- solver

namespace {

void finish(BlagoSolution& sol, double gamma) {
  const TimeGrid& sg = sol.W.sgrid();
  const TimeGrid& tg = sol.W.tgrid();
  sol.H = Sampled2D(sg, tg);
  for (int i = 0; i < sol.W.s_nodes(); ++i)
    for (int k = 0; k < sol.W.t_nodes(); ++k)
      sol.H.at(i, k) = std::exp(gamma * (sg.t(i) + tg.t(k))) * sol.W.at(i, k);
}

// Memory part of the integrand at level k for s indices 0..last:
// (K *_tau W)(xi, tau_k) - (K *_xi W)(xi, tau_k).
void memory_row(std::span<const double> K, const Sampled2D& W, std::span<const double> level,
                int k, int last, double dt, std::span<double> out) {
  const auto tn = static_cast<std::size_t>(W.t_nodes());
  const auto Wv = W.values();
  for (int i = 0; i <= last; ++i) {
    const auto base = static_cast<std::size_t>(i) * tn;
    const double along_t = detail::convolve_at(K, Wv.subspan(base, tn), dt, k);
    const double along_s = detail::convolve_at(K, level, dt, i);
    out[static_cast<std::size_t>(i)] = along_t - along_s;
  }
}

BlagoSolution march(const Sampled2D& G, const ResolventData& res) {
  const int ns = G.sgrid().steps();
  const int nt = G.tgrid().steps();
  const double dt = G.tgrid().dt();
  const auto K = res.R2.values();
  const bool memory = res.R2.truncated(ns).max_abs() > 0.0;

  BlagoSolution sol;
  sol.W = Sampled2D(G.sgrid(), G.tgrid());
  TriangleMarcher marcher(ns, nt + 1, dt);
  std::vector<double> level(static_cast<std::size_t>(ns + 1), 0.0);
  std::vector<double> row(static_cast<std::size_t>(ns + 1), 0.0);
  for (int k = 0; k <= nt; ++k) {
    const int last = ns - k;
    auto lvl = std::span<double>(level).first(static_cast<std::size_t>(last + 1));
    if (k > 0) marcher.level(lvl);
    for (int i = 0; i <= last; ++i) sol.W.at(i, k) = lvl[static_cast<std::size_t>(i)];
    if (k == nt) break;
    auto r = std::span<double>(row).first(static_cast<std::size_t>(last + 1));
    if (memory) {
      memory_row(K, sol.W, lvl, k, last, dt, r);
    } else {
      std::fill(r.begin(), r.end(), 0.0);
    }
    for (int i = 0; i <= last; ++i) r[static_cast<std::size_t>(i)] += G.at(i, k);
    marcher.push_row(r);
  }
  sol.sweeps = 1;
  return sol;
}

// Jacobi sweeps on Y = exp(-sigma (s + t)) W. Level k of a sweep only reads
// levels < k of the previous iterate, so the iteration terminates after at
// most nt + 1 sweeps.
BlagoSolution picard(const Sampled2D& G, const ResolventData& res, const BlagoOptions& opt) {
  const int ns = G.sgrid().steps();
  const int nt = G.tgrid().steps();
  const double dt = G.tgrid().dt();
  const double sigma = opt.sigma_weight;
  const TimeGrid& sg = G.sgrid();
  const TimeGrid& tg = G.tgrid();
  const int max_sweeps = opt.max_sweeps > 0 ? opt.max_sweeps : nt + 2;

  std::vector<double> Ks(static_cast<std::size_t>(ns + 1));
  for (int n = 0; n <= ns; ++n) Ks[static_cast<std::size_t>(n)] = std::exp(-sigma * sg.t(n)) * res.R2[n];
  const bool memory = res.R2.truncated(ns).max_abs() > 0.0;

  Sampled2D Y(sg, tg);
  Sampled2D next(sg, tg);
  std::vector<double> level(static_cast<std::size_t>(ns + 1));
  std::vector<double> row(static_cast<std::size_t>(ns + 1));
  BlagoSolution sol;
  for (int sweep = 1; sweep <= max_sweeps; ++sweep) {
    TriangleMarcher marcher(ns, nt + 1, dt);
    for (int k = 0; k <= nt; ++k) {
      const int last = ns - k;
      auto lvl = std::span<double>(level).first(static_cast<std::size_t>(last + 1));
      std::fill(lvl.begin(), lvl.end(), 0.0);
      if (k > 0) marcher.level(lvl);
      for (int i = 0; i <= last; ++i) {
        next.at(i, k) = std::exp(-sigma * (sg.t(i) + tg.t(k))) * lvl[static_cast<std::size_t>(i)];
      }
      if (k == nt) break;
      auto r = std::span<double>(row).first(static_cast<std::size_t>(last + 1));
      if (memory) {
        for (int i = 0; i <= last; ++i) level[static_cast<std::size_t>(i)] = Y.at(i, k);
        memory_row(Ks, Y, lvl, k, last, dt, r);
        for (int i = 0; i <= last; ++i) {
          r[static_cast<std::size_t>(i)] *= std::exp(sigma * (sg.t(i) + tg.t(k)));
        }
      } else {
        std::fill(r.begin(), r.end(), 0.0);
      }
      for (int i = 0; i <= last; ++i) r[static_cast<std::size_t>(i)] += G.at(i, k);
      marcher.push_row(r);
    }
    double diff = 0.0, scale = 0.0;
    const auto a = next.values();
    const auto b = Y.values();
    for (std::size_t n = 0; n < a.size(); ++n) {
      diff = std::max(diff, std::abs(a[n] - b[n]));
      scale = std::max(scale, std::abs(a[n]));
    }
    std::swap(Y, next);
    sol.sweeps = sweep;
    sol.last_update = scale > 0.0 ? diff / scale : diff;
    if (!std::isfinite(diff)) throw NumericalFailure("Picard iteration diverged");
    if (diff <= opt.tolerance * scale) {
      sol.W = Sampled2D(sg, tg);
      for (int i = 0; i <= ns; ++i)
        for (int k = 0; k <= nt && i + k <= ns; ++k)
          sol.W.at(i, k) = std::exp(sigma * (sg.t(i) + tg.t(k))) * Y.at(i, k);
      return sol;
    }
  }
  throw NumericalFailure("Picard iteration did not converge in " + std::to_string(max_sweeps) +
                         " sweeps (last relative update " + std::to_string(sol.last_update) + ")");
}

}  // namespace

BlagoSolution blago_solve(const Sampled2D& G, const ResolventData& res, const BlagoOptions& opt) {
  if (!G.characteristic_aligned()) throw StructuralError("blago_solve needs a shared step");
  if (G.sgrid().steps() < G.tgrid().steps()) throw StructuralError("trapezoid needs s extent >= t extent");
  if (res.R2.size() < G.s_nodes()) throw StructuralError("resolvent data shorter than the s extent");
  BlagoSolution sol = opt.method == BlagoMethod::marching ? march(G, res) : picard(G, res, opt);
  finish(sol, res.gamma);
  return sol;
}

// ---------------------------------------------------------------- Grams

std::vector<double> pair_trace(const ResponseTable& tab, const ResolventData& res, int i, int j,
                               const BlagoOptions& opt) {
  const TimeGrid sg = tab.data_grid();
  const TimeGrid& tg = tab.basis.grid;
  const auto ui = static_cast<std::size_t>(i), uj = static_cast<std::size_t>(j);
  const Separable2D ph = phi(tab.basis.function(i), tab.basis.function(j), tab.Y.at(ui), tab.Y.at(uj),
                             tab.kernel, sg, tg);
  const Sampled2D G = affine_chain(psi(ph, tab.kernel), res, tab.kernel);
  const BlagoSolution sol = blago_solve(G, res, opt);
  std::vector<double> trace(static_cast<std::size_t>(tg.nodes()));
  for (int k = 0; k <= tg.steps(); ++k) trace[static_cast<std::size_t>(k)] = sol.H.at(k, k);
  return trace;
}

namespace {

std::vector<int> checked_horizons(const ControlBasis& basis, const std::vector<int>& requested) {
  std::vector<int> h = requested.empty() ? default_horizons(basis) : requested;
  if (h.empty()) throw ValidationError("no horizons: the default list needs at least three hats");
  for (std::size_t n = 0; n < h.size(); ++n) {
    if (h[n] < 2 || h[n] > basis.size() + 1) {
      throw ValidationError("horizon node " + std::to_string(h[n]) + " outside 2.." +
                            std::to_string(basis.size() + 1));
    }
    if (n > 0 && h[n] <= h[n - 1]) throw ValidationError("horizons must increase strictly");
  }
  return h;
}

}  // namespace

ConnectingGram gram_from_data(const ResponseTable& tab, const GramOptions& opt) {
  tab.validate();
  const int n = tab.basis.size();
  const std::vector<int> horizons = checked_horizons(tab.basis, opt.horizons);
  const int needed = horizons.back() - 1;  // hats that enter any Gram
  const ResolventData res = resolvent(tab.kernel.truncated(tab.data_grid().steps()));

  std::vector<std::pair<int, int>> pairs;
  for (int i = 0; i < needed; ++i)
    for (int j = opt.full_pairs ? 0 : i; j < needed; ++j) pairs.emplace_back(i, j);
  std::vector<std::vector<double>> traces(pairs.size());
  parallel_for(static_cast<int>(pairs.size()), opt.threads, [&](int p) {
    const auto [i, j] = pairs[static_cast<std::size_t>(p)];
    try {
      traces[static_cast<std::size_t>(p)] = pair_trace(tab, res, i, j, opt.blago);
    } catch (const NumericalFailure& e) {
      throw NumericalFailure("basis pair (" + std::to_string(i) + "," + std::to_string(j) +
                             "): " + e.what());
    }
  });
  (void)n;

  // Pair index lookup.
  std::vector<int> index(static_cast<std::size_t>(needed * needed), -1);
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    index[static_cast<std::size_t>(pairs[p].first * needed + pairs[p].second)] = static_cast<int>(p);
  }
  auto entry = [&](int a, int b, int node) {
    int p = index[static_cast<std::size_t>(a * needed + b)];
    if (p < 0) p = index[static_cast<std::size_t>(b * needed + a)];
    return traces[static_cast<std::size_t>(p)][static_cast<std::size_t>(node)];
  };

  ConnectingGram gram;
  gram.asymmetry_measured = opt.full_pairs;
  for (int h : horizons) {
    const int count = tab.basis.supported(h);
    const int node = tab.basis.nodes[static_cast<std::size_t>(h)];
    Eigen::MatrixXd C(count, count);
    for (int a = 0; a < count; ++a)
      for (int b = 0; b < count; ++b) C(a, b) = entry(a, b, node);
    if (opt.full_pairs) {
      const double norm = C.norm();
      if (norm > 0.0) gram.asymmetry = std::max(gram.asymmetry, (C - C.transpose()).norm() / norm);
    }
    gram.horizon_nodes.push_back(h);
    gram.T.push_back(tab.basis.grid.t(node));
    gram.C.push_back(0.5 * (C + C.transpose()));
  }
  return gram;
}

ConnectingGram gram_oracle(const StringProblem& p, const ControlBasis& basis, const GramOptions& opt) {
  const TimeGrid tg = p.time_grid();
  detail::require_same_step(tg, basis.grid, "oracle basis");
  if (tg.steps() < basis.grid.steps()) throw ValidationError("problem horizon shorter than T_max");
  const std::vector<int> horizons = checked_horizons(basis, opt.horizons);
  const int needed = horizons.back() - 1;
  const ResolventData res = resolvent(p.kernel.truncated(tg.steps()));

  // snaps[j][h] = w^{e_j}(., T_h) on [0, T_h]
  std::vector<std::vector<Sampled1D>> snaps(static_cast<std::size_t>(needed));
  parallel_for(needed, opt.threads, [&](int j) {
    const WaveField field = solve_mild(p, basis.function(j, tg), res);
    auto& out = snaps[static_cast<std::size_t>(j)];
    for (int h : horizons) out.push_back(final_snapshot(field, basis.node_time(h)));
  });

  ConnectingGram gram;
  gram.asymmetry_measured = true;
  for (std::size_t hh = 0; hh < horizons.size(); ++hh) {
    const int h = horizons[hh];
    const int count = basis.supported(h);
    Eigen::MatrixXd C(count, count);
    for (int a = 0; a < count; ++a) {
      for (int b = a; b < count; ++b) {
        const Sampled1D& u = snaps[static_cast<std::size_t>(a)][hh];
        const Sampled1D& v = snaps[static_cast<std::size_t>(b)][hh];
        const int last = u.grid().steps();
        double acc = 0.5 * (u[0] * v[0] + u[last] * v[last]);
        for (int x = 1; x < last; ++x) acc += u[x] * v[x];
        C(a, b) = C(b, a) = acc * u.grid().dt();
      }
    }
    gram.horizon_nodes.push_back(h);
    gram.T.push_back(basis.node_time(h));
    gram.C.push_back(std::move(C));
  }
  return gram;
}

double relative_frobenius(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B) {
  if (A.rows() != B.rows() || A.cols() != B.cols()) throw StructuralError("matrix size mismatch");
  const double den = B.norm();
  const double num = (A - B).norm();
  return den > 0.0 ? num / den : num;
}

}  // namespace viscoid
