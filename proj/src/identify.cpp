#include "viscoid/identify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "viscoid/errors.hpp"
#include "viscoid/parallel.hpp"

namespace viscoid {

namespace {

int node_of(const TimeGrid& g, double t) {
  const double pos = t / g.dt();
  const int k = static_cast<int>(std::lround(pos));
  if (std::abs(pos - k) > 1e-9 * std::max(1.0, pos) || k < 0 || k > g.steps()) {
    throw ValidationError("time " + std::to_string(t) + " is not a grid node");
  }
  return k;
}

// int over one cell of u v for linear u, v (nodal values u0, u1, v0, v1).
double p1_product(double u0, double u1, double v0, double v1, double dt) {
  return dt / 6.0 * (2.0 * u0 * v0 + u0 * v1 + u1 * v0 + 2.0 * u1 * v1);
}

// Value at 0 of the polynomial through up to three points.
double extrapolate_to_zero(const double* x, const double* v, int count) {
  if (count <= 1) return v[0];
  if (count == 2) return v[0] - x[0] * (v[1] - v[0]) / (x[1] - x[0]);
  const double l0 = x[1] * x[2] / ((x[0] - x[1]) * (x[0] - x[2]));
  const double l1 = x[0] * x[2] / ((x[1] - x[0]) * (x[1] - x[2]));
  const double l2 = x[0] * x[1] / ((x[2] - x[0]) * (x[2] - x[1]));
  return l0 * v[0] + l1 * v[1] + l2 * v[2];
}

}  // namespace

Eigen::VectorXd steering_rhs(const MemoryKernel& k, double T, const ControlBasis& basis, int count) {
  const TimeGrid& g = basis.grid;
  detail::require_same_step(g, k.grid(), "steering kernel");
  const int nT = node_of(g, T);
  if (k.grid().steps() < nT) throw ValidationError("kernel does not cover [0, T]");
  if (count < 0 || count > basis.size()) throw std::out_of_range("steering_rhs count");
  Eigen::VectorXd b = Eigen::VectorXd::Zero(count);
  const double dt = g.dt();
  for (int j = 0; j < count; ++j) {
    const auto uj = static_cast<std::size_t>(j);
    const int lo = basis.nodes[uj];
    const int hi = std::min(basis.nodes[uj + 2], nT);
    if (basis.nodes[uj + 2] > nT) throw ValidationError("hat not supported in [0, T]");
    const Sampled1D e = basis.function(j);
    double acc = 0.0;
    for (int n = lo; n < hi; ++n) acc += p1_product(k.M[nT - n], k.M[nT - n - 1], e[n], e[n + 1], dt);
    b(j) = acc;
  }
  return b;
}

SteeringResult steering_control(const Eigen::MatrixXd& C, const Eigen::VectorXd& b,
                                const ControlBasis& basis, int horizon, double gamma,
                                const IdentifyConfig& cfg) {
  const int count = static_cast<int>(C.rows());
  if (C.cols() != count || b.size() != count) throw StructuralError("steering system size mismatch");
  if (horizon < 2 || horizon > basis.size() + 1 || basis.supported(horizon) != count) {
    throw StructuralError("Gram size does not match the horizon");
  }
  if (!cfg.auto_lambda && !(cfg.lambda >= 0.0)) throw ValidationError("lambda must be >= 0");

  const Eigen::MatrixXd S = 0.5 * (C + C.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(S);
  if (eig.info() != Eigen::Success) throw NumericalFailure("eigen decomposition failed");
  const Eigen::VectorXd mu = eig.eigenvalues();
  const Eigen::MatrixXd& V = eig.eigenvectors();
  const double mu_max = mu.cwiseAbs().maxCoeff();
  const double mu_min = mu.minCoeff();
  if (mu_min < -1e-8 * mu_max) {
    throw NumericalFailure("Gram is not positive semidefinite (min eigenvalue " +
                           std::to_string(mu_min) + ", max " + std::to_string(mu_max) + ")");
  }

  SteeringResult out;
  out.condition = mu_min > 0.0 ? mu_max / mu_min : std::numeric_limits<double>::infinity();
  const double bnorm = b.norm();
  const Eigen::VectorXd Vb = V.transpose() * b;
  auto solve = [&](double lambda) -> Eigen::VectorXd {
    Eigen::VectorXd y(count);
    for (int i = 0; i < count; ++i) {
      const double d = mu(i) + lambda;
      if (!(d > 0.0)) throw NumericalFailure("regularized Gram is singular");
      y(i) = Vb(i) / d;
    }
    return V * y;
  };
  auto residual = [&](const Eigen::VectorXd& c) {
    return bnorm > 0.0 ? (S * c - b).norm() / bnorm : 0.0;
  };

  if (bnorm == 0.0) {
    out.coeffs = Eigen::VectorXd::Zero(count);
    out.lambda = cfg.auto_lambda ? 0.0 : cfg.lambda;
  } else if (!cfg.auto_lambda) {
    out.lambda = cfg.lambda;
    out.coeffs = solve(cfg.lambda);
    out.residual = residual(out.coeffs);
  } else {
    // Descending sweep lambda_k = ||C|| 10^(-k/2): first reach the residual
    // target, then continue while the solution norm stays within 1%.
    bool met = false;
    double best_res = std::numeric_limits<double>::infinity();
    Eigen::VectorXd best;
    double best_lambda = 0.0;
    for (int k = 0; k <= 32; ++k) {
      const double lambda = mu_max * std::pow(10.0, -0.5 * k);
      if (!(mu_min + lambda > 0.0)) break;
      const Eigen::VectorXd c = solve(lambda);
      const double r = residual(c);
      if (!met) {
        if (r < best_res) {
          best_res = r;
          best = c;
          best_lambda = lambda;
        }
        if (r <= 1e-6) met = true;
        continue;
      }
      const double prev = best.norm();
      if (std::abs(c.norm() - prev) > 0.01 * prev) break;
      best = c;
      best_lambda = lambda;
      best_res = r;
    }
    out.coeffs = best;
    out.lambda = best_lambda;
    out.residual = best_res;
    out.warning = !met;
  }

  // Reassembly: the weighted average of sum c_i e_i against
  // exp(2 gamma (T - t)) e_j, the leading part of the Gram, is placed at the
  // matching weighted centroid of e_j (not its peak, which differs on uneven
  // nodes). Averages converge to the control where the Galerkin function
  // itself oscillates near t = 0.
  const TimeGrid& g = basis.grid;
  const int nT = basis.nodes[static_cast<std::size_t>(horizon)];
  const TimeGrid tg = g.truncated(nT);
  const double dt = g.dt();
  const double T = tg.t_max();
  std::vector<double> fh(static_cast<std::size_t>(nT + 1), 0.0);
  std::vector<Sampled1D> hats;
  hats.reserve(static_cast<std::size_t>(count));
  for (int j = 0; j < count; ++j) {
    hats.push_back(basis.function(j).truncated(nT));
    for (int n = 0; n <= nT; ++n) fh[static_cast<std::size_t>(n)] += out.coeffs(j) * hats.back()[n];
  }
  std::vector<double> xs(static_cast<std::size_t>(count + 2)), vs(xs.size());
  for (int j = 0; j < count; ++j) {
    const auto uj = static_cast<std::size_t>(j);
    double num = 0.0, den = 0.0, moment = 0.0;
    for (int n = basis.nodes[uj]; n < basis.nodes[uj + 2]; ++n) {
      const double w = std::exp(2.0 * gamma * (T - (n + 0.5) * dt));
      const double e0 = hats[uj][n], e1 = hats[uj][n + 1];
      num += w * 0.25 * dt * (fh[static_cast<std::size_t>(n)] + fh[static_cast<std::size_t>(n + 1)]) * (e0 + e1);
      moment += w * p1_product(g.t(n), g.t(n + 1), e0, e1, dt);
      den += w * 0.5 * dt * (e0 + e1);
    }
    xs[uj + 1] = moment / den;
    vs[uj + 1] = num / den;
  }
  xs[0] = 0.0;
  vs[0] = count > 0 ? extrapolate_to_zero(&xs[1], &vs[1], std::min(count, 3)) : 0.0;
  xs[static_cast<std::size_t>(count + 1)] = T;
  vs[static_cast<std::size_t>(count + 1)] = 0.0;

  std::vector<double> f(static_cast<std::size_t>(nT + 1));
  std::size_t seg = 0;
  for (int n = 0; n <= nT; ++n) {
    const double t = tg.t(n);
    while (seg + 2 < xs.size() && t > xs[seg + 1]) ++seg;
    const double s = std::clamp((t - xs[seg]) / (xs[seg + 1] - xs[seg]), 0.0, 1.0);
    f[static_cast<std::size_t>(n)] = (1.0 - s) * vs[seg] + s * vs[seg + 1];
  }
  out.control = Sampled1D(tg, std::move(f));
  return out;
}

double xi_trace(const Sampled1D& f_T, double gamma) {
  if (f_T.grid().steps() < 3) throw ValidationError("xi_trace needs at least three steps");
  const double f0 = 3.0 * f_T[1] - 3.0 * f_T[2] + f_T[3];
  return std::exp(gamma * f_T.grid().t_max()) * f0;
}

QReconstruction reconstruct_q(const std::vector<double>& T, const std::vector<double>& xi,
                              int halfwidth, double guard) {
  const int n = static_cast<int>(T.size());
  if (static_cast<int>(xi.size()) != n) throw StructuralError("reconstruct_q: length mismatch");
  if (halfwidth < 1) throw ValidationError("smoothing halfwidth must be >= 1");
  if (!(guard > 0.0)) throw ValidationError("xi guard must be positive");
  const int width = 2 * halfwidth + 1;
  if (n < width) {
    throw ValidationError("need at least " + std::to_string(width) + " horizons, got " +
                          std::to_string(n));
  }
  QReconstruction out;
  out.q.assign(static_cast<std::size_t>(n), 0.0);
  out.guarded.assign(static_cast<std::size_t>(n), false);
  out.min_divisor = std::numeric_limits<double>::infinity();
  bool any = false;
  for (int k = 0; k < n; ++k) {
    const auto uk = static_cast<std::size_t>(k);
    if (std::abs(xi[uk]) <= guard) {
      out.guarded[uk] = true;
      continue;
    }
    any = true;
    const int lo = std::clamp(k - halfwidth, 0, n - width);
    // A quadratic on a shifted window only sees xi'' at the window centre; the
    // end windows carry a cubic term so the estimate belongs to T_k itself.
    const int degree = lo == k - halfwidth ? 2 : 3;
    const double scale = 0.5 * (T[static_cast<std::size_t>(lo + width - 1)] - T[static_cast<std::size_t>(lo)]);
    Eigen::MatrixXd A(width, degree + 1);
    Eigen::VectorXd rhs(width);
    for (int r = 0; r < width; ++r) {
      const auto ur = static_cast<std::size_t>(lo + r);
      const double d = (T[ur] - T[uk]) / scale;
      double p = 1.0;
      for (int c = 0; c <= degree; ++c, p *= d) A(r, c) = p;
      rhs(r) = xi[ur];
    }
    const Eigen::VectorXd coef = A.colPivHouseholderQr().solve(rhs);
    const double second = 2.0 * coef(2) / (scale * scale);
    out.q[uk] = -second / xi[uk];
    out.min_divisor = std::min(out.min_divisor, std::abs(xi[uk]));
  }
  if (!any) throw NumericalFailure("target identically degenerate: every |xi| is under the guard");

  // Continuity extension across guarded samples.
  for (int k = 0; k < n; ++k) {
    if (!out.guarded[static_cast<std::size_t>(k)]) continue;
    int l = k - 1, r = k + 1;
    while (l >= 0 && out.guarded[static_cast<std::size_t>(l)]) --l;
    while (r < n && out.guarded[static_cast<std::size_t>(r)]) ++r;
    const auto uk = static_cast<std::size_t>(k);
    if (l >= 0 && r < n) {
      const auto ul = static_cast<std::size_t>(l), ur = static_cast<std::size_t>(r);
      const double s = (T[uk] - T[ul]) / (T[ur] - T[ul]);
      out.q[uk] = (1.0 - s) * out.q[ul] + s * out.q[ur];
    } else {
      out.q[uk] = out.q[static_cast<std::size_t>(l >= 0 ? l : r)];
    }
  }
  return out;
}

ReconstructionResult identify_from_gram(const ConnectingGram& gram, const ResponseTable& tab,
                                        const IdentifyConfig& cfg) {
  if (gram.C.empty()) throw ValidationError("no horizons to identify");
  const ResolventData res = resolvent(tab.kernel.truncated(tab.basis.grid.steps()));
  const std::size_t H = gram.C.size();
  ReconstructionResult out;
  out.T = gram.T;
  out.xi.resize(H);
  out.residual.resize(H);
  out.lambda.resize(H);
  out.condition.resize(H);
  out.warning.assign(H, false);
  std::vector<char> warn(H, 0);
  parallel_for(static_cast<int>(H), cfg.threads, [&](int h) {
    const auto uh = static_cast<std::size_t>(h);
    try {
      const int node = gram.horizon_nodes[uh];
      const Eigen::VectorXd b =
          steering_rhs(tab.kernel, gram.T[uh], tab.basis, static_cast<int>(gram.C[uh].rows()));
      const SteeringResult s = steering_control(gram.C[uh], b, tab.basis, node, res.gamma, cfg);
      out.xi[uh] = xi_trace(s.control, res.gamma);
      out.residual[uh] = s.residual;
      out.lambda[uh] = s.lambda;
      out.condition[uh] = s.condition;
      warn[uh] = s.warning ? 1 : 0;
    } catch (const NumericalFailure& e) {
      throw NumericalFailure("horizon T = " + std::to_string(gram.T[uh]) + ": " + e.what());
    }
  });
  for (std::size_t h = 0; h < H; ++h) out.warning[h] = warn[h] != 0;
  const double guard = cfg.xi_guard > 0.0 ? cfg.xi_guard : 5.0 * tab.basis.grid.dt();
  const QReconstruction q = reconstruct_q(out.T, out.xi, cfg.smoothing_halfwidth, guard);
  out.q_hat = q.q;
  out.guard_flag = q.guarded;
  out.min_divisor = q.min_divisor;
  out.gram = gram;
  return out;
}

ReconstructionResult pipeline(const ResponseTable& tab, const IdentifyConfig& cfg) {
  GramOptions opt;
  opt.horizons = cfg.horizons;
  opt.threads = cfg.threads;
  const ConnectingGram gram = gram_from_data(tab, opt);
  return identify_from_gram(gram, tab, cfg);
}

}  // namespace viscoid
