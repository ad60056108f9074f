#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "viscoid/forward.hpp"
#include "viscoid/grid.hpp"
#include "viscoid/kernel.hpp"

namespace viscoid {

/// Piecewise-linear hats on [0, T_max]. Hat j (0-based) peaks at grid node
/// nodes[j + 1] and is supported on [nodes[j], nodes[j + 2]], so every hat
/// vanishes at 0 and at T_max and the first k - 1 hats are supported in
/// [0, t(nodes[k])].
struct ControlBasis {
  TimeGrid grid;
  std::vector<int> nodes;         // n + 2 grid indices, nodes[0] = 0, nodes[n + 1] = steps
  std::vector<double> amplitude;  // peak value per hat

  /// n hats at nodes round(j m / (n + 1)); needs n + 1 <= m.
  static ControlBasis hats(const TimeGrid& grid, int n);

  int size() const { return static_cast<int>(amplitude.size()); }
  double node_time(int k) const { return grid.t(nodes[static_cast<std::size_t>(k)]); }
  /// Number of hats supported in [0, node_time(k)].
  int supported(int k) const { return k - 1; }

  Sampled1D function(int j) const;
  /// Hat j zero-extended (or truncated) onto a grid with the same step.
  Sampled1D function(int j, const TimeGrid& on) const;
  ControlBasis scaled(int j, double factor) const;

  /// Exact L2(0, T) mass matrix of the first `count` hats.
  Eigen::MatrixXd mass_matrix(int count) const;
};

/// Default horizons: basis nodes 4 .. n + 1 (three or more hats each); empty
/// when n < 3.
std::vector<int> default_horizons(const ControlBasis& basis);

/// Sampled boundary responses y^{e_i} on [0, 2 T_max]; the only data used by
/// the inverse path.
struct ResponseTable {
  ControlBasis basis;
  MemoryKernel kernel;       // covers [0, 2 T_max]
  std::vector<Sampled1D> Y;  // one row per hat, on [0, 2 T_max]
  std::string meta = "measured";

  TimeGrid data_grid() const;
  void validate() const;
};

/// One rank-one term a(t) b(s). A factor flagged `memory` stands for N * base;
/// keeping the base lets derivatives of the convolution be expanded exactly.
struct SeparableTerm {
  Sampled1D t_base;
  Sampled1D s_base;
  bool t_memory = false;
  bool s_memory = false;
};

struct Separable2D {
  TimeGrid sgrid, tgrid;
  std::vector<SeparableTerm> terms;
  const MemoryKernel* kernel = nullptr;  // needed when any factor is flagged

  Sampled2D materialize() const;
};

/// Phi(s, t) = (N * f)(t) y^g(s) - (N * y^f)(t) g(s) on sgrid x tgrid.
Separable2D phi(const Sampled1D& f, const Sampled1D& g, const Sampled1D& yf,
                const Sampled1D& yg, const MemoryKernel& k, const TimeGrid& sgrid,
                const TimeGrid& tgrid);

/// Psi(s, t) = int_0^s N(s - r) Phi(r, t) dr, applied to the s factors.
Separable2D psi(const Separable2D& phi, const MemoryKernel& k);

/// Affine term of the transformed equation: exp(-gamma (s + t)) times
/// (I - R*)_t d_t (I - R*)_s d_s Psi, with d(N * h) = h + N1 * h.
Sampled2D affine_chain(const Separable2D& psi, const ResolventData& res, const MemoryKernel& k);

enum class BlagoMethod { marching, picard };

struct BlagoOptions {
  BlagoMethod method = BlagoMethod::marching;
  double sigma_weight = 0.0;  // Picard only: iterate on Y = exp(-sigma (s + t)) W
  double tolerance = 1e-13;   // Picard stopping threshold (relative sup-norm update)
  int max_sweeps = 0;         // 0: levels + 2
};

struct BlagoSolution {
  Sampled2D W;
  Sampled2D H;  // exp(gamma (s + t)) W
  int sweeps = 0;
  double last_update = 0.0;
};

/// Solves W = 1/2 int_D [K *_tau W - K *_xi W + G] on the trapezoid
/// i + k <= s steps. Values outside the trapezoid are zero.
BlagoSolution blago_solve(const Sampled2D& G, const ResolventData& res,
                          const BlagoOptions& opt = {});

/// Gram matrices per horizon. C[h] is over the hats supported in [0, T[h]].
struct ConnectingGram {
  std::vector<int> horizon_nodes;  // basis node index of each horizon
  std::vector<double> T;
  std::vector<Eigen::MatrixXd> C;
  // Max over horizons of ||C - C^T||_F / ||C||_F before symmetrization; only
  // measured when both orders of every pair were solved.
  double asymmetry = 0.0;
  bool asymmetry_measured = false;
};

struct GramOptions {
  std::vector<int> horizons;  // basis node indices; empty: default_horizons
  int threads = 1;
  bool full_pairs = false;
  BlagoOptions blago;
};

/// H^{e_i, e_j}(t_k, t_k) for every time node k of the basis grid.
std::vector<double> pair_trace(const ResponseTable& tab, const ResolventData& res, int i, int j,
                               const BlagoOptions& opt = {});

ConnectingGram gram_from_data(const ResponseTable& tab, const GramOptions& opt = {});

/// Gram from forward snapshots (needs q; validation only). The problem's
/// horizon must reach T_max of the basis.
ConnectingGram gram_oracle(const StringProblem& p, const ControlBasis& basis,
                           const GramOptions& opt = {});

/// Relative Frobenius distance ||A - B|| / ||B||.
double relative_frobenius(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B);

}  // namespace viscoid
