#pragma once

#include <functional>
#include <span>
#include <vector>

namespace viscoid {

/// Uniform grid t_k = k*dt, k = 0..steps. The extent is derived, never stored.
class TimeGrid {
 public:
  TimeGrid() = default;
  TimeGrid(double dt, int steps);

  /// Grid with step `dt` ending exactly at `t_max`; throws ValidationError
  /// when dt does not divide t_max on the node lattice.
  static TimeGrid covering(double t_max, double dt);

  double dt() const { return dt_; }
  int steps() const { return steps_; }
  int nodes() const { return steps_ + 1; }
  double t_max() const { return steps_ * dt_; }
  double t(int k) const { return k * dt_; }

  /// Same step (relative 1e-12); extents may differ.
  bool same_step(const TimeGrid& other) const;
  bool operator==(const TimeGrid& other) const;

  /// Prefix grid with the first `steps` steps.
  TimeGrid truncated(int steps) const;

 private:
  double dt_ = 1.0;
  int steps_ = 0;
};

class Sampled1D {
 public:
  Sampled1D() = default;
  Sampled1D(TimeGrid grid, std::vector<double> values);

  static Sampled1D zeros(const TimeGrid& grid);
  static Sampled1D constant(const TimeGrid& grid, double value);
  static Sampled1D sample(const TimeGrid& grid, const std::function<double(double)>& fn);

  const TimeGrid& grid() const { return grid_; }
  std::span<const double> values() const { return values_; }
  const std::vector<double>& data() const { return values_; }
  int size() const { return static_cast<int>(values_.size()); }
  double operator[](int k) const { return values_[static_cast<std::size_t>(k)]; }
  double max_abs() const;

  /// Prefix on the first `steps` steps of the grid.
  Sampled1D truncated(int steps) const;
  /// Zero-extended onto a longer grid with the same step.
  Sampled1D extended(const TimeGrid& longer) const;

  Sampled1D scaled(double a) const;
  friend Sampled1D operator+(const Sampled1D& a, const Sampled1D& b);
  friend Sampled1D operator-(const Sampled1D& a, const Sampled1D& b);

 private:
  TimeGrid grid_;
  std::vector<double> values_{0.0};
};

/// Function of (s, t) sampled on a product grid, stored s-major:
/// values[i * t_nodes + k] = F(s_i, t_k).
class Sampled2D {
 public:
  Sampled2D() = default;
  Sampled2D(TimeGrid sgrid, TimeGrid tgrid);
  Sampled2D(TimeGrid sgrid, TimeGrid tgrid, std::vector<double> values);

  static Sampled2D sample(const TimeGrid& sgrid, const TimeGrid& tgrid,
                          const std::function<double(double, double)>& fn);

  const TimeGrid& sgrid() const { return sgrid_; }
  const TimeGrid& tgrid() const { return tgrid_; }
  int s_nodes() const { return sgrid_.nodes(); }
  int t_nodes() const { return tgrid_.nodes(); }

  double at(int i, int k) const { return values_[index(i, k)]; }
  double& at(int i, int k) { return values_[index(i, k)]; }
  std::span<const double> values() const { return values_; }
  std::span<double> values() { return values_; }
  double max_abs() const;

  /// Slice at fixed t_k, as a function of s.
  Sampled1D s_slice(int k) const;
  /// Slice at fixed s_i, as a function of t.
  Sampled1D t_slice(int i) const;

  /// Characteristic-aligned quadratures need both axes on one step.
  bool characteristic_aligned() const { return sgrid_.same_step(tgrid_); }

 private:
  std::size_t index(int i, int k) const {
    return static_cast<std::size_t>(i) * static_cast<std::size_t>(tgrid_.nodes()) +
           static_cast<std::size_t>(k);
  }

  TimeGrid sgrid_;
  TimeGrid tgrid_;
  std::vector<double> values_{0.0};
};

/// Trapezoidal causal convolution (k * h)(t) = int_0^t k(t - s) h(s) ds.
Sampled1D causal_convolve(const Sampled1D& k, const Sampled1D& h);

/// Trapezoidal running integral int_0^t h.
Sampled1D cumulative_integral(const Sampled1D& h);

/// Half the integral of F over the backward characteristic triangle
/// D(s,t) = {0 < tau < t, |s - t + tau| < xi < s + t - tau}, evaluated by nested
/// composite trapezoid rules (rows in xi, then levels in tau).
double triangle_quadrature(const Sampled2D& F, int s_idx, int t_idx);

/// Same quantity for every s index on level `t_idx` (up to the last index whose
/// triangle fits in the s extent), from running diagonal sums.
std::vector<double> triangle_quadrature_level(const Sampled2D& F, int t_idx);

namespace detail {

// Span-level kernels shared by the numerical modules. `kernel` may be longer
// than `h`; only its first h.size() samples are used.
void convolve_into(std::span<const double> kernel, std::span<const double> h, double dt,
                   std::span<double> out);
double convolve_at(std::span<const double> kernel, std::span<const double> h, double dt,
                   int n);
void cumulative_into(std::span<const double> h, double dt, std::span<double> out);
void require_same_step(const TimeGrid& a, const TimeGrid& b, const char* what);

}  // namespace detail

/// Incremental evaluator of triangle_quadrature along successive levels.
///
/// Rows J(., tau_j) are pushed in level order. After rows 0..k-1 are in,
/// `level` returns Q(i, k) = 1/2 int_{D(x_i, t_k)} J for all requested i in
/// O(1) per node. The top row of every triangle has zero length under the
/// nested trapezoid rule, so level k never depends on row k.
class TriangleMarcher {
 public:
  /// `width` is the largest xi index any query may touch (s_idx + t_idx).
  TriangleMarcher(int width, int max_levels, double dt);

  void push_row(std::span<const double> row);
  int rows() const { return rows_; }

  /// Q(i, k) for i = 0..out.size()-1 with k == rows().
  void level(std::span<double> out) const;
  double value(int i) const;

 private:
  double& anti(int d) { return anti_[static_cast<std::size_t>(d)]; }
  double& diag(int e) { return diag_[static_cast<std::size_t>(e + offset_)]; }
  double anti(int d) const { return anti_[static_cast<std::size_t>(d)]; }
  double diag(int e) const { return diag_[static_cast<std::size_t>(e + offset_)]; }

  int width_;
  int offset_;
  double dt_;
  int rows_ = 0;
  std::vector<double> cum_;
  std::vector<double> first_;
  std::vector<double> anti_;
  std::vector<double> diag_;
};

}  // namespace viscoid
