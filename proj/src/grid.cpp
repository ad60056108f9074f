#include "viscoid/grid.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "viscoid/errors.hpp"

namespace viscoid {

TimeGrid::TimeGrid(double dt, int steps) : dt_(dt), steps_(steps) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ValidationError("grid step must be positive");
  if (steps < 0) throw ValidationError("grid step count must be non-negative");
}

TimeGrid TimeGrid::covering(double t_max, double dt) {
  if (!(dt > 0.0)) throw ValidationError("grid step must be positive");
  if (t_max < 0.0) throw ValidationError("grid extent must be non-negative");
  const double ratio = t_max / dt;
  const double steps = std::round(ratio);
  if (std::abs(ratio - steps) > 1e-9 * std::max(1.0, ratio)) {
    throw ValidationError("step " + std::to_string(dt) + " does not divide extent " +
                          std::to_string(t_max));
  }
  return TimeGrid(dt, static_cast<int>(steps));
}

bool TimeGrid::same_step(const TimeGrid& other) const {
  return std::abs(dt_ - other.dt_) <= 1e-12 * std::max(dt_, other.dt_);
}

bool TimeGrid::operator==(const TimeGrid& other) const {
  return steps_ == other.steps_ && same_step(other);
}

TimeGrid TimeGrid::truncated(int steps) const {
  if (steps < 0 || steps > steps_) throw std::out_of_range("truncation beyond grid extent");
  return TimeGrid(dt_, steps);
}

// ---------------------------------------------------------------------------

Sampled1D::Sampled1D(TimeGrid grid, std::vector<double> values)
    : grid_(grid), values_(std::move(values)) {
  if (static_cast<int>(values_.size()) != grid_.nodes()) {
    throw StructuralError("sample count " + std::to_string(values_.size()) +
                          " does not match node count " + std::to_string(grid_.nodes()));
  }
}

Sampled1D Sampled1D::zeros(const TimeGrid& grid) {
  return Sampled1D(grid, std::vector<double>(static_cast<std::size_t>(grid.nodes()), 0.0));
}

Sampled1D Sampled1D::constant(const TimeGrid& grid, double value) {
  return Sampled1D(grid, std::vector<double>(static_cast<std::size_t>(grid.nodes()), value));
}

Sampled1D Sampled1D::sample(const TimeGrid& grid, const std::function<double(double)>& fn) {
  std::vector<double> v(static_cast<std::size_t>(grid.nodes()));
  for (int k = 0; k < grid.nodes(); ++k) v[static_cast<std::size_t>(k)] = fn(grid.t(k));
  return Sampled1D(grid, std::move(v));
}

double Sampled1D::max_abs() const {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

Sampled1D Sampled1D::truncated(int steps) const {
  TimeGrid g = grid_.truncated(steps);
  return Sampled1D(g, std::vector<double>(values_.begin(), values_.begin() + g.nodes()));
}

Sampled1D Sampled1D::extended(const TimeGrid& longer) const {
  detail::require_same_step(grid_, longer, "zero extension");
  if (longer.steps() < grid_.steps()) throw StructuralError("extension target is shorter");
  std::vector<double> v(static_cast<std::size_t>(longer.nodes()), 0.0);
  std::copy(values_.begin(), values_.end(), v.begin());
  return Sampled1D(longer, std::move(v));
}

Sampled1D Sampled1D::scaled(double a) const {
  std::vector<double> v(values_);
  for (double& x : v) x *= a;
  return Sampled1D(grid_, std::move(v));
}

Sampled1D operator+(const Sampled1D& a, const Sampled1D& b) {
  if (!(a.grid_ == b.grid_)) throw StructuralError("sum of samples on different grids");
  std::vector<double> v(a.values_);
  for (std::size_t k = 0; k < v.size(); ++k) v[k] += b.values_[k];
  return Sampled1D(a.grid_, std::move(v));
}

Sampled1D operator-(const Sampled1D& a, const Sampled1D& b) { return a + b.scaled(-1.0); }

// ---------------------------------------------------------------------------

Sampled2D::Sampled2D(TimeGrid sgrid, TimeGrid tgrid)
    : sgrid_(sgrid),
      tgrid_(tgrid),
      values_(static_cast<std::size_t>(sgrid.nodes()) * static_cast<std::size_t>(tgrid.nodes()),
              0.0) {}

Sampled2D::Sampled2D(TimeGrid sgrid, TimeGrid tgrid, std::vector<double> values)
    : sgrid_(sgrid), tgrid_(tgrid), values_(std::move(values)) {
  const auto expected =
      static_cast<std::size_t>(sgrid.nodes()) * static_cast<std::size_t>(tgrid.nodes());
  if (values_.size() != expected) throw StructuralError("2D sample count mismatch");
}

Sampled2D Sampled2D::sample(const TimeGrid& sgrid, const TimeGrid& tgrid,
                            const std::function<double(double, double)>& fn) {
  Sampled2D out(sgrid, tgrid);
  for (int i = 0; i < sgrid.nodes(); ++i)
    for (int k = 0; k < tgrid.nodes(); ++k) out.at(i, k) = fn(sgrid.t(i), tgrid.t(k));
  return out;
}

double Sampled2D::max_abs() const {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

Sampled1D Sampled2D::s_slice(int k) const {
  std::vector<double> v(static_cast<std::size_t>(s_nodes()));
  for (int i = 0; i < s_nodes(); ++i) v[static_cast<std::size_t>(i)] = at(i, k);
  return Sampled1D(sgrid_, std::move(v));
}

Sampled1D Sampled2D::t_slice(int i) const {
  auto first = values_.begin() + static_cast<std::ptrdiff_t>(index(i, 0));
  return Sampled1D(tgrid_, std::vector<double>(first, first + t_nodes()));
}

// ---------------------------------------------------------------------------

namespace detail {

void require_same_step(const TimeGrid& a, const TimeGrid& b, const char* what) {
  if (!a.same_step(b)) {
    throw StructuralError(std::string(what) + ": grid steps differ (" + std::to_string(a.dt()) +
                          " vs " + std::to_string(b.dt()) + ")");
  }
}

double convolve_at(std::span<const double> kernel, std::span<const double> h, double dt, int n) {
  if (n == 0) return 0.0;
  const auto un = static_cast<std::size_t>(n);
  double acc = 0.5 * kernel[un] * h[0];
  for (std::size_t j = 1; j < un; ++j) acc += kernel[un - j] * h[j];
  acc += 0.5 * kernel[0] * h[un];
  return dt * acc;
}

void convolve_into(std::span<const double> kernel, std::span<const double> h, double dt,
                   std::span<double> out) {
  if (kernel.size() < h.size()) throw StructuralError("convolution kernel shorter than signal");
  for (std::size_t n = 0; n < h.size(); ++n) out[n] = convolve_at(kernel, h, dt, static_cast<int>(n));
}

void cumulative_into(std::span<const double> h, double dt, std::span<double> out) {
  if (h.empty()) return;
  double acc = 0.0;
  out[0] = 0.0;
  for (std::size_t n = 1; n < h.size(); ++n) {
    acc += 0.5 * dt * (h[n - 1] + h[n]);
    out[n] = acc;
  }
}

}  // namespace detail

Sampled1D causal_convolve(const Sampled1D& k, const Sampled1D& h) {
  if (!(k.grid() == h.grid())) throw StructuralError("causal_convolve: grid mismatch");
  std::vector<double> out(static_cast<std::size_t>(h.size()));
  detail::convolve_into(k.values(), h.values(), h.grid().dt(), out);
  return Sampled1D(h.grid(), std::move(out));
}

Sampled1D cumulative_integral(const Sampled1D& h) {
  std::vector<double> out(static_cast<std::size_t>(h.size()));
  detail::cumulative_into(h.values(), h.grid().dt(), out);
  return Sampled1D(h.grid(), std::move(out));
}

namespace {

void check_triangle(const Sampled2D& F, int s_idx, int t_idx) {
  if (!F.characteristic_aligned()) {
    throw StructuralError("triangle quadrature needs a shared step on both axes");
  }
  if (t_idx < 0 || t_idx > F.tgrid().steps()) throw std::out_of_range("t index out of range");
  if (s_idx < 0 || s_idx + t_idx > F.sgrid().steps()) {
    throw std::out_of_range("triangle leaves the s extent");
  }
}

}  // namespace

double triangle_quadrature(const Sampled2D& F, int s_idx, int t_idx) {
  check_triangle(F, s_idx, t_idx);
  const double dt = F.tgrid().dt();
  std::vector<double> row(static_cast<std::size_t>(s_idx + t_idx + 1));
  std::vector<double> cum(row.size());
  double acc = 0.0;
  for (int j = 0; j <= t_idx; ++j) {
    const int hi = s_idx + t_idx - j;
    const int lo = std::abs(s_idx - t_idx + j);
    for (int n = 0; n <= hi; ++n) row[static_cast<std::size_t>(n)] = F.at(n, j);
    detail::cumulative_into(std::span<const double>(row).first(static_cast<std::size_t>(hi + 1)),
                            dt, cum);
    const double inner = cum[static_cast<std::size_t>(hi)] - cum[static_cast<std::size_t>(lo)];
    const double w = (j == 0 || j == t_idx) ? 0.5 : 1.0;
    acc += w * inner;
  }
  return 0.5 * dt * acc;
}

std::vector<double> triangle_quadrature_level(const Sampled2D& F, int t_idx) {
  check_triangle(F, 0, t_idx);
  const int width = F.sgrid().steps();
  TriangleMarcher marcher(width, t_idx + 1, F.tgrid().dt());
  std::vector<double> row(static_cast<std::size_t>(width + 1));
  for (int j = 0; j < t_idx; ++j) {
    for (int n = 0; n <= width; ++n) row[static_cast<std::size_t>(n)] = F.at(n, j);
    marcher.push_row(row);
  }
  std::vector<double> out(static_cast<std::size_t>(width - t_idx + 1));
  marcher.level(out);
  return out;
}

// ---------------------------------------------------------------------------

TriangleMarcher::TriangleMarcher(int width, int max_levels, double dt)
    : width_(width),
      offset_(max_levels),
      dt_(dt),
      cum_(static_cast<std::size_t>(width + 1), 0.0),
      first_(static_cast<std::size_t>(width + 1), 0.0),
      anti_(static_cast<std::size_t>(width + max_levels + 1), 0.0),
      diag_(static_cast<std::size_t>(width + max_levels + 1), 0.0) {
  if (width < 0 || max_levels < 1) throw ValidationError("bad triangle marcher extent");
}

void TriangleMarcher::push_row(std::span<const double> row) {
  if (rows_ >= offset_) throw std::out_of_range("triangle marcher level capacity exceeded");
  const auto len = std::min(row.size(), cum_.size());
  if (len == 0) {
    std::fill(cum_.begin(), cum_.end(), 0.0);
  } else {
    detail::cumulative_into(row.first(len), dt_, cum_);
    // Rows shorter than the width continue with a zero integrand.
    for (std::size_t n = len; n < cum_.size(); ++n) cum_[n] = cum_[len - 1];
  }
  const int j = rows_;
  if (j == 0) first_ = cum_;
  for (int n = 0; n <= width_; ++n) {
    const double c = cum_[static_cast<std::size_t>(n)];
    anti(n + j) += c;
    diag(n - j) += c;
  }
  ++rows_;
}

double TriangleMarcher::value(int i) const {
  const int k = rows_;
  if (k == 0) return 0.0;
  if (i < 0 || i + k > width_) throw std::out_of_range("triangle marcher query outside width");
  const double upper = anti(i + k) - 0.5 * first_[static_cast<std::size_t>(i + k)];
  const int lo = std::abs(i - k);
  const double lower_sum = (i >= k) ? diag(i - k) : anti(k - i) + diag(i - k);
  const double lower = lower_sum - 0.5 * first_[static_cast<std::size_t>(lo)];
  return 0.5 * dt_ * (upper - lower);
}

void TriangleMarcher::level(std::span<double> out) const {
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = value(static_cast<int>(i));
}

}  // namespace viscoid
