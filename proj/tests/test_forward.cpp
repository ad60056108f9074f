#include <doctest.h>

#include <cmath>
#include <numbers>

#include "viscoid/errors.hpp"
#include "viscoid/forward.hpp"

using namespace viscoid;
using std::numbers::pi;

namespace {

Sampled1D bump(const TimeGrid& g, double T) {
  return Sampled1D::sample(g, [T](double t) { return std::pow(std::sin(pi * t / T), 2); });
}

double rel_l2(std::span<const double> a, std::span<const double> b) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num += (a[i] - b[i]) * (a[i] - b[i]);
    den += b[i] * b[i];
  }
  return std::sqrt(num / den);
}

}  // namespace

TEST_CASE("plain wave: the field is the shifted control") {
  const double T = 0.5;
  const StringProblem p = make_problem(1.0, T, 1.0 / 256, [](double) { return 0.0; }, KernelSpec::constant_one());
  const Sampled1D f = bump(p.time_grid(), T);
  const WaveField w = solve_mild(p, f);
  for (int i = 0; i < p.space_grid().nodes(); i += 7) {
    for (int k = 0; k < p.time_grid().nodes(); k += 5) {
      CHECK(w.w.at(i, k) == doctest::Approx(i <= k ? f[k - i] : 0.0).epsilon(1e-12).scale(1.0));
    }
  }
  // w_x(0, t) = -f'(t) = -(pi / T) sin(2 pi t / T)
  for (int k = 0; k < p.time_grid().nodes(); k += 8) {
    CHECK(w.y[k] == doctest::Approx(-(pi / T) * std::sin(2 * pi * p.time_grid().t(k) / T)).epsilon(1e-3).scale(1.0));
  }
  // The traction is -N * y = f' integrated: -(int y) = f.
  for (int k = 0; k < p.time_grid().nodes(); k += 8) CHECK(w.sigma[k] == doctest::Approx(f[k]).epsilon(1e-3).scale(1.0));
}

TEST_CASE("mild solution matches the finite-difference oracle at second order") {
  std::vector<double> gaps;
  for (int m : {64, 128, 256}) {
    const StringProblem p = make_problem(
        1.0, 0.5, 1.0 / m, [](double x) { return 1.0 + 0.5 * std::sin(pi * x); }, KernelSpec::exponential(1.0));
    const Sampled1D f = bump(p.time_grid(), 0.5);
    gaps.push_back(rel_l2(solve_mild(p, f).w.values(), fd_oracle(p, f).w.values()));
  }
  CHECK(gaps.back() < 1e-4);
  CHECK(gaps[0] / gaps[1] > 3.5);
  CHECK(gaps[1] / gaps[2] > 3.5);
}

TEST_CASE("responses of the two solvers agree") {
  std::vector<double> gaps;
  for (int m : {128, 256}) {
    const StringProblem p = make_problem(
        1.0, 0.5, 1.0 / m, [](double x) { return 2.0 - x; }, KernelSpec::exponential(2.0));
    const Sampled1D f = bump(p.time_grid(), 0.5);
    const WaveField a = solve_mild(p, f);
    gaps.push_back(rel_l2(a.y.values(), fd_oracle(p, f).y.values()));
    CHECK(rel_l2(response(p, f, a).values(), a.y.values()) < 1e-12);
  }
  CHECK(gaps.back() < 5e-3);
  CHECK(gaps[0] / gaps[1] > 3.0);
}

TEST_CASE("final snapshot and interpolation") {
  const StringProblem p = make_problem(1.0, 0.5, 1.0 / 64, [](double) { return 0.0; }, KernelSpec::constant_one());
  const Sampled1D f = bump(p.time_grid(), 0.5);
  const Sampled1D snap = final_snapshot(solve_mild(p, f), 0.5);
  CHECK(snap.grid().t_max() == doctest::Approx(0.5));
  for (int i = 0; i < snap.size(); ++i) CHECK(snap[i] == doctest::Approx(f[32 - i]).scale(1.0));
  CHECK(interpolate(snap, 0.25 + 0.5 / 64) == doctest::Approx(0.5 * (snap[16] + snap[17])));
  CHECK(interpolate(snap, 9.0) == snap[snap.size() - 1]);
}

TEST_CASE("forward preconditions") {
  CHECK_THROWS_AS(make_problem(1.0, 1.5, 0.01, [](double) { return 0.0; }, KernelSpec::constant_one()),
                  ValidationError);
  const StringProblem p = make_problem(1.0, 0.5, 0.01, [](double) { return 0.0; }, KernelSpec::constant_one());
  CHECK_THROWS_AS(solve_mild(p, Sampled1D::constant(p.time_grid(), 1.0)), ValidationError);
  CHECK_THROWS(solve_mild(p, Sampled1D::zeros(TimeGrid(0.02, 25))));
  CHECK_THROWS_AS(fd_oracle(p, bump(p.time_grid(), 0.5), 0.005), ValidationError);
}
