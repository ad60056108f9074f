#include <doctest.h>

#include <cmath>

#include "viscoid/errors.hpp"
#include "viscoid/grid.hpp"

using namespace viscoid;

namespace {

// Midpoint sum over the characteristic triangle of (s, t), scaled by 1/2.
double brute_triangle(const std::function<double(double, double)>& F, double s, double t, int cells) {
  double sum = 0.0;
  const double h = t / cells;
  for (int a = 0; a < cells; ++a) {
    const double tau = (a + 0.5) * h;
    const double lo = std::abs(s - t + tau), hi = s + t - tau;
    const int nx = cells * 4;
    const double hx = (hi - lo) / nx;
    for (int b = 0; b < nx; ++b) sum += F(lo + (b + 0.5) * hx, tau) * hx * h;
  }
  return 0.5 * sum;
}

}  // namespace

TEST_CASE("grid covering and validation") {
  const TimeGrid g = TimeGrid::covering(0.5, 1.0 / 256.0);
  CHECK(g.steps() == 128);
  CHECK(g.nodes() == 129);
  CHECK(g.t_max() == doctest::Approx(0.5).epsilon(1e-15));
  CHECK_THROWS_AS(TimeGrid::covering(0.5, 0.3), ValidationError);
  CHECK_THROWS_AS(TimeGrid::covering(1.0, 0.0), ValidationError);
  CHECK(g.truncated(10).t_max() == doctest::Approx(10.0 / 256.0));
  CHECK(g.same_step(TimeGrid(1.0 / 256.0, 7)));
  CHECK_FALSE(g.same_step(TimeGrid(1.0 / 128.0, 7)));
}

TEST_CASE("sampled functions: extension, truncation, arithmetic") {
  const TimeGrid g(0.1, 10);
  const Sampled1D a = Sampled1D::sample(g, [](double t) { return t; });
  const Sampled1D b = Sampled1D::constant(g, 2.0);
  const Sampled1D c = a + b.scaled(0.5) - a;
  for (int k = 0; k < g.nodes(); ++k) CHECK(c[k] == doctest::Approx(1.0));
  const Sampled1D e = a.extended(TimeGrid(0.1, 20));
  CHECK(e.size() == 21);
  CHECK(e[10] == doctest::Approx(1.0));
  CHECK(e[15] == 0.0);
  CHECK(e.truncated(5).size() == 6);
  CHECK_THROWS(a + Sampled1D::zeros(TimeGrid(0.1, 5)));
}

TEST_CASE("causal convolution is exact for linear integrands") {
  // k = 1, h = t: int_0^t s ds = t^2 / 2, and the trapezoid rule is exact.
  const TimeGrid g(0.05, 40);
  const Sampled1D one = Sampled1D::constant(g, 1.0);
  const Sampled1D lin = Sampled1D::sample(g, [](double t) { return t; });
  const Sampled1D c = causal_convolve(one, lin);
  for (int k = 0; k < g.nodes(); ++k) CHECK(c[k] == doctest::Approx(0.5 * g.t(k) * g.t(k)).epsilon(1e-13));
  const Sampled1D I = cumulative_integral(lin);
  CHECK(I[40] == doctest::Approx(2.0).epsilon(1e-14));
}

TEST_CASE("causal convolution converges at second order") {
  // exp(-t) * 1 = 1 - exp(-t)
  double prev = 0.0;
  for (int m : {50, 100, 200}) {
    const TimeGrid g = TimeGrid::covering(1.0, 1.0 / m);
    const Sampled1D c = causal_convolve(Sampled1D::sample(g, [](double t) { return std::exp(-t); }),
                                        Sampled1D::constant(g, 1.0));
    const double err = std::abs(c[m] - (1.0 - std::exp(-1.0)));
    if (prev > 0.0) CHECK(prev / err == doctest::Approx(4.0).epsilon(0.02));
    prev = err;
  }
}

TEST_CASE("triangle quadrature: constants are exact") {
  const TimeGrid g(0.02, 60);
  const Sampled2D F = Sampled2D::sample(g, g, [](double, double) { return 1.0; });
  // |D(s,t)| = t^2 for s >= t and 2st - s^2 otherwise.
  for (auto [i, k] : {std::pair{20, 10}, std::pair{10, 20}, std::pair{0, 5}, std::pair{30, 30}}) {
    const double s = g.t(i), t = g.t(k);
    const double area = s >= t ? t * t : 2 * s * t - s * s;
    CHECK(triangle_quadrature(F, i, k) == doctest::Approx(0.5 * area).epsilon(1e-12));
  }
}

TEST_CASE("triangle quadrature against a brute-force Riemann sum") {
  auto fn = [](double xi, double tau) { return std::cos(3 * xi) * (1 + tau * tau); };
  const double s = 0.4, t = 0.3;
  const double oracle = brute_triangle(fn, s, t, 400);
  double prev = 0.0;
  for (int n : {4, 8, 16}) {
    const double dt = 0.1 / n;
    const TimeGrid g(dt, 7 * n);  // covers s + t
    const Sampled2D F = Sampled2D::sample(g, g, fn);
    const double err = std::abs(triangle_quadrature(F, 4 * n, 3 * n) - oracle);
    CHECK(err < 2e-3);
    if (prev > 0.0) CHECK(prev / err > 3.0);
    prev = err;
  }
}

TEST_CASE("level quadrature and the marcher agree with the direct rule") {
  const TimeGrid g(0.025, 40);
  const Sampled2D F = Sampled2D::sample(g, g, [](double xi, double tau) { return std::sin(xi + 2 * tau) + xi * tau; });
  const int k = 12;
  const std::vector<double> lvl = triangle_quadrature_level(F, k);
  REQUIRE(lvl.size() >= 20);
  for (int i = 0; i < 20; ++i) CHECK(lvl[static_cast<std::size_t>(i)] == doctest::Approx(triangle_quadrature(F, i, k)).epsilon(1e-12));

  TriangleMarcher tm(40, 20, g.dt());
  for (int row = 0; row < k; ++row) {
    std::vector<double> r(41);
    for (int x = 0; x <= 40; ++x) r[static_cast<std::size_t>(x)] = F.at(x, row);
    tm.push_row(r);
  }
  CHECK(tm.rows() == k);
  for (int i = 0; i + k <= 40; ++i) CHECK(tm.value(i) == doctest::Approx(triangle_quadrature(F, i, k)).epsilon(1e-11));
}
