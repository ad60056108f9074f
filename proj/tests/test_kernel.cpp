#include <doctest.h>

#include <cmath>

#include "viscoid/errors.hpp"
#include "viscoid/kernel.hpp"

using namespace viscoid;

namespace {

double max_error(const Sampled1D& v, const std::function<double(double)>& exact) {
  double e = 0.0;
  for (int k = 0; k < v.size(); ++k) e = std::max(e, std::abs(v[k] - exact(v.grid().t(k))));
  return e;
}

// N = (exp(-t) + exp(-3t)) / 2. Partial fractions of the Laplace transform give
// R = -3/2 - exp(-2t) / 2.
KernelSpec two_exponential(const TimeGrid& g) {
  auto d = [](int p) {
    return [p](double t) { return 0.5 * (std::pow(-1.0, p) * std::exp(-t) + std::pow(-3.0, p) * std::exp(-3.0 * t)); };
  };
  return KernelSpec::tabulated(tabulate_kernel(g, d(0), d(1), d(2), d(3)));
}

}  // namespace

TEST_CASE("exponential kernel has a constant resolvent") {
  const MemoryKernel k = build_kernel(KernelSpec::exponential(0.5), TimeGrid::covering(2.0, 1e-3));
  const ResolventData r = resolvent(k);
  CHECK(max_error(r.R, [](double) { return -0.5; }) < 1e-6);
  CHECK(r.gamma == doctest::Approx(-0.25).epsilon(1e-6));
  CHECK(r.alpha == doctest::Approx(0.0625).epsilon(1e-5));
  CHECK(r.K.max_abs() < 1e-5);
  CHECK(r.residual < 1e-14);
}

TEST_CASE("constant kernel: zero resolvent and plain wave constants") {
  const MemoryKernel k = build_kernel(KernelSpec::constant_one(), TimeGrid(0.01, 100));
  const ResolventData r = resolvent(k);
  CHECK(r.R.max_abs() == 0.0);
  CHECK(r.gamma == 0.0);
  CHECK(r.alpha == 0.0);
  CHECK(k.M[100] == doctest::Approx(1.0));
}

TEST_CASE("two-exponential kernel against its closed-form resolvent") {
  const TimeGrid g = TimeGrid::covering(1.0, 1.0 / 200.0);
  const MemoryKernel k = build_kernel(two_exponential(g), g);
  const ResolventData r = resolvent(k);
  CHECK(max_error(r.R, [](double t) { return -1.5 - 0.5 * std::exp(-2 * t); }) < 1e-4);
  CHECK(max_error(r.R1, [](double t) { return std::exp(-2 * t); }) < 1e-4);
  CHECK(max_error(r.R2deriv, [](double t) { return -2 * std::exp(-2 * t); }) < 1e-4);
  CHECK(r.gamma == doctest::Approx(-1.0).epsilon(1e-4));
  CHECK(r.alpha == doctest::Approx(2.0).epsilon(1e-4));
  CHECK(max_error(r.K, [](double t) { return -2 * std::exp(-t); }) < 1e-4);
}

TEST_CASE("cosine kernel: resolvent -t with second-order error") {
  // N = cos t: the transform of R is -1/s^2.
  double prev = 0.0;
  for (int m : {50, 100, 200}) {
    const TimeGrid g = TimeGrid::covering(1.0, 1.0 / m);
    const MemoryKernel k = build_kernel(
        KernelSpec::tabulated(tabulate_kernel(
            g, [](double t) { return std::cos(t); }, [](double t) { return -std::sin(t); },
            [](double t) { return -std::cos(t); }, [](double t) { return std::sin(t); })),
        g);
    const ResolventData r = resolvent(k);
    const double err = max_error(r.R, [](double t) { return -t; });
    CHECK(max_error(r.R1, [](double) { return -1.0; }) < 1e-3);
    CHECK(std::abs(r.alpha + 1.0) < 1e-3);
    if (prev > 0.0) CHECK(prev / err == doctest::Approx(4.0).epsilon(0.1));
    prev = err;
  }
}

TEST_CASE("tabulated kernels: validation and normalization") {
  const TimeGrid g(0.01, 50);
  auto tab = tabulate_kernel(
      g, [](double t) { return 2 * std::exp(-t); }, [](double t) { return -2 * std::exp(-t); },
      [](double t) { return 2 * std::exp(-t); }, [](double t) { return -2 * std::exp(-t); });
  CHECK_THROWS_AS(build_kernel(KernelSpec::tabulated(tab)), ValidationError);
  const MemoryKernel k = build_kernel(KernelSpec::tabulated(tab, true));
  CHECK(k.N[0] == doctest::Approx(1.0));
  CHECK(k.time_scale == doctest::Approx(std::sqrt(2.0)));
  CHECK(k.grid().dt() == doctest::Approx(0.01 * std::sqrt(2.0)));
  // Nhat(tau) = N(tau / sqrt 2) / 2, so Nhat'(0) = N'(0) / (2 sqrt 2) = -1 / sqrt 2.
  CHECK(k.N1[0] == doctest::Approx(-1.0 / std::sqrt(2.0)));

  KernelTable bad = tab;
  bad.N1.pop_back();
  CHECK_THROWS_AS(build_kernel(KernelSpec::tabulated(bad, true)), ValidationError);
  CHECK_THROWS_AS(build_kernel(KernelSpec::exponential(1.0)), ValidationError);
  CHECK_THROWS_AS(build_kernel(KernelSpec::tabulated(tabulate_kernel(
                                   g, [](double) { return 1.0; }, [](double) { return 0.0; },
                                   [](double) { return 0.0; }, [](double) { return 0.0; })),
                               TimeGrid(0.01, 80)),
                  ValidationError);
  CHECK(KernelSpec::exponential(1.5).describe() == "exp:1.5");
  CHECK(KernelSpec::constant_one().describe() == "one");
}

TEST_CASE("traction and response are mutually inverse to second order") {
  double prev = 0.0;
  for (int m : {100, 200}) {
    const TimeGrid g = TimeGrid::covering(1.0, 1.0 / m);
    const MemoryKernel k = build_kernel(KernelSpec::exponential(1.0), g);
    const Sampled1D y = Sampled1D::sample(g, [](double t) { return std::sin(3 * t) * t; });
    const Sampled1D back = traction_to_response(response_to_traction(y, k), k);
    double err = 0.0;
    for (int n = 0; n < g.nodes(); ++n) err = std::max(err, std::abs(back[n] - y[n]));
    CHECK(err < 1e-3);
    if (prev > 0.0) CHECK(prev / err > 3.0);
    prev = err;
  }
  const TimeGrid g(0.1, 10);
  const MemoryKernel k = build_kernel(KernelSpec::exponential(1.0), g);
  CHECK_THROWS_AS(traction_to_response(Sampled1D::constant(g, 1.0), k), ValidationError);
}

TEST_CASE("derivative is exact on quadratics") {
  const TimeGrid g(0.1, 20);
  const Sampled1D d = derivative(Sampled1D::sample(g, [](double t) { return 3 * t * t - t + 2; }));
  CHECK(max_error(d, [](double t) { return 6 * t - 1; }) < 1e-12);
}

TEST_CASE("volterra solver rejects a degenerate diagonal") {
  const TimeGrid g(0.1, 5);
  // 1 + k(0) dt / 2 = 0
  CHECK_THROWS_AS(solve_volterra(Sampled1D::constant(g, -20.0), Sampled1D::constant(g, 1.0)), NumericalFailure);
}
