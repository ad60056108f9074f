#include <doctest.h>

#include <cmath>

#include "viscoid/errors.hpp"
#include "viscoid/identify.hpp"

using namespace viscoid;

namespace {

// Fine midpoint rule for int_0^T M(T - t) e_j(t) dt.
double brute_rhs(const std::function<double(double)>& M, double T, const ControlBasis& b, int j) {
  const double a = b.node_time(j), c = b.node_time(j + 1), d = b.node_time(j + 2);
  const int cells = 40000;
  const double h = (d - a) / cells;
  double s = 0.0;
  for (int k = 0; k < cells; ++k) {
    const double t = a + (k + 0.5) * h;
    if (t >= T) break;
    const double e = t < c ? (t - a) / (c - a) : (d - t) / (d - c);
    s += M(T - t) * e * h;
  }
  return s * b.amplitude[static_cast<std::size_t>(j)];
}

}  // namespace

TEST_CASE("steering right-hand side, constant kernel (closed form)") {
  // M(t) = t, and a hat integrates a linear function at its centroid.
  const ControlBasis b = ControlBasis::hats(TimeGrid(1.0 / 64, 64), 9);
  const double T = b.node_time(7);
  const MemoryKernel k = build_kernel(KernelSpec::constant_one(), b.grid);
  const Eigen::VectorXd r = steering_rhs(k, T, b, 6);
  REQUIRE(r.size() == 6);
  for (int j = 0; j < 6; ++j) {
    const double a = b.node_time(j), c = b.node_time(j + 1), d = b.node_time(j + 2);
    CHECK(r(j) == doctest::Approx(0.5 * (d - a) * (T - (a + c + d) / 3.0)).epsilon(1e-12));
  }
}

TEST_CASE("steering right-hand side, exponential kernel (refined quadrature)") {
  const ControlBasis b = ControlBasis::hats(TimeGrid(1.0 / 128, 128), 15);
  const double T = b.node_time(12);
  const MemoryKernel k = build_kernel(KernelSpec::exponential(2.0), b.grid);
  const Eigen::VectorXd r = steering_rhs(k, T, b, 11);
  auto M = [](double t) { return (1.0 - std::exp(-2.0 * t)) / 2.0; };
  for (int j = 0; j < 11; ++j) CHECK(r(j) == doctest::Approx(brute_rhs(M, T, b, j)).epsilon(1e-4));
}

TEST_CASE("steering with the mass matrix recovers the linear control") {
  const ControlBasis b = ControlBasis::hats(TimeGrid(1.0 / 256, 256), 32);
  const int horizon = 33;
  const double T = b.node_time(horizon);
  const MemoryKernel k = build_kernel(KernelSpec::constant_one(), b.grid);
  const Eigen::MatrixXd C = b.mass_matrix(32);
  IdentifyConfig cfg;
  const SteeringResult s = steering_control(C, steering_rhs(k, T, b, 32), b, horizon, 0.0, cfg);
  CHECK(s.residual < 1e-8);
  CHECK_FALSE(s.warning);
  CHECK(s.condition > 1.0);
  double err = 0.0;
  for (int n = 0; n < s.control.size(); ++n) {
    err = std::max(err, std::abs(s.control[n] - (T - s.control.grid().t(n))));
  }
  CHECK(err < 0.02 * T);
  CHECK(xi_trace(s.control) == doctest::Approx(T).epsilon(0.01));
}

TEST_CASE("fixed lambda and an indefinite Gram") {
  const ControlBasis b = ControlBasis::hats(TimeGrid(1.0 / 64, 64), 7);
  IdentifyConfig cfg;
  cfg.auto_lambda = false;
  cfg.lambda = 1e-3;
  const Eigen::MatrixXd C = b.mass_matrix(7);
  const Eigen::VectorXd rhs = Eigen::VectorXd::Ones(7);
  const SteeringResult s = steering_control(C, rhs, b, 8, 0.0, cfg);
  CHECK(s.lambda == 1e-3);
  const Eigen::VectorXd expect = (C + 1e-3 * Eigen::MatrixXd::Identity(7, 7)).ldlt().solve(rhs);
  CHECK((s.coeffs - expect).norm() < 1e-10 * expect.norm());

  Eigen::MatrixXd bad = C;
  bad(0, 0) = -1.0;
  CHECK_THROWS_AS(steering_control(bad, rhs, b, 8, 0.0, IdentifyConfig{}), NumericalFailure);
  CHECK_THROWS(steering_control(C, Eigen::VectorXd::Ones(3), b, 8, 0.0, IdentifyConfig{}));
}

TEST_CASE("trace extrapolation is exact on quadratics") {
  const Sampled1D f = Sampled1D::sample(TimeGrid(0.01, 30), [](double t) { return 1 + 2 * t + 3 * t * t; });
  CHECK(xi_trace(f) == doctest::Approx(1.0).epsilon(1e-12));
  const Sampled1D g(TimeGrid(0.01, 30), f.data());
  CHECK(xi_trace(g, -1.0) == doctest::Approx(std::exp(-0.3)).epsilon(1e-12));
}

TEST_CASE("q from a known target: xi = sin(2T) gives q = 4") {
  // The local fits carry an O(h^2) truncation error; check size and rate.
  double prev = 0.0;
  for (double h : {0.02, 0.01}) {
    std::vector<double> T, xi;
    for (int k = 1; k * h <= 1.2 + 1e-12; ++k) {
      T.push_back(h * k);
      xi.push_back(std::sin(2 * h * k));
    }
    const QReconstruction r = reconstruct_q(T, xi, 3, 0.01);
    double err = 0.0;
    for (std::size_t k = 0; k < T.size(); ++k) {
      CHECK_FALSE(r.guarded[k]);
      err = std::max(err, std::abs(r.q[k] - 4.0));
    }
    CHECK(r.min_divisor == doctest::Approx(std::sin(2 * h)));
    CHECK(err < 0.1);
    if (prev > 0.0) CHECK(prev / err > 3.5);
    prev = err;
  }
}

TEST_CASE("guarded samples are filled by interpolation") {
  std::vector<double> T, xi;
  for (int k = 1; k <= 40; ++k) {
    T.push_back(0.1 * k);
    xi.push_back(std::cos(0.1 * k));  // zero near T = pi / 2
  }
  const QReconstruction r = reconstruct_q(T, xi, 2, 0.08);
  int guarded = 0;
  for (std::size_t k = 0; k < T.size(); ++k) {
    guarded += r.guarded[k] ? 1 : 0;
    CHECK(r.q[k] == doctest::Approx(1.0).epsilon(0.02));
  }
  CHECK(guarded >= 1);
  CHECK(r.min_divisor > 0.08);
}

TEST_CASE("reconstruction input validation") {
  std::vector<double> T{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7}, xi(7, 1e-9);
  CHECK_THROWS_AS(reconstruct_q(T, xi, 3, 1e-3), NumericalFailure);
  CHECK_THROWS_AS(reconstruct_q(T, xi, 0, 1e-3), ValidationError);
  CHECK_THROWS_AS(reconstruct_q(T, xi, 4, 1e-3), ValidationError);
  CHECK_THROWS_AS(reconstruct_q(T, std::vector<double>(3, 1.0), 1, 1e-3), StructuralError);
  CHECK_THROWS_AS(reconstruct_q(T, std::vector<double>(7, 1.0), 1, 0.0), ValidationError);
}

TEST_CASE("pipeline on the undamped string recovers q = 0") {
  const double dt = 1.0 / 128, T_max = 0.5;
  const StringProblem p = make_problem(1.0, 2 * T_max, dt, [](double) { return 0.0; }, KernelSpec::constant_one());
  ResponseTable tab;
  tab.basis = ControlBasis::hats(TimeGrid::covering(T_max, dt), 16);
  tab.kernel = p.kernel;
  for (int j = 0; j < 16; ++j) tab.Y.push_back(solve_mild(p, tab.basis.function(j, p.time_grid())).y);
  const ReconstructionResult r = pipeline(tab, IdentifyConfig{});
  REQUIRE(r.T.size() == 14);
  for (std::size_t k = 0; k < r.T.size(); ++k) {
    CHECK(r.xi[k] == doctest::Approx(r.T[k]).epsilon(0.02));
    if (r.T[k] >= 0.1 * T_max) CHECK(std::abs(r.q_hat[k]) < 0.1);
    CHECK_FALSE(r.guard_flag[k]);
  }
  CHECK(r.gram.C.size() == 14);
}
