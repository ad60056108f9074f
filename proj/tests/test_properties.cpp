// Invariants checked over families of randomly drawn inputs (fixed seeds).
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include <Eigen/Eigenvalues>

#include "viscoid/connecting.hpp"
#include "viscoid/identify.hpp"

using namespace viscoid;
using std::numbers::pi;

namespace {

// Random smooth control vanishing at t = 0: sum of a_k sin^2(k pi t / 2T).
Sampled1D random_control(std::mt19937& rng, const TimeGrid& g) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const double a1 = u(rng), a2 = u(rng), a3 = u(rng);
  const double T = g.t_max();
  return Sampled1D::sample(g, [=](double t) {
    auto s2 = [&](int k) { return std::pow(std::sin(k * pi * t / (2 * T)), 2); };
    return a1 * s2(1) + a2 * s2(2) + a3 * s2(3);
  });
}

std::function<double(double)> random_q(std::mt19937& rng) {
  std::uniform_real_distribution<double> u(-1.0, 2.0);
  const double c = u(rng), s = u(rng), l = u(rng);
  return [=](double x) { return c + s * std::sin(pi * x) + l * x; };
}

KernelSpec random_kernel(std::mt19937& rng, const TimeGrid& g) {
  std::uniform_real_distribution<double> rate(0.2, 3.0), weight(0.1, 0.9);
  const double a = rate(rng), b = rate(rng) + 0.5, w = weight(rng);
  auto d = [=](int p) {
    return [=](double t) {
      return w * std::pow(-a, p) * std::exp(-a * t) + (1 - w) * std::pow(-b, p) * std::exp(-b * t);
    };
  };
  return KernelSpec::tabulated(tabulate_kernel(g, d(0), d(1), d(2), d(3)));
}

double rel(std::span<const double> a, std::span<const double> b) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num += (a[i] - b[i]) * (a[i] - b[i]);
    den += b[i] * b[i];
  }
  return std::sqrt(num / std::max(den, 1e-300));
}

ResponseTable random_table(std::mt19937& rng, double T_max, double dt, int n) {
  const StringProblem p = make_problem(1.0, 2 * T_max, dt, random_q(rng),
                                       random_kernel(rng, TimeGrid::covering(2 * T_max, dt)));
  ResponseTable tab;
  tab.basis = ControlBasis::hats(TimeGrid::covering(T_max, dt), n);
  tab.kernel = p.kernel;
  for (int j = 0; j < n; ++j) tab.Y.push_back(solve_mild(p, tab.basis.function(j, p.time_grid())).y);
  return tab;
}

}  // namespace

TEST_CASE("forward: finite propagation speed") {
  std::mt19937 rng(11);
  for (int trial = 0; trial < 4; ++trial) {
    const StringProblem p = make_problem(1.0, 0.5, 1.0 / 64, random_q(rng), random_kernel(rng, TimeGrid(1.0 / 64, 32)));
    const WaveField w = solve_mild(p, random_control(rng, p.time_grid()));
    for (int i = 1; i < p.space_grid().nodes(); ++i) {
      for (int k = 0; k < i && k < p.time_grid().nodes(); ++k) CHECK(w.w.at(i, k) == 0.0);
    }
  }
}

TEST_CASE("forward: the control-to-response map is linear") {
  std::mt19937 rng(12);
  for (int trial = 0; trial < 4; ++trial) {
    const StringProblem p = make_problem(1.0, 0.5, 1.0 / 64, random_q(rng), random_kernel(rng, TimeGrid(1.0 / 64, 32)));
    const Sampled1D f = random_control(rng, p.time_grid()), g = random_control(rng, p.time_grid());
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    const double a = u(rng), b = u(rng);
    const Sampled1D lhs = solve_mild(p, f.scaled(a) + g.scaled(b)).y;
    const Sampled1D rhs = solve_mild(p, f).y.scaled(a) + solve_mild(p, g).y.scaled(b);
    CHECK(rel(lhs.values(), rhs.values()) < 1e-12);
  }
}

TEST_CASE("kernel: resolvent identities on random kernels") {
  std::mt19937 rng(13);
  for (int trial = 0; trial < 5; ++trial) {
    const TimeGrid g(1.0 / 100, 100);
    const MemoryKernel k = build_kernel(random_kernel(rng, g), g);
    const ResolventData r = resolvent(k);
    CHECK(r.residual < 1e-13);
    // (I - R*)(I + N1*) = I
    const Sampled1D back = solve_volterra(r.R.scaled(-1.0), r.R);
    CHECK(rel(back.values(), k.N1.values()) < 1e-12);
    CHECK(r.gamma == doctest::Approx(0.5 * k.N1[0]));
  }
}

TEST_CASE("connecting: H vanishes on both axes") {
  std::mt19937 rng(14);
  const ResponseTable tab = random_table(rng, 0.25, 1.0 / 64, 6);
  const ResolventData res = resolvent(tab.kernel);
  for (auto [i, j] : {std::pair{0, 0}, std::pair{1, 4}, std::pair{5, 2}}) {
    const TimeGrid sg = tab.data_grid(), tg = tab.basis.grid;
    const Separable2D ph = phi(tab.basis.function(i), tab.basis.function(j), tab.Y[static_cast<std::size_t>(i)],
                               tab.Y[static_cast<std::size_t>(j)], tab.kernel, sg, tg);
    const BlagoSolution sol = blago_solve(affine_chain(psi(ph, tab.kernel), res, tab.kernel), res);
    for (int k = 0; k < tg.nodes(); ++k) {
      CHECK(sol.H.at(0, k) == 0.0);
      CHECK(sol.H.at(k, 0) == 0.0);
    }
  }
}

TEST_CASE("connecting: the exponential weight does not change the solution") {
  std::mt19937 rng(15);
  // Redraw until the memory term is really exercised.
  ResponseTable tab = random_table(rng, 0.25, 1.0 / 64, 6);
  for (int draw = 0; draw < 50 && resolvent(tab.kernel).K.max_abs() <= 0.1; ++draw) {
    tab = random_table(rng, 0.25, 1.0 / 64, 6);
  }
  const ResolventData res = resolvent(tab.kernel);
  REQUIRE(res.K.max_abs() > 0.1);
  const Separable2D ph = phi(tab.basis.function(1), tab.basis.function(3), tab.Y[1], tab.Y[3], tab.kernel,
                             tab.data_grid(), tab.basis.grid);
  const Sampled2D G = affine_chain(psi(ph, tab.kernel), res, tab.kernel);
  const Sampled2D ref = blago_solve(G, res).W;
  for (double sigma : {0.0, 1.0, 5.0}) {
    BlagoOptions opt;
    opt.method = BlagoMethod::picard;
    opt.sigma_weight = sigma;
    const BlagoSolution sol = blago_solve(G, res, opt);
    CHECK(rel(sol.W.values(), ref.values()) < 1e-10);
    CHECK(sol.sweeps >= 2);
  }
}

TEST_CASE("connecting: Gram is symmetric and positive semidefinite") {
  std::mt19937 rng(16);
  for (int trial = 0; trial < 2; ++trial) {
    const ResponseTable tab = random_table(rng, 0.25, 1.0 / 64, 7);
    GramOptions go;
    go.full_pairs = true;
    const ConnectingGram gram = gram_from_data(tab, go);
    CHECK(gram.asymmetry_measured);
    CHECK(gram.asymmetry < 0.02);
    for (const auto& C : gram.C) {
      CHECK((C - C.transpose()).norm() == 0.0);
      const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(C);
      CHECK(es.eigenvalues().minCoeff() >= -1e-8 * es.eigenvalues().maxCoeff());
    }
  }
}

TEST_CASE("connecting: Gram entries scale bilinearly with the controls") {
  std::mt19937 rng(17);
  const ResponseTable tab = random_table(rng, 0.25, 1.0 / 64, 5);
  ResponseTable scaled = tab;
  scaled.basis = tab.basis.scaled(2, 3.0);
  scaled.Y[2] = tab.Y[2].scaled(3.0);
  const Eigen::MatrixXd A = gram_from_data(tab).C.back(), B = gram_from_data(scaled).C.back();
  for (int i = 0; i < 5; ++i) {
    for (int j = 0; j < 5; ++j) {
      const double f = (i == 2 ? 3.0 : 1.0) * (j == 2 ? 3.0 : 1.0);
      CHECK(B(i, j) == doctest::Approx(f * A(i, j)).epsilon(1e-10).scale(1e-12));
    }
  }
}

TEST_CASE("parallel runs reproduce the serial result bit for bit") {
  std::mt19937 rng(18);
  const ResponseTable tab = random_table(rng, 0.25, 1.0 / 256, 10);
  IdentifyConfig serial, threaded;
  threaded.threads = 3;
  const ReconstructionResult a = pipeline(tab, serial), b = pipeline(tab, threaded);
  CHECK(a.q_hat == b.q_hat);
  CHECK(a.xi == b.xi);
  for (std::size_t h = 0; h < a.gram.C.size(); ++h) CHECK(a.gram.C[h] == b.gram.C[h]);
}

TEST_CASE("identify: q reconstruction is invariant under scaling of xi") {
  std::mt19937 rng(19);
  std::uniform_real_distribution<double> u(0.5, 3.0);
  const double w = u(rng);
  double prev = 0.0;
  for (double h : {0.03, 0.015}) {
    std::vector<double> T, xi;
    for (int k = 1; k * h <= 0.9 + 1e-12; ++k) {
      T.push_back(h * k);
      xi.push_back(std::sinh(w * T.back()));
    }
    std::vector<double> big(xi);
    for (double& v : big) v *= 1e3;
    const QReconstruction a = reconstruct_q(T, xi, 3, 1e-6), b = reconstruct_q(T, big, 3, 1e-3);
    double err = 0.0;
    for (std::size_t k = 0; k < T.size(); ++k) {
      CHECK(a.q[k] == doctest::Approx(b.q[k]).epsilon(1e-9));
      err = std::max(err, std::abs(a.q[k] + w * w));
    }
    // Sanity on the value itself; the local fits converge at second order.
    CHECK(err < 0.05 * w * w);
    if (prev > 0.0) CHECK(prev / err > 3.5);
    prev = err;
  }
}
