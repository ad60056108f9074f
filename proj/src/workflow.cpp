#include "viscoid/workflow.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "viscoid/errors.hpp"
#include "viscoid/forward.hpp"
#include "viscoid/parallel.hpp"

namespace viscoid {

namespace {

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw FormatError("cannot write " + path.string());
  f << text;
}

std::vector<double> nodes_of(const TimeGrid& g) {
  std::vector<double> t(static_cast<std::size_t>(g.nodes()));
  for (int k = 0; k < g.nodes(); ++k) t[static_cast<std::size_t>(k)] = g.t(k);
  return t;
}

}  // namespace

Dataset synthesize(const RunConfig& cfg) {
  const double L = cfg.L;
  const Expression& q = cfg.q;
  const StringProblem p = make_problem(L, 2.0 * cfg.T_max, cfg.dt, [&](double x) { return q(x, L); }, cfg.kernel);
  const ControlBasis basis = ControlBasis::hats(cfg.basis_grid(), cfg.n_basis);
  const TimeGrid tg = p.time_grid();
  const ResolventData res = resolvent(p.kernel);

  Dataset data;
  data.L = L;
  data.q_true = p.q;
  data.kernel_kind = cfg.kernel.describe();
  data.created_by = "viscoid synthesize";
  data.table.basis = basis;
  data.table.kernel = p.kernel;
  data.table.meta = "synthetic q=" + q.text();
  data.table.Y.resize(static_cast<std::size_t>(basis.size()));
  parallel_for(basis.size(), cfg.threads, [&](int j) {
    data.table.Y[static_cast<std::size_t>(j)] = solve_mild(p, basis.function(j, tg), res).y;
  });
  return data;
}

void write_gram_csv(const ConnectingGram& gram, const std::filesystem::path& path) {
  std::vector<double> h, T, i, j, c;
  for (std::size_t k = 0; k < gram.C.size(); ++k) {
    const auto& C = gram.C[k];
    for (int a = 0; a < C.rows(); ++a) {
      for (int b = 0; b < C.cols(); ++b) {
        h.push_back(gram.horizon_nodes[k]);
        T.push_back(gram.T[k]);
        i.push_back(a + 1);
        j.push_back(b + 1);
        c.push_back(C(a, b));
      }
    }
  }
  write_csv(path, {"horizon", "T", "i", "j", "C"}, {h, T, i, j, c});
}

void write_results_csv(const ReconstructionResult& r, const std::filesystem::path& path) {
  std::vector<double> guard(r.guard_flag.size());
  for (std::size_t k = 0; k < guard.size(); ++k) guard[k] = r.guard_flag[k] ? 1.0 : 0.0;
  write_csv(path, {"T", "xi", "q_hat", "residual", "lambda", "guard_flag"},
            {r.T, r.xi, r.q_hat, r.residual, r.lambda, guard});
}

ConnectingGram run_connect(const Dataset& data, const RunConfig& cfg, const std::filesystem::path& out) {
  GramOptions opt;
  opt.horizons = resolve_horizons(cfg.horizons, data.table.basis);
  opt.threads = cfg.threads;
  ConnectingGram gram = gram_from_data(data.table, opt);
  std::filesystem::create_directories(out);
  write_gram_csv(gram, out / "gram.csv");
  return gram;
}

IdentifyReport run_identify(const Dataset& data, const RunConfig& cfg, const std::filesystem::path& out) {
  IdentifyConfig icfg = cfg.identify;
  icfg.horizons = resolve_horizons(cfg.horizons, data.table.basis);
  icfg.threads = cfg.threads;
  IdentifyReport rep;
  rep.result = pipeline(data.table, icfg);
  const auto& r = rep.result;

  const double T_max = data.table.basis.grid.t_max();
  double num = 0.0, den = 0.0;
  for (std::size_t k = 0; k < r.T.size(); ++k) {
    rep.max_abs_q = std::max(rep.max_abs_q, std::abs(r.q_hat[k]));
    if (!data.q_true) continue;
    if (r.T[k] < 0.1 * T_max - 1e-12 || r.T[k] > 0.9 * T_max + 1e-12) continue;
    const double truth = interpolate(*data.q_true, r.T[k]);
    const double e = r.q_hat[k] - truth;
    rep.max_abs_error = std::max(rep.max_abs_error, std::abs(e));
    num += e * e;
    den += truth * truth;
  }
  rep.has_truth = data.q_true.has_value();
  rep.rel_l2_error = den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);

  std::ostringstream os;
  os.precision(6);
  os << "horizons " << r.T.size() << "\n";
  os << "max_abs_q_hat " << rep.max_abs_q << "\n";
  int guarded = 0, warned = 0;
  for (bool g : r.guard_flag) guarded += g ? 1 : 0;
  for (bool w : r.warning) warned += w ? 1 : 0;
  os << "guarded_horizons " << guarded << "\n";
  os << "lambda_warnings " << warned << "\n";
  if (rep.has_truth) {
    os << "max_abs_error_0.1_0.9 " << rep.max_abs_error << "\n";
    os << "rel_l2_error_0.1_0.9 " << rep.rel_l2_error << "\n";
  }
  rep.text = os.str();

  std::filesystem::create_directories(out);
  write_gram_csv(r.gram, out / "gram.csv");
  write_results_csv(r, out / "results.csv");
  write_text(out / "report.txt", rep.text);
  return rep;
}

std::string run_resolvent(const RunConfig& cfg, const std::filesystem::path& out) {
  const TimeGrid g = cfg.basis_grid();
  const MemoryKernel k = build_kernel(cfg.kernel, g);
  const ResolventData res = resolvent(k);
  std::filesystem::create_directories(out);
  write_csv(out / "resolvent.csv", {"t", "N", "R", "R1", "R2deriv", "K"},
            {nodes_of(g), k.N.data(), res.R.data(), res.R1.data(), res.R2deriv.data(), res.K.data()});
  std::ostringstream os;
  os.precision(17);
  os << "gamma " << res.gamma << "\nalpha " << res.alpha << "\nresidual " << res.residual << "\n";
  return os.str();
}

std::string run_forward(const RunConfig& cfg, const std::filesystem::path& out) {
  const double L = cfg.L, T = cfg.T_max;
  const StringProblem p = make_problem(L, T, cfg.dt, [&](double x) { return cfg.q(x, L); }, cfg.kernel);
  const TimeGrid tg = p.time_grid();
  const Sampled1D f = Sampled1D::sample(tg, [&](double t) { return cfg.control(t, T); });
  const WaveField field = solve_mild(p, f);
  const Sampled1D snap = final_snapshot(field, T);
  std::filesystem::create_directories(out);
  write_csv(out / "trace.csv", {"t", "f", "y", "sigma"},
            {nodes_of(tg), field.f.data(), field.y.data(), field.sigma.data()});
  write_csv(out / "snapshot.csv", {"x", "w"}, {nodes_of(snap.grid()), snap.data()});
  std::ostringstream os;
  os.precision(6);
  os << "gamma " << field.gamma << "\nmax_abs_w " << field.w.max_abs() << "\nmax_abs_y "
     << field.y.max_abs() << "\n";
  return os.str();
}

}  // namespace viscoid
