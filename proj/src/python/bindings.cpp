#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "viscoid/acceptance.hpp"
#include "viscoid/bundle.hpp"
#include "viscoid/config.hpp"
#include "viscoid/errors.hpp"
#include "viscoid/workflow.hpp"

namespace py = pybind11;
using namespace viscoid;

namespace {

py::array_t<double> to_numpy(const std::vector<double>& v) { return py::array_t<double>(py::ssize_t(v.size()), v.data()); }

py::array_t<double> to_numpy(const Sampled1D& v) { return to_numpy(v.data()); }

py::array_t<double> to_numpy(const Sampled2D& v) {
  py::array_t<double> out({py::ssize_t(v.s_nodes()), py::ssize_t(v.t_nodes())});
  std::copy(v.values().begin(), v.values().end(), out.mutable_data());
  return out;
}

py::array_t<double> to_numpy(const std::vector<bool>& v) {
  std::vector<double> d(v.begin(), v.end());
  return to_numpy(d);
}

KernelSpec kernel_spec(const std::string& text) {
  return parse_config("kernel = " + text).kernel;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Viscoelastic string with memory: forward solver, connecting operator, q identification";

  auto base = py::register_exception<Error>(m, "Error");
  py::register_exception<ValidationError>(m, "ValidationError", base.ptr());
  py::register_exception<StructuralError>(m, "StructuralError", base.ptr());
  py::register_exception<NumericalFailure>(m, "NumericalFailure", base.ptr());
  py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
  py::register_exception<FormatError>(m, "FormatError", base.ptr());

  m.def(
      "resolvent",
      [](const std::string& kernel, double t_max, double dt) {
        const MemoryKernel k = build_kernel(kernel_spec(kernel), TimeGrid::covering(t_max, dt));
        const ResolventData r = resolvent(k);
        py::dict d;
        d["N"] = to_numpy(k.N);
        d["R"] = to_numpy(r.R);
        d["R1"] = to_numpy(r.R1);
        d["R2deriv"] = to_numpy(r.R2deriv);
        d["K"] = to_numpy(r.K);
        d["gamma"] = r.gamma;
        d["alpha"] = r.alpha;
        d["residual"] = r.residual;
        return d;
      },
      py::arg("kernel"), py::arg("t_max"), py::arg("dt"),
      "Resolvent of N' for a kernel written as in a config file (one, exp:<rate>).");

  m.def(
      "forward",
      [](double L, double T, double dt, const std::function<double(double)>& q, const std::string& kernel,
         const std::function<double(double)>& f, bool fd) {
        std::vector<double> qs;
        const TimeGrid xg = TimeGrid::covering(L, dt);
        for (int i = 0; i < xg.nodes(); ++i) qs.push_back(q(xg.t(i)));
        const auto qv = [&](double x) { return qs[static_cast<std::size_t>(std::lround(x / dt))]; };
        const StringProblem p = make_problem(L, T, dt, qv, kernel_spec(kernel));
        std::vector<double> fs;
        const TimeGrid tg = p.time_grid();
        for (int k = 0; k < tg.nodes(); ++k) fs.push_back(f(tg.t(k)));
        const Sampled1D fv(tg, fs);
        const WaveField w = fd ? fd_oracle(p, fv) : solve_mild(p, fv);
        py::dict d;
        d["w"] = to_numpy(w.w);
        d["y"] = to_numpy(w.y);
        d["sigma"] = to_numpy(w.sigma);
        d["gamma"] = w.gamma;
        return d;
      },
      py::arg("L"), py::arg("T"), py::arg("dt"), py::arg("q"), py::arg("kernel"), py::arg("f"),
      py::arg("fd") = false,
      "Single simulation; w has shape (space nodes, time nodes). fd=True uses the leapfrog oracle.");

  m.def(
      "synthesize",
      [](const std::string& config_text, const std::filesystem::path& bundle_dir) {
        py::gil_scoped_release release;
        save_bundle(synthesize(parse_config(config_text)), bundle_dir);
      },
      py::arg("config"), py::arg("bundle_dir"), "Writes a synthetic response bundle for a config text.");

  m.def(
      "identify",
      [](const std::filesystem::path& bundle_dir, const std::string& config_text, const std::filesystem::path& out) {
        IdentifyReport rep;
        {
          py::gil_scoped_release release;
          rep = run_identify(load_bundle(bundle_dir), parse_config(config_text), out);
        }
        const ReconstructionResult& r = rep.result;
        py::dict d;
        d["T"] = to_numpy(r.T);
        d["xi"] = to_numpy(r.xi);
        d["q_hat"] = to_numpy(r.q_hat);
        d["residual"] = to_numpy(r.residual);
        d["lambda"] = to_numpy(r.lambda);
        d["guard_flag"] = to_numpy(r.guard_flag);
        d["gram"] = r.gram.C;
        d["report"] = rep.text;
        if (rep.has_truth) d["rel_l2_error"] = rep.rel_l2_error;
        return d;
      },
      py::arg("bundle_dir"), py::arg("config") = "", py::arg("out") = std::filesystem::path("out"),
      "Reconstructs q from a bundle and writes gram.csv, results.csv and report.txt into out.");

  m.def(
      "mass_matrix",
      [](double t_max, double dt, int n) { return ControlBasis::hats(TimeGrid::covering(t_max, dt), n).mass_matrix(n); },
      py::arg("t_max"), py::arg("dt"), py::arg("n"));

  m.def(
      "verify",
      [](const std::string& filter, int threads) {
        AcceptanceOptions opt;
        opt.filter = filter;
        opt.threads = threads;
        std::vector<CriterionResult> res;
        {
          py::gil_scoped_release release;
          res = run_acceptance(opt);
        }
        py::list out;
        for (const auto& r : res) {
          py::dict d;
          d["id"] = r.id;
          d["pass"] = r.pass;
          d["measured"] = r.measured;
          d["threshold"] = r.threshold;
          d["seconds"] = r.seconds;
          d["detail"] = r.detail;
          d["line"] = format_line(r);
          out.append(d);
        }
        return out;
      },
      py::arg("filter") = "", py::arg("threads") = 1);
}
