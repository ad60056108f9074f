#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "viscoid/acceptance.hpp"
#include "viscoid/bundle.hpp"
#include "viscoid/config.hpp"
#include "viscoid/errors.hpp"
#include "viscoid/workflow.hpp"

namespace fs = std::filesystem;
using namespace viscoid;

namespace {

enum Exit { ok = 0, verify_failed = 1, config_error = 2, numerical_error = 3, format_error = 4 };

struct Options {
  std::string config;
  std::string out;
  std::string bundle;
  std::string filter;
  std::string inject;
  std::optional<int> threads;
};

RunConfig config_from(const Options& o) {
  RunConfig cfg = o.config.empty() ? parse_config("") : load_config(o.config);
  if (o.threads) {
    if (*o.threads < 0) throw ConfigError("--threads must be >= 0");
    cfg.threads = *o.threads;
    cfg.identify.threads = *o.threads;
  }
  if (!o.out.empty()) cfg.out = o.out;
  if (!o.bundle.empty()) cfg.bundle = o.bundle;
  return cfg;
}

fs::path bundle_dir(const RunConfig& cfg) {
  if (cfg.bundle.empty()) throw ConfigError("no bundle given (config key 'bundle' or --bundle)");
  return cfg.bundle;
}

int cmd_synthesize(const Options& o) {
  RunConfig cfg = config_from(o);
  // Without an explicit --out the bundle goes where the config says it lives.
  const fs::path dir = !o.out.empty() || cfg.bundle.empty() ? cfg.out : cfg.bundle;
  save_bundle(synthesize(cfg), dir);
  std::cout << "bundle written to " << dir.string() << "\n";
  return ok;
}

int cmd_connect(const Options& o) {
  const RunConfig cfg = config_from(o);
  const Dataset data = load_bundle(bundle_dir(cfg));
  const ConnectingGram gram = run_connect(data, cfg, cfg.out);
  std::cout << "gram.csv: " << gram.C.size() << " horizons written to " << cfg.out.string() << "\n";
  return ok;
}

int cmd_identify(const Options& o) {
  const RunConfig cfg = config_from(o);
  const Dataset data = load_bundle(bundle_dir(cfg));
  std::cout << run_identify(data, cfg, cfg.out).text;
  return ok;
}

int cmd_resolvent(const Options& o) {
  const RunConfig cfg = config_from(o);
  std::cout << run_resolvent(cfg, cfg.out);
  return ok;
}

int cmd_forward(const Options& o) {
  const RunConfig cfg = config_from(o);
  std::cout << run_forward(cfg, cfg.out);
  return ok;
}

int cmd_verify(const Options& o) {
  AcceptanceOptions opt;
  opt.filter = o.filter;
  opt.inject = o.inject;
  opt.threads = o.config.empty() ? 0 : config_from(o).threads;
  if (o.threads) opt.threads = *o.threads;

  std::string report;
  const auto results = run_acceptance(opt, [&](const CriterionResult& r) {
    const std::string line = format_line(r);
    report += line + "\n";
    std::cout << line << std::endl;
    std::cerr << "  " << r.id << ": " << r.detail << " [" << r.seconds << " s]\n";
  });
  if (!o.out.empty()) {
    fs::create_directories(o.out);
    std::ofstream(fs::path(o.out) / "verify_report.txt", std::ios::binary) << report;
  }
  for (const auto& r : results) {
    if (!r.pass) return verify_failed;
  }
  return ok;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Viscoelastic string with memory: forward solver, connecting operator, q identification"};
  app.require_subcommand(1);
  Options o;

  auto common = [&](CLI::App* sub, bool needs_config) {
    auto* c = sub->add_option("--config", o.config, "key=value configuration file");
    if (needs_config) c->required();
    sub->add_option("--out", o.out, "output directory");
    sub->add_option("--threads", o.threads, "worker threads (0: one per core)");
  };

  auto* synth = app.add_subcommand("synthesize", "forward-solve every hat and write a response bundle");
  common(synth, true);
  auto* connect = app.add_subcommand("connect", "connecting-operator Gram matrices from a bundle");
  common(connect, true);
  connect->add_option("--bundle", o.bundle, "bundle directory (overrides the config)");
  auto* ident = app.add_subcommand("identify", "reconstruct q from a bundle");
  common(ident, true);
  ident->add_option("--bundle", o.bundle, "bundle directory (overrides the config)");
  auto* verify = app.add_subcommand("verify", "run the acceptance suite");
  common(verify, false);
  verify->add_option("--filter", o.filter, "criterion id or module name, comma separated");
  verify->add_option("--inject", o.inject, "deliberate defect to check the suite catches it (alpha-sign)");
  auto* resolv = app.add_subcommand("resolvent", "resolvent and transformed-kernel diagnostics");
  common(resolv, true);
  auto* fwd = app.add_subcommand("forward", "single simulation of the configured control");
  common(fwd, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return config_error;
  }

  try {
    if (*synth) return cmd_synthesize(o);
    if (*connect) return cmd_connect(o);
    if (*ident) return cmd_identify(o);
    if (*verify) return cmd_verify(o);
    if (*resolv) return cmd_resolvent(o);
    if (*fwd) return cmd_forward(o);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return config_error;
  } catch (const ValidationError& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return config_error;
  } catch (const NumericalFailure& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return numerical_error;
  } catch (const FormatError& e) {
    std::cerr << "data format error: " << e.what() << "\n";
    return format_error;
  } catch (const StructuralError& e) {
    std::cerr << "data format error: " << e.what() << "\n";
    return format_error;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return format_error;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return numerical_error;
  }
  return config_error;
}
