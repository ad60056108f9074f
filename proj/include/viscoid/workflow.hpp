#pragma once

#include <filesystem>
#include <string>

#include "viscoid/bundle.hpp"
#include "viscoid/config.hpp"
#include "viscoid/identify.hpp"

namespace viscoid {

/// Responses of every hat over [0, 2 T_max] from the forward solver, plus the
/// true q for later comparison. Deterministic for a given configuration.
Dataset synthesize(const RunConfig& cfg);

/// Long-format Gram export: horizon,T,i,j,C (indices 1-based).
void write_gram_csv(const ConnectingGram& gram, const std::filesystem::path& path);

/// Columns T, xi, q_hat, residual, lambda, guard_flag.
void write_results_csv(const ReconstructionResult& r, const std::filesystem::path& path);

ConnectingGram run_connect(const Dataset& data, const RunConfig& cfg, const std::filesystem::path& out);

struct IdentifyReport {
  ReconstructionResult result;
  bool has_truth = false;
  double max_abs_q = 0.0;
  double max_abs_error = 0.0;  // over horizons in [0.1, 0.9] T_max
  double rel_l2_error = 0.0;   // same window
  std::string text;
};

/// Writes gram.csv, results.csv and report.txt into `out`.
IdentifyReport run_identify(const Dataset& data, const RunConfig& cfg, const std::filesystem::path& out);

/// Resolvent diagnostics on [0, T_max]; writes resolvent.csv, returns a summary.
std::string run_resolvent(const RunConfig& cfg, const std::filesystem::path& out);

/// One simulation of `control` on [0, T_max]; writes trace.csv (t, f, y, sigma)
/// and snapshot.csv (x, w at T_max). Returns a summary.
std::string run_forward(const RunConfig& cfg, const std::filesystem::path& out);

}  // namespace viscoid
