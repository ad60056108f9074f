#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "viscoid/connecting.hpp"

namespace viscoid {

struct IdentifyConfig {
  std::vector<int> horizons;   // basis node indices; empty: default_horizons
  bool auto_lambda = true;
  double lambda = 0.0;         // used when auto_lambda is false
  int smoothing_halfwidth = 3;
  double xi_guard = 0.0;       // 0: five grid steps
  int threads = 1;
};

/// b_j = int_0^T M(T - t) e_j(t) dt for the first `count` hats, exact for
/// integrands that are piecewise linear on the grid.
Eigen::VectorXd steering_rhs(const MemoryKernel& k, double T, const ControlBasis& basis, int count);

struct SteeringResult {
  Eigen::VectorXd coeffs;
  Sampled1D control;  // on [0, T]
  double lambda = 0.0;
  double residual = 0.0;   // ||C c - b|| / ||b||
  double condition = 0.0;  // mu_max / mu_min of the symmetrized Gram
  bool warning = false;    // auto sweep never reached the residual target
};

/// Tikhonov solve (C + lambda I) c = b over the first C.rows() hats, followed
/// by reassembly of the control as a piecewise-linear function through
/// weighted hat averages of sum c_i e_i. `horizon` is the basis node of T.
SteeringResult steering_control(const Eigen::MatrixXd& C, const Eigen::VectorXd& b,
                                const ControlBasis& basis, int horizon, double gamma,
                                const IdentifyConfig& cfg);

/// exp(gamma T) f(0+), with f(0+) extrapolated quadratically through grid
/// nodes 1, 2, 3 of f.
double xi_trace(const Sampled1D& f_T, double gamma = 0.0);

struct QReconstruction {
  std::vector<double> q;
  std::vector<bool> guarded;
  double min_divisor = 0.0;  // smallest |xi| actually divided by
};

/// q = -xi'' / xi with xi'' from local least-squares fits: quadratics on
/// centred windows, cubics on the shifted windows at either end.
QReconstruction reconstruct_q(const std::vector<double>& T, const std::vector<double>& xi,
                              int halfwidth, double guard);

struct ReconstructionResult {
  std::vector<double> T, xi, q_hat, residual, lambda, condition;
  std::vector<bool> guard_flag, warning;
  double min_divisor = 0.0;
  ConnectingGram gram;
};

/// Everything after the Gram: per-horizon steering, traces and q.
ReconstructionResult identify_from_gram(const ConnectingGram& gram, const ResponseTable& tab,
                                        const IdentifyConfig& cfg);

ReconstructionResult pipeline(const ResponseTable& tab, const IdentifyConfig& cfg);

}  // namespace viscoid
